#include <doctest.h>

#include <cmath>

#include "dcm/error.hpp"
#include "dcm/estimate.hpp"
#include "dcm/metrics.hpp"
#include "dcm/validate.hpp"
#include "support.hpp"

using dcm::Exclusion;

namespace {

const dcm::DataDictionary& dict() { return testing::synth_data().dictionary(); }

dcm::UtilitySpec spec_file(const std::string& key) { return testing::load_spec("tests/data/specs/" + key + ".dcm"); }

/// A converged result for `spec` with the given values and t-ratios for its free parameters.
dcm::EstimationResult fake_result(const dcm::UtilitySpec& spec, const std::map<std::string, double>& values,
                                  double t_default = 5.0, const std::map<std::string, double>& t = {}) {
    dcm::EstimationResult r;
    std::vector<double> ts;
    for (const auto& name : dcm::used_parameters(spec)) {
        const auto* p = spec.find_parameter(name);
        if (!p->is_free()) continue;
        r.estimates.names.push_back(name);
        r.estimates.values.push_back(values.count(name) ? values.at(name) : -0.5);
        ts.push_back(t.count(name) ? t.at(name) : t_default);
    }
    std::vector<double> se;
    for (std::size_t i = 0; i < ts.size(); ++i) se.push_back(std::abs(r.estimates.values[i] / ts[i]));
    r.std_errors = se;
    r.t_ratios = ts;
    r.loglik = -800;
    r.null_loglik = -1078.12;
    r.converged = true;
    r.hessian_pd = true;
    r.reason = dcm::StopReason::gradient_tolerance;
    r.n_obs = 1000;
    return r;
}

}  // namespace

TEST_CASE("information criteria") {
    auto f = dcm::information_criteria(-981.805, 7, 1000);
    CHECK(f.aic == doctest::Approx(1977.61).epsilon(1e-6));
    CHECK(f.bic == doctest::Approx(2011.96).epsilon(1e-5));
    f = dcm::information_criteria(-1031.815, 5, 1000);
    CHECK(f.aic == doctest::Approx(2073.63).epsilon(1e-6));
    CHECK(f.bic == doctest::Approx(2098.17).epsilon(1e-5));
    f = dcm::information_criteria(0, 0, 1);
    CHECK(f.aic == 0.0);
    CHECK(f.bic == 0.0);
    CHECK(f.k == 0);
}

TEST_CASE("rho squared") {
    CHECK(dcm::rho_squared(-100, -100) == 0.0);
    CHECK(dcm::rho_squared(-50, -100) == doctest::Approx(0.5));
    const auto r = dcm::estimate(dcm::bind(testing::load_spec("specs/best.dcm"), testing::synth_data()));
    const double rho = dcm::rho_squared(r.loglik, r.null_loglik);
    CHECK(rho > 0);
    CHECK(rho < 1);
    CHECK(rho == doctest::Approx(1 - r.loglik / r.null_loglik));
}

TEST_CASE("value of time from generic coefficients") {
    const auto s = spec_file("time_cost");
    const auto v = dcm::value_of_time(fake_result(s, {{"b_time", -0.0099}, {"b_cost", -0.05}}), s, dict());
    CHECK(v.value == doctest::Approx(0.198));
    CHECK(v.reliable);
    CHECK(v.per_alternative.size() == 4);

    const auto weak = dcm::value_of_time(fake_result(s, {{"b_time", -0.0099}, {"b_cost", -0.05}}, 5.0, {{"b_cost", 0.8}}), s, dict());
    CHECK(weak.value == doctest::Approx(0.198));
    CHECK_FALSE(weak.reliable);
    CHECK(weak.notes.find("b_cost") != std::string::npos);
}

TEST_CASE("value of time ignores interactions and averages alternative-specific ratios") {
    const auto best = testing::load_spec("specs/best.dcm");
    const auto v = dcm::value_of_time(fake_result(best, {{"b_time", -0.01}, {"b_cost", -0.04}, {"b_time_bus", -0.5}}), best, dict());
    CHECK(v.value == doctest::Approx(0.25));

    const auto s = dcm::parse_spec(
        "alt car bus air rail\nparam b_t_car\nparam b_t_bus\nparam b_c\n"
        "U(car) = b_t_car * time_car + b_c * cost_car\nU(bus) = b_t_bus * time_bus + b_c * cost_bus\n"
        "U(air) = b_c * cost_air\n");
    const auto alt = dcm::value_of_time(fake_result(s, {{"b_t_car", -0.01}, {"b_t_bus", -0.03}, {"b_c", -0.1}}), s, dict());
    CHECK(alt.per_alternative.size() == 2);
    CHECK(alt.per_alternative.at("car") == doctest::Approx(0.1));
    CHECK(alt.per_alternative.at("bus") == doctest::Approx(0.3));
    CHECK(alt.value == doctest::Approx(0.2));
}

TEST_CASE("value of time needs linear time and cost") {
    const auto s = spec_file("log_cost");
    CHECK_THROWS_AS(dcm::value_of_time(fake_result(s, {}), s, dict()), dcm::MissingCoefficient);
    const auto bar = spec_file("business_air_rail");
    CHECK_THROWS_AS(dcm::value_of_time(fake_result(bar, {}), bar, dict()), dcm::MissingCoefficient);
}

TEST_CASE("value of time on the estimated best spec") {
    const auto best = testing::load_spec("specs/best.dcm");
    const auto r = dcm::estimate(dcm::bind(best, testing::synth_data()));
    const auto v = dcm::value_of_time(r, best, dict());
    CHECK(v.value == doctest::Approx(*r.estimate("b_time") / *r.estimate("b_cost")));
    CHECK(v.reliable);
    const auto back = dcm::vot_from_json(dcm::to_json(v));
    CHECK(back.value == v.value);
    CHECK(back.reliable == v.reliable);
    CHECK(back.per_alternative == v.per_alternative);
}

TEST_CASE("inclusion labels") {
    const auto best = testing::load_spec("specs/best.dcm");
    const auto ok = dcm::check_model(fake_result(best, {{"b_time", -0.01}, {"b_cost", -0.05}}), best, dict());
    CHECK(ok.exclusion == Exclusion::included);
    CHECK(ok.has_asc);
    CHECK(ok.sign_violations.empty());
    CHECK(ok.notes.empty());

    const auto positive = dcm::check_model(fake_result(best, {{"b_cost", 0.02}}), best, dict());
    CHECK(positive.exclusion == Exclusion::excluded_positive_sign);
    CHECK(positive.sign_violations == std::vector<dcm::SignViolation>{{"b_cost", 0.02}});

    auto failed = fake_result(best, {{"b_cost", 0.02}, {"b_time", 0.01}});
    failed.converged = false;
    failed.reason = dcm::StopReason::max_iterations;
    const auto nc = dcm::check_model(failed, best, dict());
    CHECK(nc.exclusion == Exclusion::excluded_nonconvergence);
    CHECK(nc.sign_violations.size() == 2);
    CHECK(nc.notes.back().find("convergence_reason=max_iterations") != std::string::npos);

    const auto noasc = spec_file("no_asc");
    CHECK(dcm::check_model(fake_result(noasc, {}), noasc, dict()).exclusion == Exclusion::excluded_no_asc);
}

TEST_CASE("label precedence keeps every flag") {
    const auto noasc = spec_file("no_asc");
    const auto both = dcm::check_model(fake_result(noasc, {{"b_cost", 0.03}}), noasc, dict());
    CHECK(both.exclusion == Exclusion::excluded_positive_sign);
    CHECK_FALSE(both.has_asc);

    auto all = fake_result(noasc, {{"b_cost", 0.03}});
    all.converged = false;
    const auto r = dcm::check_model(all, noasc, dict());
    CHECK(r.exclusion == Exclusion::excluded_nonconvergence);
    CHECK_FALSE(r.has_asc);
    CHECK(r.sign_violations.size() == 1);
}

TEST_CASE("negative multipliers flip the sign test") {
    const auto s = dcm::parse_spec(
        "alt car bus air rail\nparam asc_bus\nparam b_t\nparam b_c\n"
        "U(car) = -b_t * time_car - b_c * cost_car\nU(bus) = asc_bus - b_t * time_bus - b_c * cost_bus\n");
    CHECK(dcm::check_model(fake_result(s, {{"b_t", 0.01}, {"b_c", 0.05}}), s, dict()).exclusion == Exclusion::included);
    CHECK(dcm::check_model(fake_result(s, {{"b_t", -0.01}, {"b_c", 0.05}}), s, dict()).exclusion ==
          Exclusion::excluded_positive_sign);
}

TEST_CASE("fixed constants do not count as ASCs; a full set is flagged") {
    const auto s = dcm::parse_spec("alt car bus\nparam asc_bus fixed 0.3\nparam b_t\n"
                                   "U(car) = b_t * time_car\nU(bus) = asc_bus + b_t * time_bus\n");
    CHECK(dcm::check_model(fake_result(s, {}), s, dict()).exclusion == Exclusion::excluded_no_asc);

    const auto all = dcm::parse_spec("alt car bus\nparam asc_car\nparam asc_bus\nparam b_t\n"
                                     "U(car) = asc_car + b_t * time_car\nU(bus) = asc_bus + b_t * time_bus\n");
    const auto r = dcm::check_model(fake_result(all, {}), all, dict());
    CHECK(r.has_asc);
    CHECK(std::find(r.notes.begin(), r.notes.end(), "unidentified_asc") != r.notes.end());
}

TEST_CASE("insignificant core coefficients are listed") {
    const auto s = spec_file("time_cost");
    const auto r = dcm::check_model(fake_result(s, {}, 5.0, {{"b_time", -1.2}}), s, dict());
    CHECK(r.insignificant_core == std::vector<std::string>{"b_time"});
    CHECK(r.exclusion == Exclusion::included);
}

TEST_CASE("batch filter") {
    const auto best = testing::load_spec("specs/best.dcm");
    const auto noasc = spec_file("no_asc");
    std::vector<dcm::ValidatedSpec> batch;
    for (int i = 0; i < 6; ++i) {
        auto s = i == 2 ? noasc : best;
        s.name = "S" + std::to_string(i + 1);
        const auto r = fake_result(s, {{"b_cost", i == 4 ? 0.1 : -0.05}});
        batch.push_back({s, dcm::check_model(r, s, dict())});
    }
    const auto p = dcm::batch_filter(batch);
    REQUIRE(p.included.size() == 4);
    REQUIRE(p.excluded.size() == 2);
    CHECK(p.included[0].spec.name == "S1");
    CHECK(p.included[3].spec.name == "S6");
    CHECK(p.excluded[0].spec.name == "S3");
    CHECK(p.excluded[0].report.exclusion == Exclusion::excluded_no_asc);
    CHECK(p.excluded[1].report.exclusion == Exclusion::excluded_positive_sign);

    batch.erase(batch.begin() + 4);
    batch.erase(batch.begin() + 2);
    CHECK(dcm::batch_filter(batch).excluded.empty());
}

TEST_CASE("validation JSON round trip") {
    const auto noasc = spec_file("no_asc");
    const auto r = dcm::check_model(fake_result(noasc, {{"b_cost", 0.03}}, 1.0), noasc, dict());
    CHECK(dcm::validation_from_json(dcm::to_json(r)) == r);
    for (auto e : {Exclusion::included, Exclusion::excluded_no_asc, Exclusion::excluded_nonconvergence,
                   Exclusion::excluded_positive_sign})
        CHECK(dcm::exclusion_from_string(dcm::to_string(e)) == e);
}
