#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dcm/estimate.hpp"
#include "dcm/llmgate.hpp"
#include "dcm/metrics.hpp"
#include "dcm/mnl.hpp"
#include "dcm/report.hpp"
#include "dcm/runner.hpp"
#include "dcm/text.hpp"
#include "dcm/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& out) {
    if (out.empty())
        std::cout << text;
    else {
        if (const auto dir = fs::path(out).parent_path(); !dir.empty()) fs::create_directories(dir);
        dcm::text::write_file(out, text);
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// "provider/model" pairs; a bare provider expands to every model with a
// fixture for the experiment.
std::vector<dcm::ProviderConfig> parse_providers(const std::vector<std::string>& items, const fs::path& fixtures,
                                                 int experiment, bool replay) {
    std::vector<std::pair<std::string, std::string>> pairs;
    auto discover = [&](const std::string& provider) {
        const auto dir = fixtures / provider;
        if (!fs::is_directory(dir)) throw dcm::FixtureMissing("no fixtures for provider '" + provider + "'");
        std::vector<std::string> models;
        for (const auto& m : fs::directory_iterator(dir))
            if (m.is_directory() && fs::exists(dcm::fixture_path(fixtures, provider, m.path().filename().string(), experiment)))
                models.push_back(m.path().filename().string());
        std::sort(models.begin(), models.end());
        for (auto& m : models) pairs.emplace_back(provider, m);
    };
    if (items.empty()) {
        if (!replay) throw dcm::Error("--providers is required in live mode");
        std::vector<std::string> providers;
        for (const auto& p : fs::directory_iterator(fixtures))
            if (p.is_directory()) providers.push_back(p.path().filename().string());
        std::sort(providers.begin(), providers.end());
        for (const auto& p : providers) discover(p);
    }
    for (const auto& item : items) {
        const auto slash = item.find('/');
        if (slash != std::string::npos)
            pairs.emplace_back(item.substr(0, slash), item.substr(slash + 1));
        else if (replay)
            discover(item);
        else
            throw dcm::Error("live mode needs provider/model, got '" + item + "'");
    }
    std::vector<dcm::ProviderConfig> out;
    for (const auto& [p, m] : pairs) out.push_back(dcm::provider_config(p, m));
    return out;
}

json spec_check_json(const dcm::UtilitySpec& spec, const dcm::Dataset& data) {
    const auto stats = dcm::analyze_structure(spec, data.dictionary());
    const auto model = dcm::bind(spec, data);
    return {{"spec", spec.name},
            {"free_parameters", model.free_names()},
            {"n_obs", data.n_obs()},
            {"stats",
             {{"n_params", stats.n_params},
              {"n_vars", stats.n_vars},
              {"has_asc", stats.has_asc},
              {"n_generic", stats.n_generic},
              {"n_altspecific", stats.n_altspecific},
              {"n_socioeconomic", stats.n_socioeconomic},
              {"n_transformations", stats.n_transformations},
              {"n_interactions", stats.n_interactions}}}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multinomial logit specification, estimation and LLM evaluation harness"};
    app.require_subcommand(1);

    // dataset
    auto* ds = app.add_subcommand("dataset", "Validate or describe a choice dataset");
    ds->require_subcommand(1);
    std::string csv, dict, out;
    auto* ds_validate = ds->add_subcommand("validate", "Check a CSV against its dictionary");
    ds_validate->add_option("csv", csv)->required();
    ds_validate->add_option("dict", dict)->required();
    auto* ds_describe = ds->add_subcommand("describe", "Markdown description of a dataset");
    ds_describe->add_option("csv", csv)->required();
    ds_describe->add_option("dict", dict)->required();
    ds_describe->add_option("--out", out);

    // spec
    auto* sp = app.add_subcommand("spec", "Utility specification tools");
    sp->require_subcommand(1);
    std::string spec_file;
    auto* sp_check = sp->add_subcommand("check", "Parse and bind a specification");
    sp_check->add_option("file", spec_file)->required();
    sp_check->add_option("--data", csv)->required();
    sp_check->add_option("--dict", dict)->required();

    // estimate
    dcm::EstimateOptions eopt;
    auto* est = app.add_subcommand("estimate", "Estimate an MNL specification");
    est->add_option("--spec", spec_file)->required();
    est->add_option("--data", csv)->required();
    est->add_option("--dict", dict)->required();
    est->add_option("--max-iters", eopt.max_iters);
    est->add_option("--grad-tol", eopt.grad_tol);
    est->add_option("--out", out);

    // metrics / validate
    std::string results_file;
    auto* met = app.add_subcommand("metrics", "Fit statistics and value of time for a results file");
    met->add_option("--results", results_file)->required();
    met->add_option("--spec", spec_file)->required();
    met->add_option("--dict", dict)->required();
    auto* val = app.add_subcommand("validate", "Apply the inclusion rules to a results file");
    val->add_option("--results", results_file)->required();
    val->add_option("--spec", spec_file)->required();
    val->add_option("--dict", dict)->required();

    // suggest
    int experiment = 1;
    std::string provider, model, replay_dir, fixtures_dir = "fixtures", out_dir;
    bool paper_faithful = false;
    auto* sug = app.add_subcommand("suggest", "Prompt an LLM (or replay a fixture) and extract specifications");
    sug->add_option("--experiment", experiment)->required()->check(CLI::Range(1, 5));
    sug->add_option("--provider", provider)->required();
    sug->add_option("--model", model)->required();
    sug->add_option("--replay", replay_dir, "Fixture directory to replay from");
    sug->add_option("--fixtures", fixtures_dir, "Where live transcripts are stored");
    sug->add_option("--data", csv);
    sug->add_option("--dict", dict);
    sug->add_flag("--paper-faithful", paper_faithful, "Send the prompt without the output-format addendum");
    sug->add_option("--out-dir", out_dir, "Write extracted specifications as .dcm files");

    // prompt
    auto* pr = app.add_subcommand("prompt", "Print the chat messages an experiment would send");
    pr->add_option("--experiment", experiment)->required()->check(CLI::Range(1, 5));
    pr->add_option("--data", csv);
    pr->add_option("--dict", dict);
    pr->add_flag("--paper-faithful", paper_faithful);

    // run
    std::vector<std::string> providers;
    std::string runs_dir = "runs";
    unsigned workers = 1;
    auto* run = app.add_subcommand("run", "Run one experiment end to end");
    run->add_option("--experiment", experiment)->required()->check(CLI::Range(1, 5));
    run->add_option("--providers", providers, "provider/model pairs or bare providers")->delimiter(',');
    run->add_option("--data", csv)->required();
    run->add_option("--dict", dict)->required();
    run->add_option("--replay", replay_dir);
    run->add_option("--fixtures", fixtures_dir);
    run->add_option("--out", runs_dir);
    run->add_option("--workers", workers);
    run->add_flag("--paper-faithful", paper_faithful);

    // report
    std::string metric = "ll";
    auto* rep = app.add_subcommand("report", "Tables and exports over stored runs");
    rep->require_subcommand(1);
    std::vector<CLI::App*> rep_cmds;
    for (const char* name : {"summary", "best-of", "profile", "export"}) {
        auto* c = rep->add_subcommand(name);
        c->add_option("--runs", runs_dir);
        c->add_option("--metric", metric)->check(CLI::IsMember({"ll", "aic", "bic", "vot"}));
        c->add_option("--out", out);
        rep_cmds.push_back(c);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ds_validate) {
            const auto data = dcm::load_dataset(csv, dict);
            std::cout << "ok: " << data.n_obs() << " observations, " << data.n_alternatives() << " alternatives\n";
        } else if (*ds_describe) {
            emit(dcm::describe(dcm::load_dataset(csv, dict)), out);
        } else if (*sp_check) {
            const auto data = dcm::load_dataset(csv, dict);
            std::cout << dump(spec_check_json(dcm::parse_spec(dcm::text::read_file(spec_file)), data));
        } else if (*est) {
            const auto data = dcm::load_dataset(csv, dict);
            const auto spec = dcm::parse_spec(dcm::text::read_file(spec_file));
            const auto r = dcm::estimate(dcm::bind(spec, data), eopt);
            emit(dump(dcm::to_json(r)), out);
            return r.converged ? 0 : 3;
        } else if (*met || *val) {
            const auto r = dcm::estimation_from_json(json::parse(dcm::text::read_file(results_file)));
            const auto spec = dcm::parse_spec(dcm::text::read_file(spec_file));
            const auto dictionary = dcm::DataDictionary::load(dict);
            if (*val) {
                std::cout << dump(dcm::to_json(dcm::check_model(r, spec, dictionary)));
            } else {
                json j = {{"fit", dcm::to_json(dcm::information_criteria(r.loglik, r.k(), r.n_obs))},
                          {"rho_squared", dcm::rho_squared(r.loglik, r.null_loglik)}};
                try {
                    j["vot"] = dcm::to_json(dcm::value_of_time(r, spec, dictionary));
                } catch (const dcm::MissingCoefficient& e) {
                    j["vot"] = nullptr;
                    j["vot_error"] = e.what();
                }
                std::cout << dump(j);
            }
        } else if (*pr) {
            std::optional<dcm::Dataset> data;
            if (!csv.empty() && !dict.empty()) data = dcm::load_dataset(csv, dict);
            dcm::PromptOptions popt;
            popt.paper_faithful = paper_faithful;
            const auto bundle = dcm::build_prompt(dcm::ExperimentConfig::preset(experiment), data ? &*data : nullptr, popt);
            json msgs = json::array();
            for (const auto& m : dcm::to_messages(bundle)) msgs.push_back({{"role", m.role}, {"content", m.content}});
            std::cout << dump(msgs);
        } else if (*sug) {
            const auto config = dcm::ExperimentConfig::preset(experiment);
            std::optional<dcm::Dataset> data;
            if (!csv.empty() && !dict.empty()) data = dcm::load_dataset(csv, dict);
            dcm::PromptOptions popt;
            popt.paper_faithful = paper_faithful;
            const auto bundle = dcm::build_prompt(config, data ? &*data : nullptr, popt);
            for (const auto& d : bundle.diagnostics) std::cerr << "note: " << d << "\n";
            const bool replay = !replay_dir.empty();
            const auto t = dcm::complete(bundle, dcm::provider_config(provider, model),
                                         replay ? dcm::Mode::replay : dcm::Mode::live,
                                         {replay ? replay_dir : fixtures_dir});
            const auto x = dcm::extract_specs(t);
            json specs = json::array(), claims = json::array();
            for (const auto& s : x.specs) {
                specs.push_back(s.name);
                if (!out_dir.empty()) {
                    fs::create_directories(out_dir);
                    dcm::text::write_file((fs::path(out_dir) / (s.name + ".dcm")).string(), dcm::serialize_spec(s));
                }
            }
            for (const auto& c : x.claimed) claims.push_back(dcm::to_json(c));
            std::cout << dump({{"transcript_sha256", t.hash()},
                               {"specs", specs},
                               {"claimed", claims},
                               {"diagnostics", x.diagnostics}});
        } else if (*run) {
            const auto data = dcm::load_dataset(csv, dict);
            dcm::RunOptions ropt;
            const bool replay = !replay_dir.empty();
            ropt.mode = replay ? dcm::Mode::replay : dcm::Mode::live;
            ropt.fixtures = replay ? replay_dir : fixtures_dir;
            ropt.prompt.paper_faithful = paper_faithful;
            ropt.workers = workers;
            const auto config = dcm::ExperimentConfig::preset(experiment);
            const auto result = dcm::run_experiment(config, parse_providers(providers, ropt.fixtures, experiment, replay),
                                                    data, ropt);
            dcm::persist(result, data, ropt, runs_dir);
            for (const auto& p : result.providers)
                for (const auto& d : p.diagnostics) std::cerr << p.llm() << ": " << d << "\n";
            std::cout << dcm::summary_table(result);
        } else {
            const auto results = dcm::load_runs(runs_dir);
            const auto m = dcm::metric_from_string(metric);
            if (*rep_cmds[0]) {
                std::string text;
                for (const auto& r : results) text += dcm::summary_table(r) + "\n";
                emit(text, out);
            } else if (*rep_cmds[1]) {
                emit(dcm::best_of(results, m).to_markdown(), out);
            } else if (*rep_cmds[2]) {
                emit(dcm::profile_table(dcm::llm_profile(results)), out);
            } else {
                emit(dcm::distribution_export(results, m), out);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
