#include "dcm/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <regex>
#include <thread>

#include "dcm/text.hpp"

namespace dcm {

const char* to_string(Verdict v) { return v == Verdict::reproduced ? "reproduced" : "not_reproduced"; }

ReproductionVerdict crosscheck(double claimed_ll, double reestimated_ll, const ReproductionTolerance& tol) {
    ReproductionVerdict v{claimed_ll, reestimated_ll, claimed_ll - reestimated_ll, Verdict::not_reproduced};
    if (std::abs(v.delta) <= std::max(tol.absolute, tol.relative * std::abs(reestimated_ll)))
        v.verdict = Verdict::reproduced;
    return v;
}

ReproductionVerdict crosscheck(const Claim& claimed, const EstimationResult& estimation,
                               const ReproductionTolerance& tol) {
    return crosscheck(claimed.loglik, estimation.loglik, tol);
}

SpecRecord evaluate_spec(const std::string& provider, const std::string& model, const UtilitySpec& spec,
                         const Dataset& data, const std::optional<Claim>& claim, const RunOptions& options) {
    SpecRecord r;
    r.provider = provider;
    r.model = model;
    r.spec_name = spec.name;
    r.spec = serialize_spec(spec);
    r.claimed = claim;
    const auto& dict = data.dictionary();
    try {
        r.stats = analyze_structure(spec, dict);
    } catch (const std::exception& e) {
        r.diagnostics.push_back(std::string("structure: ") + e.what());
    }
    try {
        const BoundModel m = bind(spec, data);
        r.estimation = estimate(m, options.estimate);
    } catch (const std::exception& e) {
        r.diagnostics.push_back(std::string("estimation failed: ") + e.what());
    }
    if (!r.estimation) {
        r.validation.converged = false;
        r.validation.exclusion = Exclusion::excluded_nonconvergence;
        r.validation.notes.push_back("not estimated");
        if (claim) r.reproduction = crosscheck(claim->loglik, std::nan(""), options.tolerance);
        return r;
    }
    const auto& est = *r.estimation;
    if (std::isfinite(est.loglik)) {
        r.fit = information_criteria(est.loglik, est.k(), est.n_obs);
        try {
            r.vot = value_of_time(est, spec, dict);
        } catch (const std::exception& e) {
            r.diagnostics.push_back(std::string("no value of time: ") + e.what());
        }
    }
    r.validation = check_model(est, spec, dict);
    if (claim) r.reproduction = crosscheck(*claim, est, options.tolerance);
    return r;
}

namespace {

template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) f(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const std::vector<ProviderConfig>& providers,
                                const Dataset& data, const RunOptions& options) {
    if (providers.empty()) throw Error("no providers given");
    ExperimentResult result;
    result.config = config;

    struct Job {
        std::string provider, model;
        UtilitySpec spec;
        std::optional<Claim> claim;
    };
    std::vector<Job> jobs;
    std::string first_error;
    int transcripts = 0;

    const PromptBundle bundle = build_prompt(config, &data, options.prompt);
    for (const auto& p : providers) {
        ProviderRun run{p.provider, p.model, {}, bundle.diagnostics, {}};
        try {
            const auto t = complete(bundle, p, options.mode, {options.fixtures});
            ++transcripts;
            run.transcript_sha256 = t.hash();
            auto x = extract_specs(t);
            run.diagnostics.insert(run.diagnostics.end(), x.diagnostics.begin(), x.diagnostics.end());
            run.orphaned_claims = x.orphaned;
            for (auto& s : x.specs) {
                std::optional<Claim> c;
                for (const auto& cl : x.claimed)
                    if (cl.spec_name == s.name) c = cl;
                jobs.push_back({p.provider, p.model, std::move(s), c});
            }
        } catch (const std::exception& e) {
            run.diagnostics.push_back(e.what());
            if (first_error.empty()) first_error = e.what();
        }
        result.providers.push_back(std::move(run));
    }
    if (transcripts == 0) throw Error("no transcripts obtained: " + first_error);

    result.records.resize(jobs.size());
    parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
        const auto& j = jobs[i];
        result.records[i] = evaluate_spec(j.provider, j.model, j.spec, data, j.claim, options);
    });

    const auto key = [](const auto& x) { return std::tie(x.provider, x.model); };
    std::stable_sort(result.providers.begin(), result.providers.end(),
                     [&](const auto& a, const auto& b) { return key(a) < key(b); });
    std::stable_sort(result.records.begin(), result.records.end(), [](const SpecRecord& a, const SpecRecord& b) {
        return std::tie(a.provider, a.model, a.spec_name) < std::tie(b.provider, b.model, b.spec_name);
    });
    return result;
}

// ---- persistence ----

namespace {

nlohmann::json to_json(const SpecStats& s) {
    return {{"n_params", s.n_params},
            {"n_vars", s.n_vars},
            {"has_asc", s.has_asc},
            {"n_generic", s.n_generic},
            {"n_altspecific", s.n_altspecific},
            {"n_socioeconomic", s.n_socioeconomic},
            {"n_transformations", s.n_transformations},
            {"n_interactions", s.n_interactions}};
}

SpecStats stats_from_json(const nlohmann::json& j) {
    SpecStats s;
    s.n_params = j.at("n_params");
    s.n_vars = j.at("n_vars");
    s.has_asc = j.at("has_asc");
    s.n_generic = j.at("n_generic");
    s.n_altspecific = j.at("n_altspecific");
    s.n_socioeconomic = j.at("n_socioeconomic");
    s.n_transformations = j.at("n_transformations");
    s.n_interactions = j.at("n_interactions");
    return s;
}

nlohmann::json to_json(const ReproductionVerdict& v) {
    const auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    return {{"claimed_ll", num(v.claimed_ll)},
            {"reestimated_ll", num(v.reestimated_ll)},
            {"delta", num(v.delta)},
            {"verdict", to_string(v.verdict)}};
}

ReproductionVerdict verdict_from_json(const nlohmann::json& j) {
    const auto num = [](const nlohmann::json& x) { return x.is_null() ? std::nan("") : x.get<double>(); };
    return {num(j.at("claimed_ll")), num(j.at("reestimated_ll")), num(j.at("delta")),
            j.at("verdict") == "reproduced" ? Verdict::reproduced : Verdict::not_reproduced};
}

template <class T, class F>
nlohmann::json opt(const std::optional<T>& v, F&& f) {
    return v ? f(*v) : nlohmann::json(nullptr);
}

std::string safe(std::string s) {
    for (auto& c : s)
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    return s;
}

ExperimentConfig config_from_json(const nlohmann::json& j) { return ExperimentConfig::preset(j.at("id").get<int>()); }

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

nlohmann::json to_json(const SpecRecord& r) {
    return {{"provider", r.provider},
            {"model", r.model},
            {"spec_name", r.spec_name},
            {"spec", r.spec},
            {"stats", opt(r.stats, [](const auto& s) { return to_json(s); })},
            {"estimation", opt(r.estimation, [](const auto& e) { return dcm::to_json(e); })},
            {"fit", opt(r.fit, [](const auto& f) { return dcm::to_json(f); })},
            {"vot", opt(r.vot, [](const auto& v) { return dcm::to_json(v); })},
            {"validation", dcm::to_json(r.validation)},
            {"claimed", opt(r.claimed, [](const auto& c) { return dcm::to_json(c); })},
            {"reproduction", opt(r.reproduction, [](const auto& v) { return to_json(v); })},
            {"diagnostics", r.diagnostics}};
}

SpecRecord record_from_json(const nlohmann::json& j) {
    SpecRecord r;
    r.provider = j.at("provider");
    r.model = j.at("model");
    r.spec_name = j.at("spec_name");
    r.spec = j.at("spec");
    if (!j.at("stats").is_null()) r.stats = stats_from_json(j["stats"]);
    if (!j.at("estimation").is_null()) r.estimation = estimation_from_json(j["estimation"]);
    if (!j.at("fit").is_null()) {
        const auto& f = j["fit"];
        r.fit = FitStats{f.at("loglik"), f.at("k"), f.at("n"), f.at("aic"), f.at("bic")};
    }
    if (!j.at("vot").is_null()) r.vot = vot_from_json(j["vot"]);
    r.validation = validation_from_json(j.at("validation"));
    if (!j.at("claimed").is_null()) r.claimed = claim_from_json(j["claimed"]);
    if (!j.at("reproduction").is_null()) r.reproduction = verdict_from_json(j["reproduction"]);
    r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    return r;
}

std::string result_file_name(const std::string& provider, const std::string& model) {
    return safe(provider) + "." + safe(model) + ".json";
}

void persist(const ExperimentResult& result, const Dataset& data, const RunOptions& options,
             const std::filesystem::path& out_root) {
    const auto dir = out_root / ("exp" + std::to_string(result.config.id));
    std::filesystem::create_directories(dir);
    nlohmann::json files = nlohmann::json::object();
    nlohmann::json transcripts = nlohmann::json::object();
    for (const auto& p : result.providers) {
        nlohmann::json records = nlohmann::json::array();
        for (const auto& r : result.records)
            if (r.provider == p.provider && r.model == p.model) records.push_back(to_json(r));
        nlohmann::json orphaned = nlohmann::json::array();
        for (const auto& c : p.orphaned_claims) orphaned.push_back(to_json(c));
        const nlohmann::json doc = {{"schema", "dcm.experiment/1"},
                                    {"config", to_json(result.config)},
                                    {"provider", p.provider},
                                    {"model", p.model},
                                    {"transcript_sha256", p.transcript_sha256},
                                    {"diagnostics", p.diagnostics},
                                    {"orphaned_claims", std::move(orphaned)},
                                    {"records", std::move(records)}};
        const auto name = result_file_name(p.provider, p.model);
        const auto bytes = dump(doc);
        text::write_file((dir / name).string(), bytes);
        files[name] = text::sha256_hex(bytes);
        transcripts[p.llm()] = p.transcript_sha256;
    }
    const nlohmann::json manifest = {
        {"schema", "dcm.manifest/1"},
        {"experiment", to_json(result.config)},
        {"mode", options.mode == Mode::live ? "live" : "replay"},
        {"inputs",
         {{"data_sha256", text::sha256_hex(to_csv(data))},
          {"dictionary_sha256", text::sha256_hex(data.dictionary().to_markdown())},
          {"prompt_sha256", text::sha256_hex(prompt_template(result.config.id))},
          {"paper_faithful", options.prompt.paper_faithful},
          {"transcripts", std::move(transcripts)}}},
        {"options",
         {{"max_iters", options.estimate.max_iters},
          {"grad_tol", options.estimate.grad_tol},
          {"reproduction_abs_tol", options.tolerance.absolute},
          {"reproduction_rel_tol", options.tolerance.relative}}},
        {"files", std::move(files)}};
    text::write_file((dir / "manifest.json").string(), dump(manifest));
}

ExperimentResult load_experiment(const std::filesystem::path& exp_dir) {
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(exp_dir))
        if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "manifest.json")
            paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    ExperimentResult result;
    bool have_config = false;
    for (const auto& path : paths) {
        const auto j = nlohmann::json::parse(text::read_file(path.string()));
        if (j.value("schema", "") != "dcm.experiment/1") continue;
        result.config = config_from_json(j.at("config"));
        have_config = true;
        ProviderRun p{j.at("provider"), j.at("model"), j.at("transcript_sha256"),
                      j.at("diagnostics").get<std::vector<std::string>>(), {}};
        for (const auto& c : j.at("orphaned_claims")) p.orphaned_claims.push_back(claim_from_json(c));
        result.providers.push_back(std::move(p));
        for (const auto& r : j.at("records")) result.records.push_back(record_from_json(r));
    }
    if (!have_config) {
        // Fall back to the directory name for an empty experiment.
        static const std::regex re("exp([1-5])");
        std::smatch m;
        const auto name = exp_dir.filename().string();
        if (!std::regex_match(name, m, re)) throw Error("not an experiment directory: " + exp_dir.string());
        result.config = ExperimentConfig::preset(std::stoi(m[1]));
    }
    std::stable_sort(result.records.begin(), result.records.end(), [](const SpecRecord& a, const SpecRecord& b) {
        return std::tie(a.provider, a.model, a.spec_name) < std::tie(b.provider, b.model, b.spec_name);
    });
    return result;
}

std::vector<ExperimentResult> load_runs(const std::filesystem::path& runs_root) {
    static const std::regex re("exp([1-5])");
    std::vector<std::pair<int, std::filesystem::path>> dirs;
    for (const auto& e : std::filesystem::directory_iterator(runs_root)) {
        std::smatch m;
        const auto name = e.path().filename().string();
        if (e.is_directory() && std::regex_match(name, m, re)) dirs.emplace_back(std::stoi(m[1]), e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<ExperimentResult> out;
    for (const auto& [id, dir] : dirs) out.push_back(load_experiment(dir));
    return out;
}

}  // namespace dcm
