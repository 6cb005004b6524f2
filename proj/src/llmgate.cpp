#include "dcm/llmgate.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dcm/text.hpp"

namespace dcm {

namespace assets {
struct Blob {
    const unsigned char* data;
    std::size_t size;
};
extern const Blob prompt_blobs[5];
}  // namespace assets

ExperimentConfig ExperimentConfig::preset(int id) {
    using I = Information;
    using S = Strategy;
    using G = Goal;
    switch (id) {
        case 1: return {1, I::full, S::zero_shot, G::suggest_and_estimate};
        case 2: return {2, I::full, S::chain_of_thought, G::suggest_and_estimate};
        case 3: return {3, I::full, S::zero_shot, G::suggest};
        case 4: return {4, I::full, S::chain_of_thought, G::suggest};
        case 5: return {5, I::limited, S::zero_shot, G::suggest};
    }
    throw Error("experiment id must be 1..5, got " + std::to_string(id));
}

std::string ExperimentConfig::label() const {
    return std::string(information == Information::full ? "Full" : "Limited") + "/" +
           (strategy == Strategy::zero_shot ? "ZS" : "CoT") + "/" + (goal == Goal::suggest ? "Suggest" : "Estimate");
}

nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"id", c.id},
            {"information", c.information == Information::full ? "full" : "limited"},
            {"strategy", c.strategy == Strategy::zero_shot ? "zero_shot" : "chain_of_thought"},
            {"goal", c.goal == Goal::suggest ? "suggest" : "suggest_and_estimate"}};
}

const std::string& prompt_template(int id) {
    static const std::vector<std::string> texts = [] {
        std::vector<std::string> t;
        for (const auto& b : assets::prompt_blobs) t.emplace_back(reinterpret_cast<const char*>(b.data), b.size);
        return t;
    }();
    if (id < 1 || id > 5) throw Error("experiment id must be 1..5, got " + std::to_string(id));
    return texts[id - 1];
}

const std::string& format_addendum() {
    static const std::string text =
        "Output format: besides your answer, write every specification you propose as its own fenced code block "
        "tagged dcm-spec, in this grammar:\n"
        "\n"
        "```dcm-spec\n"
        "spec S1\n"
        "alt car bus air rail\n"
        "param asc_car fixed 0\n"
        "param asc_bus\n"
        "param b_time\n"
        "U(car) = asc_car + b_time * time_car\n"
        "U(bus) = asc_bus + b_time * time_bus\n"
        "```\n"
        "\n"
        "Use the variable names of the data description. Declare every parameter with `param <name>`; add `fixed "
        "<value>` to normalise it. Expressions may use + - * /, log, exp, sqrt, pow(x, k), boxcox(x, lambda_name) and "
        "piecewise(x, [knots], [slope names]).\n"
        "If you estimated models, add one fenced block tagged dcm-claims with a CSV line name,loglik,aic,bic per "
        "specification.\n";
    return text;
}

std::size_t estimate_tokens(const std::string& text) { return (text.size() + 3) / 4; }

PromptBundle build_prompt(const ExperimentConfig& config, const Dataset* dataset, const PromptOptions& options) {
    if (config.information == Information::full && !dataset)
        throw MissingDataset("experiment " + std::to_string(config.id) + " needs the dataset");
    PromptBundle b;
    b.experiment = config.id;
    b.prompt_text = prompt_template(config.id);
    if (!options.paper_faithful) b.addendum = format_addendum();
    if (dataset)
        b.attachments.push_back({Attachment::Kind::data_description, options.description_name, describe(*dataset)});
    else
        b.diagnostics.push_back("no dataset given; data description omitted");

    if (config.information == Information::limited) {
        if (options.attach_csv && dataset)
            b.diagnostics.push_back("CSV attachment refused: experiment " + std::to_string(config.id) +
                                    " gives the data description only");
        return b;
    }
    if (options.attach_csv) {
        auto csv = to_csv(*dataset);
        const auto tokens = estimate_tokens(csv);
        if (tokens > options.csv_token_budget)
            throw CsvTooLarge("CSV is about " + std::to_string(tokens) + " tokens, budget " +
                              std::to_string(options.csv_token_budget));
        b.attachments.push_back({Attachment::Kind::data_csv, options.csv_name, std::move(csv)});
    }
    return b;
}

std::vector<Message> to_messages(const PromptBundle& bundle) {
    std::vector<Message> m;
    if (bundle.system_note) m.push_back({"system", *bundle.system_note});
    std::string user = bundle.prompt_text;
    if (!bundle.addendum.empty()) user += "\n" + bundle.addendum;
    for (const auto& a : bundle.attachments) user += "\n--- attachment: " + a.name + " ---\n" + a.content;
    m.push_back({"user", std::move(user)});
    return m;
}

std::string env_prefix(const std::string& provider) {
    std::string p;
    for (char c : provider) p += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_';
    return p;
}

ProviderConfig provider_config(const std::string& provider, const std::string& model) {
    ProviderConfig c;
    c.provider = provider;
    c.model = model;
    c.wire = provider == "anthropic" ? Wire::anthropic : Wire::openai;
    return c;
}

// ---- transcripts ----

std::string LLMTranscript::hash() const { return text::sha256_hex(raw); }

nlohmann::json to_json(const LLMTranscript& t) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : t.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return {{"provider", t.provider},
            {"model", t.model},
            {"experiment", t.experiment},
            {"request",
             {{"params",
               {{"temperature", t.request_params.temperature},
                {"top_p", t.request_params.top_p},
                {"max_tokens", t.request_params.max_tokens}}},
              {"messages", std::move(msgs)}}},
            {"response",
             {{"text", t.response_text},
              {"token_counts", {{"prompt", t.token_counts.prompt}, {"completion", t.token_counts.completion}}}}},
            {"timestamp", t.timestamp}};
}

LLMTranscript transcript_from_json(const nlohmann::json& j) {
    LLMTranscript t;
    t.provider = j.at("provider").get<std::string>();
    t.model = j.at("model").get<std::string>();
    t.experiment = j.at("experiment").get<int>();
    const auto& p = j.at("request").at("params");
    t.request_params = {p.at("temperature").get<double>(), p.at("top_p").get<double>(), p.at("max_tokens").get<int>()};
    for (const auto& m : j.at("request").at("messages"))
        t.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    const auto& r = j.at("response");
    t.response_text = r.at("text").get<std::string>();
    if (r.contains("token_counts"))
        t.token_counts = {r["token_counts"].value("prompt", 0L), r["token_counts"].value("completion", 0L)};
    t.timestamp = j.value("timestamp", "");
    return t;
}

std::string serialize_transcript(const LLMTranscript& t) { return to_json(t).dump(2) + "\n"; }

std::filesystem::path fixture_path(const std::filesystem::path& root, const std::string& provider,
                                   const std::string& model, int experiment) {
    return root / provider / model / ("exp" + std::to_string(experiment) + ".json");
}

namespace {

std::mutex& provider_lock(const std::string& provider) {
    static std::mutex guard;
    static std::map<std::string, std::mutex> locks;
    std::lock_guard g(guard);
    return locks[provider];
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string getenv_str(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    return v ? v : "";
}

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint endpoint(const ProviderConfig& p) {
    std::string base = p.base_url;
    if (base.empty()) base = getenv_str(env_prefix(p.provider) + "_BASE_URL");
    if (base.empty() && p.provider == "openai") base = "https://api.openai.com/v1";
    if (base.empty() && p.provider == "anthropic") base = "https://api.anthropic.com/v1";
    if (base.empty()) throw TransportError("no base URL for provider '" + p.provider + "'; set " + env_prefix(p.provider) + "_BASE_URL");
    while (!base.empty() && base.back() == '/') base.pop_back();
    const auto scheme_end = base.find("://");
    const auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    Endpoint e;
    e.origin = base.substr(0, path_start);
    const std::string prefix = path_start == std::string::npos ? "" : base.substr(path_start);
    e.path = prefix + (p.wire == Wire::anthropic ? "/messages" : "/chat/completions");
    return e;
}

nlohmann::json request_body(const ProviderConfig& p, const std::vector<Message>& messages) {
    nlohmann::json msgs = nlohmann::json::array();
    std::string system;
    for (const auto& m : messages) {
        if (p.wire == Wire::anthropic && m.role == "system") {
            system += m.content;
            continue;
        }
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    nlohmann::json body = {{"model", p.model}, {"messages", std::move(msgs)}, {"temperature", p.temperature},
                           {"top_p", p.top_p}};
    if (p.wire == Wire::anthropic) {
        body["max_tokens"] = p.max_tokens;
        if (!system.empty()) body["system"] = system;
    } else {
        body["max_completion_tokens"] = p.max_tokens;
    }
    return body;
}

void parse_response(const ProviderConfig& p, const std::string& body, LLMTranscript& t) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
        if (p.wire == Wire::anthropic) {
            for (const auto& c : j.at("content"))
                if (c.value("type", "") == "text") t.response_text += c.at("text").get<std::string>();
            if (j.contains("usage"))
                t.token_counts = {j["usage"].value("input_tokens", 0L), j["usage"].value("output_tokens", 0L)};
        } else {
            const auto& content = j.at("choices").at(0).at("message").at("content");
            t.response_text = content.is_null() ? "" : content.get<std::string>();
            if (j.contains("usage"))
                t.token_counts = {j["usage"].value("prompt_tokens", 0L), j["usage"].value("completion_tokens", 0L)};
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed provider response: ") + e.what());
    }
}

void write_new(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::create_directories(path.parent_path());
    if (std::filesystem::exists(path)) throw FixtureExists("refusing to overwrite " + path.string());
    text::write_file(path.string(), bytes);
}

LLMTranscript live(const PromptBundle& bundle, const ProviderConfig& p, const CompletionStore& store) {
    const std::string key = getenv_str(env_prefix(p.provider) + "_API_KEY");
    if (key.empty()) throw AuthError("missing " + env_prefix(p.provider) + "_API_KEY");
    const auto path = fixture_path(store.fixtures, p.provider, p.model, bundle.experiment);
    if (std::filesystem::exists(path)) throw FixtureExists("refusing to overwrite " + path.string());

    const Endpoint ep = endpoint(p);
    LLMTranscript t;
    t.provider = p.provider;
    t.model = p.model;
    t.experiment = bundle.experiment;
    t.request_params = {p.temperature, p.top_p, p.max_tokens};
    t.messages = to_messages(bundle);
    const std::string body = request_body(p, t.messages).dump();

    httplib::Headers headers;
    if (p.wire == Wire::anthropic) {
        headers.emplace("x-api-key", key);
        headers.emplace("anthropic-version", "2023-06-01");
    } else {
        headers.emplace("Authorization", "Bearer " + key);
    }

    std::lock_guard lock(provider_lock(p.provider));
    httplib::Client cli(ep.origin);
    cli.set_connection_timeout(std::chrono::seconds(30));
    cli.set_read_timeout(p.timeout);
    for (int attempt = 1;; ++attempt) {
        auto res = cli.Post(ep.path, headers, body, "application/json");
        if (!res) throw TransportError("request to " + ep.origin + ep.path + " failed: " + httplib::to_string(res.error()));
        if (res->status == 429) {
            if (attempt >= p.max_attempts)
                throw RateLimited("rate limited after " + std::to_string(attempt) + " attempts");
            std::this_thread::sleep_for(p.backoff_base * (1 << (attempt - 1)));
            continue;
        }
        if (res->status == 401 || res->status == 403) throw AuthError("provider rejected credentials (HTTP " + std::to_string(res->status) + ")");
        if (res->status < 200 || res->status >= 300)
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
        parse_response(p, res->body, t);
        break;
    }
    t.timestamp = utc_now();
    t.raw = serialize_transcript(t);
    write_new(path, t.raw);
    const auto addressed = path.parent_path() / "sha256" / (t.hash() + ".json");
    if (!std::filesystem::exists(addressed)) write_new(addressed, t.raw);
    return t;
}

}  // namespace

LLMTranscript complete(const PromptBundle& bundle, const ProviderConfig& provider, Mode mode,
                       const CompletionStore& store) {
    if (mode == Mode::live) return live(bundle, provider, store);
    const auto path = fixture_path(store.fixtures, provider.provider, provider.model, bundle.experiment);
    if (!std::filesystem::exists(path)) throw FixtureMissing("no fixture at " + path.string());
    const std::string raw = text::read_file(path.string());
    LLMTranscript t;
    try {
        t = transcript_from_json(nlohmann::json::parse(raw));
    } catch (const nlohmann::json::exception& e) {
        throw FixtureMissing("unreadable fixture " + path.string() + ": " + e.what());
    }
    t.raw = raw;
    return t;
}

// ---- extraction ----

namespace {

struct Block {
    std::string tag;
    std::string body;
    int line;
};

std::vector<Block> fenced_blocks(const std::string& text, std::vector<std::string>& diagnostics) {
    std::vector<Block> out;
    const auto lines = text::split(text, '\n');
    bool in = false;
    Block cur;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto s = text::trim(lines[i]);
        if (!in) {
            if (s.substr(0, 3) != "```") continue;
            in = true;
            cur = {std::string(text::trim(s.substr(3))), "", static_cast<int>(i + 1)};
        } else if (s == "```") {
            in = false;
            out.push_back(std::move(cur));
        } else {
            cur.body += lines[i];
            cur.body += '\n';
        }
    }
    if (in) {
        diagnostics.push_back("unterminated code block opened on line " + std::to_string(cur.line));
        out.push_back(std::move(cur));
    }
    return out;
}

std::optional<double> number_field(const std::string& s) {
    const auto t = text::trim(s);
    if (t.empty()) return std::nullopt;
    return text::parse_double(t);
}

void parse_claims(const Block& b, std::vector<Claim>& out, std::vector<std::string>& diagnostics) {
    const auto lines = text::split(b.body, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        const auto f = text::split(line, ',');
        std::string name(text::trim(f[0]));
        std::string lower = name;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        if (lower == "name" || lower == "spec") continue;
        const auto where = "dcm-claims line " + std::to_string(b.line + 1 + static_cast<int>(i));
        if (f.size() < 2 || name.empty()) {
            diagnostics.push_back(where + ": expected name,loglik,aic,bic");
            continue;
        }
        const auto ll = number_field(f[1]);
        if (!ll) {
            diagnostics.push_back(where + ": log-likelihood is not a number");
            continue;
        }
        Claim c{name, *ll, f.size() > 2 ? number_field(f[2]) : std::nullopt,
                f.size() > 3 ? number_field(f[3]) : std::nullopt};
        out.push_back(std::move(c));
    }
}

}  // namespace

SpecExtraction extract_specs(const LLMTranscript& transcript) {
    SpecExtraction x;
    const auto blocks = fenced_blocks(transcript.response_text, x.diagnostics);
    std::vector<Claim> claims;
    int spec_blocks = 0;
    for (const auto& b : blocks) {
        if (b.tag == "dcm-spec") {
            ++spec_blocks;
            try {
                auto s = parse_spec(b.body);
                if (s.name.empty()) s.name = "S" + std::to_string(spec_blocks);
                if (s.metadata.empty())
                    s.metadata = transcript.provider + "/" + transcript.model + " exp" + std::to_string(transcript.experiment);
                const bool dup = std::any_of(x.specs.begin(), x.specs.end(), [&](const auto& o) { return o.name == s.name; });
                if (dup) {
                    x.diagnostics.push_back("dcm-spec block at line " + std::to_string(b.line) + ": duplicate name '" +
                                            s.name + "' ignored");
                    continue;
                }
                x.specs.push_back(std::move(s));
            } catch (const std::exception& e) {
                x.diagnostics.push_back("dcm-spec block at line " + std::to_string(b.line) + ": " + e.what());
            }
        } else if (b.tag == "dcm-claims") {
            parse_claims(b, claims, x.diagnostics);
        }
    }
    if (spec_blocks == 0) x.diagnostics.push_back("no machine-readable specification found");
    for (auto& c : claims) {
        const bool known = std::any_of(x.specs.begin(), x.specs.end(), [&](const auto& s) { return s.name == c.spec_name; });
        if (known) {
            x.claimed.push_back(std::move(c));
        } else {
            x.diagnostics.push_back("orphaned claim '" + c.spec_name + "' (loglik " + text::shortest(c.loglik) +
                                    "): no matching specification");
            x.orphaned.push_back(std::move(c));
        }
    }
    if (x.specs.empty() && !x.orphaned.empty())
        x.diagnostics.push_back("estimate-only transcript: claimed results cannot be re-estimated");
    return x;
}

nlohmann::json to_json(const Claim& c) {
    nlohmann::json j = {{"spec_name", c.spec_name}, {"loglik", c.loglik}};
    j["aic"] = c.aic ? nlohmann::json(*c.aic) : nlohmann::json(nullptr);
    j["bic"] = c.bic ? nlohmann::json(*c.bic) : nlohmann::json(nullptr);
    return j;
}

Claim claim_from_json(const nlohmann::json& j) {
    Claim c;
    c.spec_name = j.at("spec_name").get<std::string>();
    c.loglik = j.at("loglik").get<double>();
    if (!j.at("aic").is_null()) c.aic = j["aic"].get<double>();
    if (!j.at("bic").is_null()) c.bic = j["bic"].get<double>();
    return c;
}

}  // namespace dcm
