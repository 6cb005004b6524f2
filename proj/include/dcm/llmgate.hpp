#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcm/dataset.hpp"
#include "dcm/error.hpp"
#include "dcm/spec.hpp"

namespace dcm {

class MissingDataset : public Error {
public:
    using Error::Error;
};
class CsvTooLarge : public Error {
public:
    using Error::Error;
};
class AuthError : public Error {
public:
    using Error::Error;
};
class RateLimited : public Error {
public:
    using Error::Error;
};
class TransportError : public Error {
public:
    using Error::Error;
};
class FixtureMissing : public Error {
public:
    using Error::Error;
};
class FixtureExists : public Error {
public:
    using Error::Error;
};

enum class Information { full, limited };
enum class Strategy { zero_shot, chain_of_thought };
enum class Goal { suggest, suggest_and_estimate };

struct ExperimentConfig {
    int id = 1;
    Information information = Information::full;
    Strategy strategy = Strategy::zero_shot;
    Goal goal = Goal::suggest_and_estimate;

    /// The five experiment presets, id 1..5.
    static ExperimentConfig preset(int id);
    std::string label() const;  // e.g. "Full/ZS/Estimate"
    bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json to_json(const ExperimentConfig& c);

/// Verbatim prompt template for experiment id 1..5.
const std::string& prompt_template(int id);

/// Instruction appended in machine mode asking for fenced dcm-spec / dcm-claims blocks.
const std::string& format_addendum();

struct Attachment {
    enum class Kind { data_csv, data_description };
    Kind kind;
    std::string name;
    std::string content;
    bool operator==(const Attachment&) const = default;
};

struct PromptBundle {
    int experiment = 1;
    std::optional<std::string> system_note;
    std::string prompt_text;  // the template, byte for byte
    std::string addendum;     // empty when paper-faithful
    std::vector<Attachment> attachments;
    std::vector<std::string> diagnostics;
};

struct PromptOptions {
    bool paper_faithful = false;
    bool attach_csv = true;
    /// CSV attachments above this estimated token count raise CsvTooLarge.
    std::size_t csv_token_budget = 100000;
    std::string csv_name = "data.csv";
    std::string description_name = "data_description.md";
};

/// Rough token estimate used for the CSV budget (4 bytes per token).
std::size_t estimate_tokens(const std::string& text);

PromptBundle build_prompt(const ExperimentConfig& config, const Dataset* dataset, const PromptOptions& options = {});

struct Message {
    std::string role;
    std::string content;
    bool operator==(const Message&) const = default;
};

/// Chat messages for a bundle: optional system note, then one user message
/// holding the template, the addendum and the attachments.
std::vector<Message> to_messages(const PromptBundle& bundle);

enum class Wire { openai, anthropic };

struct ProviderConfig {
    std::string provider;  // e.g. "openai"; also the env var prefix
    std::string model;
    Wire wire = Wire::openai;
    std::string base_url;  // overrides <PROVIDER>_BASE_URL and the default
    double temperature = 1.2;
    double top_p = 0.95;
    int max_tokens = 8192;
    int max_attempts = 5;
    std::chrono::milliseconds backoff_base{1000};
    std::chrono::seconds timeout{600};
};

/// Provider defaults: wire format from the provider name ("anthropic" uses
/// the Anthropic messages API, everything else chat completions).
ProviderConfig provider_config(const std::string& provider, const std::string& model);

/// Env var prefix for a provider: upper case, non-alphanumerics as '_'.
std::string env_prefix(const std::string& provider);

struct RequestParams {
    double temperature = 0;
    double top_p = 0;
    int max_tokens = 0;
    bool operator==(const RequestParams&) const = default;
};

struct TokenCounts {
    long prompt = 0;
    long completion = 0;
    bool operator==(const TokenCounts&) const = default;
};

struct LLMTranscript {
    std::string provider;
    std::string model;
    int experiment = 0;
    RequestParams request_params;
    std::vector<Message> messages;
    std::string response_text;
    std::string timestamp;
    TokenCounts token_counts;
    std::string raw;  // exact stored bytes

    std::string hash() const;  // SHA-256 of raw
};

nlohmann::json to_json(const LLMTranscript& t);
LLMTranscript transcript_from_json(const nlohmann::json& j);
/// Canonical stored form: two-space indented JSON plus a trailing newline.
std::string serialize_transcript(const LLMTranscript& t);

enum class Mode { live, replay };

struct CompletionStore {
    std::filesystem::path fixtures;  // root of <provider>/<model>/exp<id>.json
};

std::filesystem::path fixture_path(const std::filesystem::path& root, const std::string& provider,
                                   const std::string& model, int experiment);

/// Replay reads the stored fixture and returns it unchanged. Live sends one
/// request (retrying only on HTTP 429) and persists the transcript before
/// returning; an existing fixture is never overwritten.
LLMTranscript complete(const PromptBundle& bundle, const ProviderConfig& provider, Mode mode,
                       const CompletionStore& store);

struct Claim {
    std::string spec_name;
    double loglik = 0;
    std::optional<double> aic;
    std::optional<double> bic;
    bool operator==(const Claim&) const = default;
};

struct SpecExtraction {
    std::vector<UtilitySpec> specs;
    std::vector<Claim> claimed;
    std::vector<Claim> orphaned;  // claims naming no extracted spec
    std::vector<std::string> diagnostics;
};

/// Never throws; every failure becomes a diagnostic.
SpecExtraction extract_specs(const LLMTranscript& transcript);

nlohmann::json to_json(const Claim& c);
Claim claim_from_json(const nlohmann::json& j);

}  // namespace dcm
