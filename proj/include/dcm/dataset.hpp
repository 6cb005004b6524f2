#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dcm {

enum class VarKind { attribute, availability, covariate, choice, id };

/// What an attribute measures. Drives value-of-time and sign checks.
enum class Quantity { time, cost, other };

const char* to_string(VarKind k);
const char* to_string(Quantity q);

struct DictionaryEntry {
    std::string name;
    VarKind kind = VarKind::attribute;
    std::string alternative;  // empty when not alternative-bound
    Quantity quantity = Quantity::other;
    std::string units;
    std::string description;

    bool operator==(const DictionaryEntry&) const = default;
};

/// Markdown data dictionary: one table, columns
/// name | kind | alternative | quantity | units | description.
/// The quantity column may be omitted (every entry is then `other`).
class DataDictionary {
public:
    DataDictionary() = default;
    explicit DataDictionary(std::vector<DictionaryEntry> entries);

    static DataDictionary parse_markdown(const std::string& text);
    static DataDictionary load(const std::filesystem::path& path);
    std::string to_markdown() const;

    const std::vector<DictionaryEntry>& entries() const { return entries_; }
    const DictionaryEntry* find(const std::string& name) const;
    const DictionaryEntry& choice_entry() const;
    const DictionaryEntry* id_entry() const;

    /// Alternatives in the order their availability entries appear.
    std::vector<std::string> alternatives() const;

    bool operator==(const DataDictionary&) const = default;

private:
    std::vector<DictionaryEntry> entries_;
};

class Dataset;

/// Read-only view of one choice situation.
class Observation {
public:
    Observation(const Dataset& data, std::size_t row) : data_(&data), row_(row) {}

    const std::string& person_id() const;
    double value(const std::string& variable) const;
    bool available(std::size_t alt) const;
    bool available(const std::string& alternative) const;
    std::size_t choice() const;
    const std::string& choice_name() const;

private:
    const Dataset* data_;
    std::size_t row_;
};

/// Immutable choice dataset in wide layout: one row per choice situation,
/// numeric columns for attributes and covariates, 0/1 availability per alternative.
class Dataset {
public:
    Dataset(DataDictionary dictionary, std::vector<std::string> person_ids,
            std::vector<double> values, std::vector<unsigned char> available,
            std::vector<std::size_t> choices);

    const DataDictionary& dictionary() const { return dictionary_; }
    const std::vector<std::string>& alternatives() const { return alternatives_; }
    /// Numeric variables (attributes and covariates) in dictionary order.
    const std::vector<std::string>& variables() const { return variables_; }

    std::size_t n_obs() const { return choices_.size(); }
    std::size_t n_alternatives() const { return alternatives_.size(); }
    std::size_t n_variables() const { return variables_.size(); }

    std::optional<std::size_t> variable_index(const std::string& name) const;
    std::optional<std::size_t> alternative_index(const std::string& name) const;

    double value(std::size_t row, std::size_t var) const { return values_[row * variables_.size() + var]; }
    std::span<const double> row_values(std::size_t row) const {
        return {values_.data() + row * variables_.size(), variables_.size()};
    }
    bool available(std::size_t row, std::size_t alt) const { return available_[row * alternatives_.size() + alt] != 0; }
    std::size_t choice(std::size_t row) const { return choices_[row]; }
    const std::string& person_id(std::size_t row) const { return person_ids_[row]; }
    std::size_t n_available(std::size_t row) const;

    Observation row(std::size_t i) const { return {*this, i}; }

    bool operator==(const Dataset& other) const;

private:
    DataDictionary dictionary_;
    std::vector<std::string> alternatives_;
    std::vector<std::string> variables_;
    std::map<std::string, std::size_t> variable_lookup_;
    std::vector<std::string> person_ids_;
    std::vector<double> values_;
    std::vector<unsigned char> available_;
    std::vector<std::size_t> choices_;
};

/// Loads a CSV plus its markdown dictionary. Columns the dictionary does not
/// name are ignored. The choice column holds an alternative identifier or a
/// 1-based index into the alternative list.
Dataset load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& dictionary_path);
Dataset parse_dataset(const std::string& csv_text, const DataDictionary& dictionary);

/// CSV text for the dataset, columns in dictionary order, shortest round-trip numbers.
std::string to_csv(const Dataset& data);

/// Deterministic markdown description of the dataset.
std::string describe(const Dataset& data);

std::map<std::string, std::size_t> availability_profile(const Dataset& data);

}  // namespace dcm
