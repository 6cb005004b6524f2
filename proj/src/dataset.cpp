#include "dcm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "dcm/error.hpp"
#include "dcm/text.hpp"

namespace dcm {

namespace {

const char* const kKindNames[] = {"attribute", "availability", "covariate", "choice", "id"};
const char* const kQuantityNames[] = {"time", "cost", "other"};

DatasetError dict_error(const std::string& what) { return {DatasetErrc::bad_dictionary, "data dictionary: " + what}; }

VarKind parse_kind(const std::string& s) {
    for (int i = 0; i < 5; ++i)
        if (s == kKindNames[i]) return static_cast<VarKind>(i);
    throw dict_error("unknown kind '" + s + "'");
}

Quantity parse_quantity(const std::string& s) {
    if (s.empty()) return Quantity::other;
    for (int i = 0; i < 3; ++i)
        if (s == kQuantityNames[i]) return static_cast<Quantity>(i);
    throw dict_error("unknown quantity '" + s + "'");
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Splits a markdown table row, honouring "\|" escapes.
std::vector<std::string> table_cells(std::string_view line) {
    line = text::trim(line);
    if (!line.empty() && line.front() == '|') line.remove_prefix(1);
    if (!line.empty() && line.back() == '|' && !(line.size() >= 2 && line[line.size() - 2] == '\\'))
        line.remove_suffix(1);
    std::vector<std::string> cells;
    std::string cur;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
            cur += '|';
            ++i;
        } else if (line[i] == '|') {
            cells.emplace_back(text::trim(cur));
            cur.clear();
        } else {
            cur += line[i];
        }
    }
    cells.emplace_back(text::trim(cur));
    return cells;
}

std::string escape_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

bool is_separator_row(const std::vector<std::string>& cells) {
    return std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
        return !c.empty() && c.find_first_not_of("-: ") == std::string::npos;
    });
}

std::vector<std::string> csv_fields(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fields = text::split(line, ',');
    for (auto& f : fields) {
        auto t = std::string(text::trim(f));
        if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
        f = t;
    }
    return fields;
}

}  // namespace

const char* to_string(VarKind k) { return kKindNames[static_cast<int>(k)]; }
const char* to_string(Quantity q) { return kQuantityNames[static_cast<int>(q)]; }

DataDictionary::DataDictionary(std::vector<DictionaryEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> names;
    int n_choice = 0, n_id = 0;
    std::set<std::string> alts;
    for (auto& e : entries_) {
        if (e.kind != VarKind::attribute) e.quantity = Quantity::other;
        if (e.name.empty()) throw dict_error("entry with empty name");
        if (!names.insert(e.name).second) throw dict_error("duplicate entry '" + e.name + "'");
        if (e.kind == VarKind::choice) ++n_choice;
        if (e.kind == VarKind::id) ++n_id;
        if (e.kind == VarKind::availability) {
            if (e.alternative.empty()) throw dict_error("availability entry '" + e.name + "' names no alternative");
            if (!alts.insert(e.alternative).second)
                throw dict_error("alternative '" + e.alternative + "' has two availability entries");
        }
    }
    if (n_choice != 1) throw dict_error("expected exactly one choice entry, found " + std::to_string(n_choice));
    if (n_id > 1) throw dict_error("more than one id entry");
    if (alts.size() < 2) throw dict_error("need availability entries for at least two alternatives");
    for (const auto& e : entries_)
        if (e.kind == VarKind::attribute && !e.alternative.empty() && !alts.count(e.alternative))
            throw dict_error("attribute '" + e.name + "' refers to unknown alternative '" + e.alternative + "'");
}

DataDictionary DataDictionary::parse_markdown(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    bool have_sep = false;
    std::vector<DictionaryEntry> entries;
    while (std::getline(in, line)) {
        const auto t = text::trim(line);
        if (t.empty() || t.front() != '|') {
            if (!header.empty() && have_sep) break;  // table finished
            continue;
        }
        auto cells = table_cells(t);
        if (header.empty()) {
            for (auto& c : cells) c = lower(c);
            const std::vector<std::string> with_q{"name", "kind", "alternative", "quantity", "units", "description"};
            const std::vector<std::string> without_q{"name", "kind", "alternative", "units", "description"};
            if (cells != with_q && cells != without_q)
                throw dict_error("table header must be name | kind | alternative | [quantity |] units | description");
            header = cells;
            continue;
        }
        if (!have_sep) {
            if (!is_separator_row(cells)) throw dict_error("missing header separator row");
            have_sep = true;
            continue;
        }
        if (cells.size() != header.size())
            throw dict_error("row '" + std::string(t) + "' has " + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        DictionaryEntry e;
        std::size_t i = 0;
        e.name = cells[i++];
        e.kind = parse_kind(lower(cells[i++]));
        e.alternative = cells[i++];
        if (header.size() == 6) e.quantity = parse_quantity(lower(cells[i++]));
        e.units = cells[i++];
        e.description = cells[i++];
        entries.push_back(std::move(e));
    }
    if (header.empty()) throw dict_error("no table found");
    return DataDictionary(std::move(entries));
}

DataDictionary DataDictionary::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DatasetError(DatasetErrc::io, "missing file " + path.string());
    return parse_markdown(text::read_file(path.string()));
}

std::string DataDictionary::to_markdown() const {
    std::string out = "| name | kind | alternative | quantity | units | description |\n"
                      "| --- | --- | --- | --- | --- | --- |\n";
    for (const auto& e : entries_) {
        out += "| " + escape_cell(e.name) + " | " + to_string(e.kind) + " | " + escape_cell(e.alternative) + " | " +
               (e.kind == VarKind::attribute ? to_string(e.quantity) : "") + " | " + escape_cell(e.units) + " | " +
               escape_cell(e.description) + " |\n";
    }
    return out;
}

const DictionaryEntry* DataDictionary::find(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

const DictionaryEntry& DataDictionary::choice_entry() const {
    for (const auto& e : entries_)
        if (e.kind == VarKind::choice) return e;
    throw dict_error("no choice entry");
}

const DictionaryEntry* DataDictionary::id_entry() const {
    for (const auto& e : entries_)
        if (e.kind == VarKind::id) return &e;
    return nullptr;
}

std::vector<std::string> DataDictionary::alternatives() const {
    std::vector<std::string> alts;
    for (const auto& e : entries_)
        if (e.kind == VarKind::availability) alts.push_back(e.alternative);
    return alts;
}

const std::string& Observation::person_id() const { return data_->person_id(row_); }

double Observation::value(const std::string& variable) const {
    const auto idx = data_->variable_index(variable);
    if (!idx) throw Error("unknown variable '" + variable + "'");
    return data_->value(row_, *idx);
}

bool Observation::available(std::size_t alt) const { return data_->available(row_, alt); }

bool Observation::available(const std::string& alternative) const {
    const auto idx = data_->alternative_index(alternative);
    if (!idx) throw Error("unknown alternative '" + alternative + "'");
    return data_->available(row_, *idx);
}

std::size_t Observation::choice() const { return data_->choice(row_); }
const std::string& Observation::choice_name() const { return data_->alternatives()[data_->choice(row_)]; }

Dataset::Dataset(DataDictionary dictionary, std::vector<std::string> person_ids, std::vector<double> values,
                 std::vector<unsigned char> available, std::vector<std::size_t> choices)
    : dictionary_(std::move(dictionary)),
      alternatives_(dictionary_.alternatives()),
      person_ids_(std::move(person_ids)),
      values_(std::move(values)),
      available_(std::move(available)),
      choices_(std::move(choices)) {
    for (const auto& e : dictionary_.entries())
        if (e.kind == VarKind::attribute || e.kind == VarKind::covariate) {
            variable_lookup_[e.name] = variables_.size();
            variables_.push_back(e.name);
        }
    const auto n = choices_.size();
    if (person_ids_.size() != n || values_.size() != n * variables_.size() || available_.size() != n * alternatives_.size())
        throw Error("dataset: inconsistent storage sizes");
    for (std::size_t r = 0; r < n; ++r) {
        if (choices_[r] >= alternatives_.size()) throw DatasetError(DatasetErrc::bad_choice, "choice index out of range");
        if (!this->available(r, choices_[r]))
            throw DatasetError(DatasetErrc::choice_unavailable,
                               "row " + std::to_string(r + 1) + ": chosen alternative '" + alternatives_[choices_[r]] +
                                   "' is unavailable");
        if (n_available(r) < 2)
            throw DatasetError(DatasetErrc::too_few_available,
                               "row " + std::to_string(r + 1) + ": fewer than two alternatives available");
    }
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw DatasetError(DatasetErrc::non_finite_value,
                               "row " + std::to_string(i / variables_.size() + 1) + ", column '" +
                                   variables_[i % variables_.size()] + "': non-finite value");
}

std::optional<std::size_t> Dataset::variable_index(const std::string& name) const {
    const auto it = variable_lookup_.find(name);
    if (it == variable_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Dataset::alternative_index(const std::string& name) const {
    const auto it = std::find(alternatives_.begin(), alternatives_.end(), name);
    if (it == alternatives_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - alternatives_.begin());
}

std::size_t Dataset::n_available(std::size_t row) const {
    std::size_t k = 0;
    for (std::size_t j = 0; j < alternatives_.size(); ++j) k += available(row, j) ? 1 : 0;
    return k;
}

bool Dataset::operator==(const Dataset& o) const {
    return dictionary_ == o.dictionary_ && person_ids_ == o.person_ids_ && values_ == o.values_ &&
           available_ == o.available_ && choices_ == o.choices_;
}

Dataset parse_dataset(const std::string& csv_text, const DataDictionary& dictionary) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw DatasetError(DatasetErrc::io, "empty CSV");
    const auto header = csv_fields(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (!col.emplace(header[i], i).second)
            throw DatasetError(DatasetErrc::duplicate_column, "duplicate CSV column '" + header[i] + "'");

    auto column_of = [&](const std::string& name) {
        const auto it = col.find(name);
        if (it == col.end()) throw DatasetError(DatasetErrc::missing_column, "CSV has no column '" + name + "'");
        return it->second;
    };

    const auto alts = dictionary.alternatives();
    std::vector<std::size_t> var_cols, av_cols(alts.size());
    std::vector<std::string> var_names;
    for (const auto& e : dictionary.entries()) {
        if (e.kind == VarKind::attribute || e.kind == VarKind::covariate) {
            var_cols.push_back(column_of(e.name));
            var_names.push_back(e.name);
        } else if (e.kind == VarKind::availability) {
            const auto a = std::find(alts.begin(), alts.end(), e.alternative) - alts.begin();
            av_cols[static_cast<std::size_t>(a)] = column_of(e.name);
        }
    }
    const auto choice_col = column_of(dictionary.choice_entry().name);
    const auto* id = dictionary.id_entry();
    const std::optional<std::size_t> id_col = id ? std::optional(column_of(id->name)) : std::nullopt;

    std::vector<std::string> ids;
    std::vector<double> values;
    std::vector<unsigned char> avail;
    std::vector<std::size_t> choices;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        ++row;
        const auto f = csv_fields(line);
        const auto where = [&](std::size_t c) { return "row " + std::to_string(row) + ", column '" + header[c] + "'"; };
        if (f.size() != header.size())
            throw DatasetError(DatasetErrc::io, "row " + std::to_string(row) + ": expected " +
                                                    std::to_string(header.size()) + " fields, got " +
                                                    std::to_string(f.size()));
        ids.push_back(id_col ? f[*id_col] : std::to_string(row));
        for (std::size_t k = 0; k < var_cols.size(); ++k) {
            const auto v = text::parse_double(f[var_cols[k]]);
            if (!v || !std::isfinite(*v))
                throw DatasetError(DatasetErrc::non_finite_value, where(var_cols[k]) + ": '" + f[var_cols[k]] +
                                                                      "' is not a finite number");
            values.push_back(*v);
        }
        std::size_t n_av = 0;
        for (std::size_t j = 0; j < alts.size(); ++j) {
            const auto& cell = f[av_cols[j]];
            if (cell != "0" && cell != "1")
                throw DatasetError(DatasetErrc::bad_availability, where(av_cols[j]) + ": availability must be 0 or 1");
            avail.push_back(cell == "1" ? 1 : 0);
            n_av += cell == "1" ? 1 : 0;
        }
        const auto& c = f[choice_col];
        std::size_t chosen = alts.size();
        if (const auto it = std::find(alts.begin(), alts.end(), c); it != alts.end()) {
            chosen = static_cast<std::size_t>(it - alts.begin());
        } else if (const auto v = text::parse_double(c); v && *v == std::floor(*v) && *v >= 1 && *v <= double(alts.size())) {
            chosen = static_cast<std::size_t>(*v) - 1;
        } else {
            throw DatasetError(DatasetErrc::bad_choice, where(choice_col) + ": '" + c + "' is not an alternative");
        }
        if (!avail[avail.size() - alts.size() + chosen])
            throw DatasetError(DatasetErrc::choice_unavailable,
                               "row " + std::to_string(row) + ": chosen alternative '" + alts[chosen] + "' is unavailable");
        if (n_av < 2)
            throw DatasetError(DatasetErrc::too_few_available,
                               "row " + std::to_string(row) + ": fewer than two alternatives available");
        choices.push_back(chosen);
    }
    return Dataset(dictionary, std::move(ids), std::move(values), std::move(avail), std::move(choices));
}

Dataset load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& dictionary_path) {
    if (!std::filesystem::exists(csv_path)) throw DatasetError(DatasetErrc::io, "missing file " + csv_path.string());
    auto dictionary = DataDictionary::load(dictionary_path);
    return parse_dataset(text::read_file(csv_path.string()), dictionary);
}

std::string to_csv(const Dataset& data) {
    const auto& dict = data.dictionary();
    std::string out;
    bool first = true;
    for (const auto& e : dict.entries()) {
        out += (first ? "" : ",") + e.name;
        first = false;
    }
    out += '\n';
    for (std::size_t r = 0; r < data.n_obs(); ++r) {
        first = true;
        for (const auto& e : dict.entries()) {
            if (!first) out += ',';
            first = false;
            switch (e.kind) {
                case VarKind::attribute:
                case VarKind::covariate:
                    out += text::shortest(data.value(r, *data.variable_index(e.name)));
                    break;
                case VarKind::availability:
                    out += data.available(r, *data.alternative_index(e.alternative)) ? '1' : '0';
                    break;
                case VarKind::choice:
                    out += data.alternatives()[data.choice(r)];
                    break;
                case VarKind::id:
                    out += data.person_id(r);
                    break;
            }
        }
        out += '\n';
    }
    return out;
}

std::string describe(const Dataset& data) {
    const auto& dict = data.dictionary();
    std::string out = "# Data description\n\n";
    out += "observations: " + std::to_string(data.n_obs()) + "\n";
    out += "alternatives: ";
    for (std::size_t j = 0; j < data.n_alternatives(); ++j) out += (j ? ", " : "") + data.alternatives()[j];
    out += "\n\n## Variables\n\n" + dict.to_markdown();

    out += "\n## Attributes by alternative\n\n";
    for (const auto& alt : data.alternatives()) {
        out += "- " + alt + ":";
        bool any = false;
        for (const auto& e : dict.entries())
            if (e.kind == VarKind::attribute && e.alternative == alt) {
                out += (any ? ", " : " ") + e.name;
                any = true;
            }
        out += any ? "\n" : " (none)\n";
    }

    out += "\n## Covariates\n\n";
    bool any = false;
    for (const auto& e : dict.entries())
        if (e.kind == VarKind::covariate) {
            out += "- " + e.name + (e.units.empty() ? "" : " (" + e.units + ")") +
                   (e.description.empty() ? "" : ": " + e.description) + "\n";
            any = true;
        }
    if (!any) out += "(none)\n";

    out += "\n## Choice\n\n";
    out += "Column `" + dict.choice_entry().name + "` holds the chosen alternative";
    out += " (1 = " + data.alternatives()[0];
    for (std::size_t j = 1; j < data.n_alternatives(); ++j)
        out += ", " + std::to_string(j + 1) + " = " + data.alternatives()[j];
    out += "). An alternative can be chosen only where its availability flag is 1.\n";
    return out;
}

std::map<std::string, std::size_t> availability_profile(const Dataset& data) {
    std::map<std::string, std::size_t> counts;
    for (std::size_t j = 0; j < data.n_alternatives(); ++j) {
        std::size_t c = 0;
        for (std::size_t r = 0; r < data.n_obs(); ++r) c += data.available(r, j) ? 1 : 0;
        counts[data.alternatives()[j]] = c;
    }
    return counts;
}

}  // namespace dcm
