#include "ikm/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ikm/errors.hpp"

namespace ikm {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '"' && s.back() == '"'))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

double parse_number(const std::string& field, std::size_t line) {
    std::string t = trim(field);
    if (!t.empty() && t.front() == '+') t.erase(t.begin());
    double value = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || t.empty()) {
        throw DataError("non-numeric value '" + trim(field) + "' (line " + std::to_string(line) +
                        ")");
    }
    if (!std::isfinite(value)) {
        throw DataError("non-finite value '" + t + "' (line " + std::to_string(line) + ")");
    }
    return value;
}

std::string render_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Splits one ARFF data row. Commas inside '...' or "..." are literal.
std::vector<std::string> split_arff_row(const std::string& row, std::size_t line) {
    std::vector<std::string> fields;
    std::string cur;
    char quote = 0;
    for (char c : row) {
        if (quote) {
            if (c == quote) {
                quote = 0;
            } else {
                cur += c;
            }
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quote) throw DataError("unterminated quote (line " + std::to_string(line) + ")");
    fields.push_back(trim(cur));
    return fields;
}

struct RawRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

enum class ColumnRole { Feature, Label, Id, Ignored };

// Shared back end: turn raw rows plus per-column roles into a Dataset.
Dataset assemble(const std::vector<std::string>& column_names,
                 const std::vector<ColumnRole>& roles, const std::vector<RawRow>& rows,
                 const ParseOptions& options, std::string relation, std::string source) {
    Dataset ds;
    ds.relation = std::move(relation);
    ds.source = std::move(source);
    for (std::size_t c = 0; c < column_names.size(); ++c) {
        if (roles[c] == ColumnRole::Feature) ds.attribute_names.push_back(column_names[c]);
        if (roles[c] == ColumnRole::Label) ds.label_names.push_back(column_names[c]);
    }

    std::unordered_set<RecordId> seen_ids;
    RecordId next_id = 0;
    for (const RawRow& row : rows) {
        if (row.fields.size() != roles.size()) {
            throw DataError("row has " + std::to_string(row.fields.size()) + " fields, expected " +
                            std::to_string(roles.size()) + " (line " + std::to_string(row.line) +
                            ")");
        }
        const bool missing = std::any_of(row.fields.begin(), row.fields.end(),
                                         [](const std::string& f) { return trim(f) == "?"; });
        if (missing) {
            if (options.skip_missing) {
                ++ds.skipped_missing;
                continue;
            }
            throw DataError("missing value '?' (line " + std::to_string(row.line) +
                            "); pass skip_missing to drop such rows");
        }

        Record rec;
        std::vector<std::string> label_parts;
        for (std::size_t c = 0; c < roles.size(); ++c) {
            switch (roles[c]) {
                case ColumnRole::Feature:
                    rec.values.push_back(parse_number(row.fields[c], row.line));
                    break;
                case ColumnRole::Label:
                    label_parts.push_back(trim(row.fields[c]));
                    break;
                case ColumnRole::Id: {
                    const double v = parse_number(row.fields[c], row.line);
                    if (v != std::floor(v)) {
                        throw DataError("id column value '" + trim(row.fields[c]) +
                                        "' is not an integer (line " + std::to_string(row.line) +
                                        ")");
                    }
                    rec.id = static_cast<RecordId>(v);
                    break;
                }
                case ColumnRole::Ignored:
                    break;
            }
        }
        if (options.id_column.empty()) rec.id = next_id;
        ++next_id;
        if (!seen_ids.insert(rec.id).second) {
            throw DataError("duplicate record id " + std::to_string(rec.id) + " (line " +
                            std::to_string(row.line) + ")");
        }
        if (label_parts.empty()) {
            rec.label = std::to_string(rec.id);
        } else {
            for (std::size_t i = 0; i < label_parts.size(); ++i) {
                if (i) rec.label += '|';
                rec.label += label_parts[i];
            }
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

// Resolve feature_columns / id_column against declared columns. numeric[c]
// tells whether column c may be a feature.
std::vector<ColumnRole> resolve_roles(const std::vector<std::string>& names,
                                      const std::vector<bool>& numeric,
                                      const ParseOptions& options) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (!index.emplace(names[c], c).second) {
            throw DataError("duplicate attribute name '" + names[c] + "'");
        }
    }

    std::vector<ColumnRole> roles(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
        roles[c] = numeric[c] ? ColumnRole::Feature : ColumnRole::Label;
    }

    if (!options.feature_columns.empty()) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (roles[c] == ColumnRole::Feature) roles[c] = ColumnRole::Ignored;
        }
        for (const std::string& want : options.feature_columns) {
            auto it = index.find(want);
            if (it == index.end()) throw DataError("unknown requested column '" + want + "'");
            if (!numeric[it->second]) {
                throw DataError("requested column '" + want + "' is not numeric");
            }
            roles[it->second] = ColumnRole::Feature;
        }
    }

    if (!options.id_column.empty()) {
        auto it = index.find(options.id_column);
        if (it == index.end()) throw DataError("unknown id column '" + options.id_column + "'");
        if (!numeric[it->second]) {
            throw DataError("id column '" + options.id_column + "' is not numeric");
        }
        roles[it->second] = ColumnRole::Id;
    }

    if (std::none_of(roles.begin(), roles.end(),
                     [](ColumnRole r) { return r == ColumnRole::Feature; })) {
        throw DataError("no numeric feature columns");
    }
    return roles;
}

std::string file_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"'\n\r %{}") != std::string::npos || s.empty();
}

}  // namespace

Dataset parse_arff_text(const std::string& text, const std::string& source_name,
                        const ParseOptions& options) {
    std::vector<std::string> names;
    std::vector<bool> numeric;
    std::string relation;
    std::vector<RawRow> rows;
    bool in_data = false;

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '%') continue;

        if (!in_data) {
            const std::string low = lower(line);
            if (low.rfind("@relation", 0) == 0) {
                relation = strip_quotes(trim(line.substr(9)));
            } else if (low.rfind("@attribute", 0) == 0) {
                std::string rest = trim(line.substr(10));
                if (rest.empty()) {
                    throw DataError("malformed @attribute (line " + std::to_string(line_no) + ")");
                }
                std::string name;
                std::size_t pos = 0;
                if (rest.front() == '\'' || rest.front() == '"') {
                    const char q = rest.front();
                    const std::size_t end = rest.find(q, 1);
                    if (end == std::string::npos) {
                        throw DataError("unterminated attribute name (line " +
                                        std::to_string(line_no) + ")");
                    }
                    name = rest.substr(1, end - 1);
                    pos = end + 1;
                } else {
                    const std::size_t end = rest.find_first_of(" \t");
                    if (end == std::string::npos) {
                        throw DataError("@attribute missing a type (line " +
                                        std::to_string(line_no) + ")");
                    }
                    name = rest.substr(0, end);
                    pos = end;
                }
                const std::string type = lower(trim(rest.substr(pos)));
                if (type == "numeric" || type == "real" || type == "integer") {
                    names.push_back(name);
                    numeric.push_back(true);
                } else if (type == "string" || type.rfind("date", 0) == 0) {
                    names.push_back(name);
                    numeric.push_back(false);
                } else if (!type.empty() && type.front() == '{') {
                    throw DataError("nominal attribute '" + name + "' is not supported (line " +
                                    std::to_string(line_no) + ")");
                } else if (type.rfind("relational", 0) == 0) {
                    throw DataError("relational ARFF is not supported (line " +
                                    std::to_string(line_no) + ")");
                } else {
                    throw DataError("unsupported attribute type '" + type + "' (line " +
                                    std::to_string(line_no) + ")");
                }
            } else if (low == "@data") {
                in_data = true;
            } else {
                throw DataError("unrecognized header line (line " + std::to_string(line_no) + ")");
            }
            continue;
        }

        if (line.front() == '{') {
            throw DataError("sparse ARFF is not supported (line " + std::to_string(line_no) + ")");
        }
        rows.push_back({line_no, split_arff_row(line, line_no)});
    }

    if (!in_data) throw DataError("missing @data section in " + source_name);
    if (names.empty()) throw DataError("no @attribute declarations in " + source_name);

    const auto roles = resolve_roles(names, numeric, options);
    return assemble(names, roles, rows, options,
                    relation.empty() ? file_stem(source_name) : relation, source_name);
}

Dataset parse_arff(const std::string& path, const ParseOptions& options) {
    return parse_arff_text(read_file(path), path, options);
}

namespace {

// RFC-4180 field splitter; quoted fields may contain commas, doubled quotes,
// and line breaks. Rows are reported with the line they start on.
std::vector<RawRow> split_csv(const std::string& text) {
    std::vector<RawRow> rows;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool field_open = false;  // row has content pending
    std::size_t line = 1, row_start = 1;

    auto end_field = [&] {
        fields.push_back(cur);
        cur.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back({row_start, fields});
        fields.clear();
        field_open = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                cur += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                field_open = true;
                break;
            case ',':
                end_field();
                field_open = true;
                break;
            case '\r':
                break;
            case '\n':
                if (field_open || !cur.empty() || !fields.empty()) end_row();
                ++line;
                row_start = line;
                break;
            default:
                cur += c;
                field_open = true;
                break;
        }
    }
    if (quoted) throw DataError("unterminated quote at end of file");
    if (field_open || !cur.empty() || !fields.empty()) end_row();
    return rows;
}

bool looks_numeric(const std::string& s) {
    std::string t = trim(s);
    if (!t.empty() && t.front() == '+') t.erase(t.begin());
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    return ec == std::errc() && ptr == t.data() + t.size() && !t.empty();
}

}  // namespace

Dataset parse_csv_text(const std::string& text, const std::string& source_name,
                       const ParseOptions& options) {
    std::vector<RawRow> rows = split_csv(text);
    if (rows.empty()) throw DataError("empty file: " + source_name);

    std::vector<std::string> names;
    if (options.has_header) {
        for (const std::string& f : rows.front().fields) names.push_back(trim(f));
        rows.erase(rows.begin());
    } else {
        for (std::size_t c = 0; c < rows.front().fields.size(); ++c) {
            names.push_back("col" + std::to_string(c));
        }
    }

    // No declared types: a column may serve as a feature unless the caller
    // narrowed the selection, in which case unselected columns turn into
    // labels (when non-numeric in the first row) or are ignored.
    std::vector<bool> numeric(names.size(), true);
    if (!options.feature_columns.empty() && !rows.empty()) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            const bool selected =
                std::find(options.feature_columns.begin(), options.feature_columns.end(),
                          names[c]) != options.feature_columns.end();
            const bool is_id = names[c] == options.id_column;
            if (!selected && !is_id) numeric[c] = looks_numeric(rows.front().fields[c]);
        }
    }

    const auto roles = resolve_roles(names, numeric, options);
    return assemble(names, roles, rows, options, file_stem(source_name), source_name);
}

Dataset parse_csv(const std::string& path, const ParseOptions& options) {
    return parse_csv_text(read_file(path), path, options);
}

std::string render_arff(const Dataset& dataset) {
    std::ostringstream out;
    out << "@relation " << (dataset.relation.empty() ? "dataset" : dataset.relation) << "\n\n";
    for (const std::string& name : dataset.label_names) {
        out << "@attribute " << (needs_quoting(name) ? "'" + name + "'" : name) << " string\n";
    }
    for (const std::string& name : dataset.attribute_names) {
        out << "@attribute " << (needs_quoting(name) ? "'" + name + "'" : name) << " numeric\n";
    }
    out << "@data\n";
    for (const Record& rec : dataset.records) {
        bool first = true;
        if (!dataset.label_names.empty()) {
            std::istringstream parts(rec.label);
            std::string part;
            for (std::size_t i = 0; i < dataset.label_names.size(); ++i) {
                std::getline(parts, part, '|');
                if (!first) out << ',';
                out << (needs_quoting(part) ? "'" + part + "'" : part);
                first = false;
            }
        }
        for (double v : rec.values) {
            if (!first) out << ',';
            out << render_double(v);
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string render_csv(const Dataset& dataset) {
    std::ostringstream out;
    bool first = true;
    for (const std::string& name : dataset.label_names) {
        if (!first) out << ',';
        out << csv_quote(name);
        first = false;
    }
    for (const std::string& name : dataset.attribute_names) {
        if (!first) out << ',';
        out << csv_quote(name);
        first = false;
    }
    out << "\n";
    for (const Record& rec : dataset.records) {
        first = true;
        if (!dataset.label_names.empty()) {
            std::istringstream parts(rec.label);
            std::string part;
            for (std::size_t i = 0; i < dataset.label_names.size(); ++i) {
                std::getline(parts, part, '|');
                if (!first) out << ',';
                out << csv_quote(part);
                first = false;
            }
        }
        for (double v : rec.values) {
            if (!first) out << ',';
            out << render_double(v);
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

void write_arff(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << render_arff(dataset);
    if (!out) throw IoError("write failed: " + path);
}

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << render_csv(dataset);
    if (!out) throw IoError("write failed: " + path);
}

std::string canonical_csv(const Dataset& dataset) {
    std::ostringstream out;
    out << "id";
    for (const std::string& name : dataset.label_names) out << ',' << csv_quote(name);
    for (const std::string& name : dataset.attribute_names) out << ',' << csv_quote(name);
    out << "\n";
    for (const Record& rec : dataset.records) {
        out << rec.id;
        if (!dataset.label_names.empty()) out << ',' << csv_quote(rec.label);
        for (double v : rec.values) out << ',' << render_double(v);
        out << "\n";
    }
    return out.str();
}

std::string fingerprint(const Dataset& dataset) {
    const std::string canon = canonical_csv(dataset);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string("fnv1a:") + buf;
}

RecordLookup make_lookup(const Dataset& dataset) {
    return make_lookup(std::vector<Dataset>{dataset});
}

RecordLookup make_lookup(const std::vector<Dataset>& datasets) {
    auto table = std::make_shared<std::unordered_map<RecordId, FeatureVector>>();
    for (const Dataset& ds : datasets) {
        for (const Record& rec : ds.records) (*table)[rec.id] = rec.values;
    }
    return [table](RecordId id) -> const FeatureVector* {
        auto it = table->find(id);
        return it == table->end() ? nullptr : &it->second;
    };
}

}  // namespace ikm
