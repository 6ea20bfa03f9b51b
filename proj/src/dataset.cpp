#include "rca/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rca/csv.hpp"
#include "rca/text.hpp"

namespace rca {

using nlohmann::json;

namespace {

// Cells that are empty or one of these tokens count as missing-by-design.
bool is_missing_token(const std::string& cell) {
    std::string t = to_lower(trim(cell));
    return t.empty() || t == "na" || t == "n/a" || t == "nan" || t == "null";
}

bool token_in(const std::vector<std::string>& tokens, const std::string& value) {
    std::string v = to_lower(trim(value));
    return std::any_of(tokens.begin(), tokens.end(),
                       [&](const std::string& t) { return to_lower(t) == v; });
}

std::optional<double> parse_finite_double(const std::string& raw) {
    std::string t = trim(raw);
    if (t.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

bool BooleanPhrasing::matches_present(const std::string& token) const {
    return token_in(present_tokens, token) || trim(token) == present_text;
}

bool BooleanPhrasing::matches_absent(const std::string& token) const {
    return token_in(absent_tokens, token) || trim(token) == absent_text;
}

CellValue CellValue::make_numeric(double v, std::string raw) {
    CellValue c;
    c.state = State::numeric;
    c.number = v;
    c.text = std::move(raw);
    return c;
}

CellValue CellValue::make_category(std::string token) {
    CellValue c;
    c.state = State::category;
    c.text = std::move(token);
    return c;
}

std::size_t Dataset::feature_index(const std::string& name) const {
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == name) return i;
    throw std::runtime_error("unknown feature: " + name);
}

const PatientRecord& Dataset::record_by_id(const std::string& id) const {
    for (const auto& rec : records)
        if (rec.id == id) return rec;
    throw std::runtime_error("unknown record id: " + id);
}

std::size_t Dataset::positive_count() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const PatientRecord& r) { return r.label == 1; }));
}

std::size_t IngestReport::unparseable_total() const {
    std::size_t total = 0;
    for (const auto& [_, n] : unparseable) total += n;
    return total;
}

json IngestReport::to_json() const {
    json features = json::object();
    for (const auto& [name, n] : missing) features[name]["missing"] = n;
    for (const auto& [name, n] : unparseable) features[name]["unparseable"] = n;
    return json{{"rows", rows}, {"features", features}, {"unparseable_total", unparseable_total()}};
}

Dataset parse_schema(const json& doc) {
    Dataset ds;
    ds.variant = doc.value("variant", std::string("custom"));
    ds.label_column = doc.at("label_column").get<std::string>();

    const json& tokens = doc.at("label_tokens");
    ds.positive_tokens = tokens.at("positive").get<std::vector<std::string>>();
    ds.negative_tokens = tokens.at("negative").get<std::vector<std::string>>();

    const json& lex = doc.at("label_lexicon");
    ds.lexicon.positive_text = lex.at("positive_text").get<std::string>();
    ds.lexicon.negative_text = lex.at("negative_text").get<std::string>();
    ds.lexicon.disease_name = lex.value("disease_name", std::string());

    for (const json& f : doc.at("features")) {
        FeatureSchema fs;
        fs.name = f.at("name").get<std::string>();
        std::string kind = f.value("kind", std::string("categorical"));
        if (kind == "numerical") fs.kind = FeatureKind::numerical;
        else if (kind == "categorical") fs.kind = FeatureKind::categorical;
        else throw std::runtime_error("schema: unknown feature kind '" + kind + "'");
        fs.unit = f.value("unit", std::string());
        fs.narrative_template = f.value("narrative_template", std::string());
        if (f.contains("boolean_phrasing")) {
            const json& bp = f.at("boolean_phrasing");
            BooleanPhrasing phrasing;
            phrasing.present_text = bp.at("present").get<std::string>();
            phrasing.absent_text = bp.at("absent").get<std::string>();
            if (bp.contains("present_tokens"))
                phrasing.present_tokens = bp.at("present_tokens").get<std::vector<std::string>>();
            if (bp.contains("absent_tokens"))
                phrasing.absent_tokens = bp.at("absent_tokens").get<std::vector<std::string>>();
            fs.boolean_phrasing = std::move(phrasing);
        }
        fs.missing_phrasing = f.value("missing_phrasing", fs.name + " is unknown");
        if (!fs.boolean_phrasing) {
            std::size_t first = fs.narrative_template.find("{value}");
            if (first == std::string::npos)
                throw std::runtime_error("schema: feature '" + fs.name +
                                         "' narrative_template lacks a {value} placeholder");
            if (fs.narrative_template.find("{value}", first + 1) != std::string::npos)
                throw std::runtime_error("schema: feature '" + fs.name +
                                         "' narrative_template has more than one {value}");
        }
        // Duplicate names would make the value map ambiguous.
        for (const auto& existing : ds.schema)
            if (existing.name == fs.name)
                throw std::runtime_error("schema: duplicate feature name '" + fs.name + "'");
        ds.schema.push_back(std::move(fs));
    }
    if (ds.schema.empty()) throw std::runtime_error("schema: no features declared");
    return ds;
}

json schema_to_json(const Dataset& ds) {
    json features = json::array();
    for (const auto& fs : ds.schema) {
        json f{{"name", fs.name},
               {"kind", fs.kind == FeatureKind::numerical ? "numerical" : "categorical"}};
        if (!fs.unit.empty()) f["unit"] = fs.unit;
        if (!fs.narrative_template.empty()) f["narrative_template"] = fs.narrative_template;
        if (fs.boolean_phrasing) {
            const auto& bp = *fs.boolean_phrasing;
            f["boolean_phrasing"] = json{{"present", bp.present_text},
                                         {"absent", bp.absent_text},
                                         {"present_tokens", bp.present_tokens},
                                         {"absent_tokens", bp.absent_tokens}};
        }
        f["missing_phrasing"] = fs.missing_phrasing;
        features.push_back(std::move(f));
    }
    return json{{"variant", ds.variant},
                {"label_column", ds.label_column},
                {"label_tokens", json{{"positive", ds.positive_tokens}, {"negative", ds.negative_tokens}}},
                {"label_lexicon", json{{"positive_text", ds.lexicon.positive_text},
                                       {"negative_text", ds.lexicon.negative_text},
                                       {"disease_name", ds.lexicon.disease_name}}},
                {"features", features}};
}

LoadResult load_dataset(std::istream& table, std::istream& schema) {
    json schema_doc = json::parse(schema);
    Dataset ds = parse_schema(schema_doc);

    auto rows = parse_csv(table);
    if (rows.empty()) throw std::runtime_error("empty table");
    const auto& header = rows.front();

    std::vector<std::size_t> column_of(ds.schema.size());
    for (std::size_t i = 0; i < ds.schema.size(); ++i) {
        auto it = std::find(header.begin(), header.end(), ds.schema[i].name);
        if (it == header.end())
            throw std::runtime_error("header/schema mismatch: missing column '" + ds.schema[i].name + "'");
        column_of[i] = static_cast<std::size_t>(it - header.begin());
    }
    auto label_it = std::find(header.begin(), header.end(), ds.label_column);
    if (label_it == header.end())
        throw std::runtime_error("header/schema mismatch: missing label column '" + ds.label_column + "'");
    std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

    if (rows.size() == 1) throw std::runtime_error("empty table");

    IngestReport report;
    for (const auto& fs : ds.schema) {
        report.missing[fs.name] = 0;
        report.unparseable[fs.name] = 0;
    }

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw std::runtime_error("row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                     " cells, header has " + std::to_string(header.size()));
        PatientRecord rec;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "r%04zu", r - 1);
        rec.id = idbuf;

        const std::string& label_cell = row[label_col];
        if (token_in(ds.positive_tokens, label_cell)) rec.label = 1;
        else if (token_in(ds.negative_tokens, label_cell)) rec.label = 0;
        else throw std::runtime_error("unknown label token '" + label_cell + "' in row " + std::to_string(r));

        rec.values.reserve(ds.schema.size());
        for (std::size_t i = 0; i < ds.schema.size(); ++i) {
            const FeatureSchema& fs = ds.schema[i];
            const std::string& cell = row[column_of[i]];
            if (is_missing_token(cell)) {
                rec.values.push_back(CellValue::make_missing());
                ++report.missing[fs.name];
                continue;
            }
            if (fs.kind == FeatureKind::numerical) {
                auto parsed = parse_finite_double(cell);
                if (!parsed) {
                    rec.values.push_back(CellValue::make_missing());
                    ++report.unparseable[fs.name];
                } else {
                    rec.values.push_back(CellValue::make_numeric(*parsed, trim(cell)));
                }
            } else if (fs.boolean_phrasing &&
                       !fs.boolean_phrasing->matches_present(cell) &&
                       !fs.boolean_phrasing->matches_absent(cell)) {
                // Boolean-phrased feature with a token outside both sides:
                // treated like an unparseable cell.
                rec.values.push_back(CellValue::make_missing());
                ++report.unparseable[fs.name];
            } else {
                rec.values.push_back(CellValue::make_category(trim(cell)));
            }
        }
        ds.records.push_back(std::move(rec));
    }
    report.rows = ds.records.size();
    return LoadResult{std::move(ds), std::move(report)};
}

LoadResult load_dataset_files(const std::string& table_path, const std::string& schema_path) {
    std::ifstream table(table_path, std::ios::binary);
    if (!table) throw std::runtime_error("cannot open table: " + table_path);
    std::ifstream schema(schema_path, std::ios::binary);
    if (!schema) throw std::runtime_error("cannot open schema: " + schema_path);
    return load_dataset(table, schema);
}

namespace {

std::string render_clause(const FeatureSchema& fs, const CellValue& cell) {
    if (cell.missing()) return fs.missing_phrasing;
    if (fs.boolean_phrasing) {
        const auto& bp = *fs.boolean_phrasing;
        if (bp.matches_present(cell.text)) return bp.present_text;
        if (bp.matches_absent(cell.text)) return bp.absent_text;
        return fs.missing_phrasing;
    }
    std::string value = cell.state == CellValue::State::numeric && cell.text.empty()
                            ? format_roundtrip(cell.number)
                            : cell.text;
    std::string out = fs.narrative_template;
    std::size_t pos = out.find("{value}");
    out.replace(pos, 7, value);
    return out;
}

}  // namespace

std::string render_narrative(const PatientRecord& rec, const Dataset& ds) {
    if (rec.values.size() != ds.schema.size())
        throw std::runtime_error("record " + rec.id + " does not conform to schema");
    std::string out;
    for (std::size_t i = 0; i < ds.schema.size(); ++i) {
        if (i) out += ", ";
        out += render_clause(ds.schema[i], rec.values[i]);
    }
    out += ".";
    return out;
}

std::string render_error_sample(const PatientRecord& rec, const Dataset& ds) {
    const std::string& label_text = rec.label == 1 ? ds.lexicon.positive_text : ds.lexicon.negative_text;
    return "Features: " + render_narrative(rec, ds) + "\nTrue label: " + label_text + "\n";
}

std::string concat_error_batch(const std::vector<std::string>& samples) {
    if (samples.empty()) throw std::runtime_error("concat_error_batch: empty sample list");
    std::string out = samples.front();
    for (std::size_t i = 1; i < samples.size(); ++i) {
        out += "\n";
        out += samples[i];
    }
    return out;
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
    std::vector<std::string> header;
    header.reserve(ds.schema.size() + 1);
    for (const auto& fs : ds.schema) header.push_back(fs.name);
    header.push_back(ds.label_column);
    write_csv_row(out, header);

    for (const auto& rec : ds.records) {
        std::vector<std::string> row;
        row.reserve(header.size());
        for (std::size_t i = 0; i < ds.schema.size(); ++i) {
            const CellValue& cell = rec.values[i];
            row.push_back(cell.missing() ? std::string() : cell.text);
        }
        row.push_back(rec.label == 1 ? ds.positive_tokens.front() : ds.negative_tokens.front());
        write_csv_row(out, row);
    }
}

std::string dataset_fingerprint(const Dataset& ds) {
    std::ostringstream ss;
    for (const auto& fs : ds.schema) ss << fs.name << '|' << static_cast<int>(fs.kind) << ';';
    ss << '\n';
    write_dataset_csv(ds, ss);
    return fnv1a64_hex(ss.str());
}

}  // namespace rca
