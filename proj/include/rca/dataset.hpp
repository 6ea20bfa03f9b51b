#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rca {

enum class FeatureKind { numerical, categorical };

/// Narrative phrasing for a two-valued categorical ("chemotherapy" /
/// "no chemotherapy"). Tokens mapping to the present side default to
/// {"1","yes","true","y"}; the schema file may override.
struct BooleanPhrasing {
    std::string present_text;
    std::string absent_text;
    std::vector<std::string> present_tokens{"1", "yes", "true", "y"};
    std::vector<std::string> absent_tokens{"0", "no", "false", "n"};

    bool matches_present(const std::string& token) const;
    bool matches_absent(const std::string& token) const;
};

struct FeatureSchema {
    std::string name;
    FeatureKind kind = FeatureKind::categorical;
    std::string unit;                 // informational only
    std::string narrative_template;   // must contain {value} unless boolean phrasing is set
    std::optional<BooleanPhrasing> boolean_phrasing;
    std::string missing_phrasing;     // defaults to "<name> is unknown"
};

struct CellValue {
    enum class State { missing, numeric, category };
    State state = State::missing;
    double number = 0.0;
    std::string text;  // source text for numerics; token for categoricals

    static CellValue make_missing() { return CellValue{}; }
    static CellValue make_numeric(double v, std::string raw);
    static CellValue make_category(std::string token);
    bool missing() const { return state == State::missing; }
};

struct PatientRecord {
    std::string id;
    std::vector<CellValue> values;  // indexed by schema order
    int label = 0;                  // binary {0,1}
};

struct LabelLexicon {
    std::string positive_text;
    std::string negative_text;
    std::string disease_name;
};

struct Dataset {
    std::vector<FeatureSchema> schema;
    std::vector<PatientRecord> records;
    LabelLexicon lexicon;
    std::string variant;  // template variant: crt | diabetes | heart_disease | custom
    std::string label_column;
    std::vector<std::string> positive_tokens;
    std::vector<std::string> negative_tokens;

    std::size_t feature_index(const std::string& name) const;  // throws on unknown name
    const PatientRecord& record_by_id(const std::string& id) const;
    std::size_t size() const { return records.size(); }
    std::size_t positive_count() const;
};

/// Per-feature ingest accounting: cells absent in the source vs. numeric
/// cells that failed to parse (both end up missing in the Dataset).
struct IngestReport {
    std::map<std::string, std::size_t> missing;
    std::map<std::string, std::size_t> unparseable;
    std::size_t rows = 0;

    std::size_t unparseable_total() const;
    nlohmann::json to_json() const;
};

struct LoadResult {
    Dataset dataset;
    IngestReport report;
};

/// Parse a schema JSON document (features, label column/tokens, lexicon).
Dataset parse_schema(const nlohmann::json& doc);

/// Inverse of parse_schema; load_dataset over the emitted document and
/// write_dataset_csv output reproduces the dataset.
nlohmann::json schema_to_json(const Dataset& ds);

/// Load a CSV table against a schema document. Header must cover every
/// schema feature plus the label column; unknown label tokens are errors;
/// unparseable numeric cells become missing and are counted in the report.
LoadResult load_dataset(std::istream& table, std::istream& schema);
LoadResult load_dataset_files(const std::string& table_path, const std::string& schema_path);

/// One-sentence narrative: schema-ordered clauses joined by ", ",
/// terminated by ".". Numeric values keep their source spelling.
std::string render_narrative(const PatientRecord& rec, const Dataset& ds);

/// "Features: <narrative>\nTrue label: <lexicon text>\n"
std::string render_error_sample(const PatientRecord& rec, const Dataset& ds);

/// Order-preserving concatenation with single blank-line separators.
/// Throws on an empty list.
std::string concat_error_batch(const std::vector<std::string>& samples);

/// Write the dataset back out as CSV (used by the perturb command).
void write_dataset_csv(const Dataset& ds, std::ostream& out);

/// Content hash over schema + table bytes, for run manifests.
std::string dataset_fingerprint(const Dataset& ds);

}  // namespace rca
