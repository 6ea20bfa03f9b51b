#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rca {

enum class RuleOrigin { initial, reflection, check };
enum class UpdateCause { reflect, check };

struct Rule {
    int id = 0;
    std::string text;  // one sentence, trimmed, no list markers
    RuleOrigin origin = RuleOrigin::initial;
    int epoch_created = 0;

    bool operator==(const Rule&) const = default;
};

struct ProvenanceEntry {
    int version = 0;
    UpdateCause cause = UpdateCause::reflect;
    int epoch = 0;
    int batch_index = 0;  // reflection batch within the epoch; -1 for check

    bool operator==(const ProvenanceEntry&) const = default;
};

/// Versioned natural-language rule list. Version 0 is the empty zero-shot
/// state; every accepted update is a full replacement that bumps the version.
class RuleBase {
public:
    RuleBase() = default;

    int version() const { return version_; }
    const std::vector<Rule>& rules() const { return rules_; }
    const std::vector<ProvenanceEntry>& provenance() const { return provenance_; }
    bool empty() const { return rules_.empty(); }

    bool operator==(const RuleBase&) const = default;

    friend RuleBase replace_rules(const RuleBase& rb, const std::vector<std::string>& new_texts,
                                  UpdateCause cause, int epoch, int batch_index);
    friend RuleBase restore(const nlohmann::json& snapshot_doc);

private:
    int version_ = 0;
    std::vector<Rule> rules_;
    std::vector<ProvenanceEntry> provenance_;
};

struct EmptyReflectionError : std::runtime_error {
    EmptyReflectionError() : std::runtime_error("empty reflection output") {}
};

/// Split LLM output into rule texts: one rule per line, bullets ("-", "*",
/// "•") and ordinal prefixes ("1.", "2)") stripped, blank lines and a
/// leading "Rules:" header dropped, order preserved. Throws
/// EmptyReflectionError when nothing survives.
std::vector<std::string> parse_rules(const std::string& llm_output);

/// Numbered lines "1. <text>" joined by newlines; empty rule base -> "".
std::string render_rules(const RuleBase& rb);

/// Full replacement (not a merge): version+1, provenance appended, exact
/// duplicate texts collapsed (first occurrence wins).
RuleBase replace_rules(const RuleBase& rb, const std::vector<std::string>& new_texts,
                       UpdateCause cause, int epoch, int batch_index);

/// Lossless snapshot including provenance.
nlohmann::json snapshot(const RuleBase& rb);
RuleBase restore(const nlohmann::json& snapshot_doc);  // throws on corrupt docs

/// Append one snapshot line to a rules.jsonl stream file.
void append_snapshot(const std::string& path, const RuleBase& rb);

/// Restore the last snapshot in a rules.jsonl file.
RuleBase load_last_snapshot(const std::string& path);

const char* to_string(RuleOrigin origin);
const char* to_string(UpdateCause cause);

}  // namespace rca
