#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rca {

/// A prompt template loaded from a text asset. Placeholders are `{name}`
/// tokens drawn from a fixed vocabulary: rules, distribution, samples,
/// features, explanation. Anything else brace-like in an asset is a load
/// error, so template edits cannot silently skip substitution.
struct PromptTemplate {
    std::string name;     // prediction | reflection | check | judge
    std::string variant;  // crt | diabetes | heart_disease | custom | "" (judge)
    std::string body;
    std::vector<std::string> placeholders;  // names used by the body
};

struct UnboundPlaceholderError : std::runtime_error {
    explicit UnboundPlaceholderError(const std::string& name)
        : std::runtime_error("unbound placeholder: " + name), placeholder(name) {}
    std::string placeholder;
};

/// Loads `<name>_<variant>.txt` template assets plus `judge.txt` from one
/// directory. Templates are external assets so the wording stays auditable
/// and new diseases need no code change.
class TemplateLibrary {
public:
    static TemplateLibrary load_dir(const std::string& dir);

    const PromptTemplate& get(const std::string& name, const std::string& variant) const;
    const PromptTemplate& judge() const { return get("judge", ""); }
    bool has(const std::string& name, const std::string& variant) const;

private:
    std::map<std::string, PromptTemplate> templates_;  // key "<name>/<variant>"
};

/// Pure single-pass substitution. Every placeholder occurring in the body
/// must be bound; extra bindings are ignored.
std::string render_prompt(const PromptTemplate& t, const std::map<std::string, std::string>& bindings);

/// Headers that open a distribution block inside the templates.
const std::vector<std::string>& distribution_headers();
bool contains_distribution_header(const std::string& text);

/// Remove a template's distribution section (header line, placeholder line,
/// end marker if present, plus one adjacent blank line).
std::string strip_distribution_section(const std::string& body);

std::string build_prediction_prompt(const TemplateLibrary& lib, const std::string& variant,
                                    const std::string& narrative, const std::string& rules_text,
                                    const std::string& distribution_text, bool include_distribution = true);

std::string build_reflection_prompt(const TemplateLibrary& lib, const std::string& variant,
                                    const std::string& error_batch, const std::string& rules_text,
                                    const std::string& distribution_text, bool include_distribution = true);

std::string build_check_prompt(const TemplateLibrary& lib, const std::string& variant,
                               const std::string& rules_text, const std::string& distribution_text,
                               bool include_distribution = true);

/// Judge prompt over one explanation; context (the patient narrative) is
/// optional and its section is removed when absent. Throws on an empty
/// explanation.
std::string build_judge_prompt(const TemplateLibrary& lib, const std::string& explanation,
                               const std::optional<std::string>& features_context);

/// Default template directory: RCA_TEMPLATES_DIR env var if set, else the
/// build-time assets path.
std::string default_template_dir();

}  // namespace rca
