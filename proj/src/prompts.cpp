#include "rca/prompts.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include "rca/text.hpp"

namespace rca {

namespace {

const std::vector<std::string> kPlaceholderNames = {"rules", "distribution", "samples", "features",
                                                    "explanation"};

bool known_placeholder(const std::string& name) {
    return std::find(kPlaceholderNames.begin(), kPlaceholderNames.end(), name) != kPlaceholderNames.end();
}

// Scans for `{word}` tokens; returns the unique names in order of first use.
std::vector<std::string> scan_placeholders(const std::string& body, const std::string& asset_name) {
    std::vector<std::string> found;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '{') continue;
        std::size_t close = body.find('}', i + 1);
        if (close == std::string::npos) continue;
        std::string name = body.substr(i + 1, close - i - 1);
        bool wordlike = !name.empty() &&
                        std::all_of(name.begin(), name.end(),
                                    [](char c) { return (c >= 'a' && c <= 'z') || c == '_'; });
        if (!wordlike) continue;
        if (!known_placeholder(name))
            throw std::runtime_error("template " + asset_name + ": undeclared placeholder {" + name + "}");
        if (std::find(found.begin(), found.end(), name) == found.end()) found.push_back(name);
        i = close;
    }
    return found;
}

std::string key_of(const std::string& name, const std::string& variant) {
    return name + "/" + variant;
}

}  // namespace

TemplateLibrary TemplateLibrary::load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("template directory not found: " + dir);

    TemplateLibrary lib;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::string stem = entry.path().stem().string();
        std::string name, variant;
        if (stem == "judge") {
            name = "judge";
        } else {
            std::size_t underscore = stem.find('_');
            if (underscore == std::string::npos) continue;
            name = stem.substr(0, underscore);
            variant = stem.substr(underscore + 1);
            if (name != "prediction" && name != "reflection" && name != "check") continue;
        }
        PromptTemplate t;
        t.name = name;
        t.variant = variant;
        t.body = read_file(entry.path().string());
        t.placeholders = scan_placeholders(t.body, stem);
        lib.templates_[key_of(name, variant)] = std::move(t);
    }
    if (lib.templates_.empty()) throw std::runtime_error("no templates found in " + dir);
    return lib;
}

const PromptTemplate& TemplateLibrary::get(const std::string& name, const std::string& variant) const {
    auto it = templates_.find(key_of(name, variant));
    if (it == templates_.end())
        throw std::runtime_error("unknown template variant: " + name + "/" + variant);
    return it->second;
}

bool TemplateLibrary::has(const std::string& name, const std::string& variant) const {
    return templates_.count(key_of(name, variant)) > 0;
}

std::string render_prompt(const PromptTemplate& t, const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(t.body.size());
    const std::string& body = t.body;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '{') {
            std::size_t close = body.find('}', i + 1);
            if (close != std::string::npos) {
                std::string name = body.substr(i + 1, close - i - 1);
                if (known_placeholder(name)) {
                    auto it = bindings.find(name);
                    if (it == bindings.end()) throw UnboundPlaceholderError(name);
                    out += it->second;
                    i = close;
                    continue;
                }
            }
        }
        out.push_back(body[i]);
    }
    return out;
}

const std::vector<std::string>& distribution_headers() {
    static const std::vector<std::string> headers = {
        "Here is the distribution:",
        "Previous distribution:",
        "Data distribution:",
    };
    return headers;
}

bool contains_distribution_header(const std::string& text) {
    for (const auto& h : distribution_headers())
        if (text.find(h) != std::string::npos) return true;
    return false;
}

namespace {

// Drops the section opened by one of `headers`: the header line, any
// following lines listed in `members`, and one adjacent blank line.
std::string strip_section(const std::string& body, const std::vector<std::string>& headers,
                          const std::vector<std::string>& members) {
    std::vector<std::string> lines = split_lines(body);
    auto is_member = [&](const std::string& line) {
        return std::find(members.begin(), members.end(), line) != members.end();
    };
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (std::find(headers.begin(), headers.end(), lines[i]) == headers.end()) continue;
        std::size_t j = i;
        while (j + 1 < lines.size() && is_member(lines[j + 1])) ++j;
        if (j + 1 < lines.size() && lines[j + 1].empty()) ++j;
        lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(i),
                    lines.begin() + static_cast<std::ptrdiff_t>(j + 1));
        break;
    }
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += "\n";
        out += lines[i];
    }
    return out;
}

}  // namespace

std::string strip_distribution_section(const std::string& body) {
    return strip_section(body, distribution_headers(), {"{distribution}", "(END OF DISTRIBUTION)"});
}

namespace {

std::string build_with(const TemplateLibrary& lib, const std::string& name, const std::string& variant,
                       std::map<std::string, std::string> bindings, bool include_distribution) {
    PromptTemplate t = lib.get(name, variant);
    if (!include_distribution) {
        t.body = strip_distribution_section(t.body);
        bindings.erase("distribution");
    }
    return render_prompt(t, bindings);
}

}  // namespace

std::string build_prediction_prompt(const TemplateLibrary& lib, const std::string& variant,
                                    const std::string& narrative, const std::string& rules_text,
                                    const std::string& distribution_text, bool include_distribution) {
    return build_with(lib, "prediction", variant,
                      {{"rules", rules_text}, {"distribution", distribution_text}, {"features", narrative}},
                      include_distribution);
}

std::string build_reflection_prompt(const TemplateLibrary& lib, const std::string& variant,
                                    const std::string& error_batch, const std::string& rules_text,
                                    const std::string& distribution_text, bool include_distribution) {
    return build_with(lib, "reflection", variant,
                      {{"rules", rules_text}, {"distribution", distribution_text}, {"samples", error_batch}},
                      include_distribution);
}

std::string build_check_prompt(const TemplateLibrary& lib, const std::string& variant,
                               const std::string& rules_text, const std::string& distribution_text,
                               bool include_distribution) {
    return build_with(lib, "check", variant, {{"rules", rules_text}, {"distribution", distribution_text}},
                      include_distribution);
}

std::string build_judge_prompt(const TemplateLibrary& lib, const std::string& explanation,
                               const std::optional<std::string>& features_context) {
    if (trim(explanation).empty()) throw std::runtime_error("build_judge_prompt: empty explanation");
    PromptTemplate t = lib.judge();
    std::map<std::string, std::string> bindings{{"explanation", explanation}};
    if (features_context) {
        bindings["features"] = *features_context;
    } else {
        t.body = strip_section(t.body, {"Patient features:"}, {"{features}"});
    }
    return render_prompt(t, bindings);
}

std::string default_template_dir() {
    if (const char* env = std::getenv("RCA_TEMPLATES_DIR"); env && *env) return env;
#ifdef RCA_DEFAULT_TEMPLATE_DIR
    return RCA_DEFAULT_TEMPLATE_DIR;
#else
    return "assets/prompts";
#endif
}

}  // namespace rca
