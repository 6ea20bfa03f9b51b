#include "rca/rules.hpp"

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rca/text.hpp"

namespace rca {

using nlohmann::json;

namespace {

const std::string kUtf8Bullet = "\xe2\x80\xa2";

// Strips one leading list marker; returns true if anything was removed.
bool strip_marker(std::string& line) {
    if (starts_with(line, kUtf8Bullet)) {
        line = trim(line.substr(kUtf8Bullet.size()));
        return true;
    }
    if ((line[0] == '-' || line[0] == '*') && line.size() > 1 &&
        std::isspace(static_cast<unsigned char>(line[1]))) {
        line = trim(line.substr(1));
        return true;
    }
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        // Ordinal prefix only when followed by whitespace or end of line,
        // so values like "1.5 mg/L" survive.
        if (i + 1 == line.size() || std::isspace(static_cast<unsigned char>(line[i + 1]))) {
            line = trim(line.substr(i + 1));
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<std::string> parse_rules(const std::string& llm_output) {
    std::vector<std::string> rules;
    bool seen_content = false;
    for (const std::string& raw : split_lines(llm_output)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (!seen_content && to_lower(line) == "rules:") {
            seen_content = true;
            continue;
        }
        seen_content = true;
        while (!line.empty() && strip_marker(line)) {
        }
        if (!line.empty()) rules.push_back(std::move(line));
    }
    if (rules.empty()) throw EmptyReflectionError();
    return rules;
}

std::string render_rules(const RuleBase& rb) {
    std::string out;
    for (std::size_t i = 0; i < rb.rules().size(); ++i) {
        if (i) out += "\n";
        out += std::to_string(i + 1) + ". " + rb.rules()[i].text;
    }
    return out;
}

RuleBase replace_rules(const RuleBase& rb, const std::vector<std::string>& new_texts,
                       UpdateCause cause, int epoch, int batch_index) {
    RuleBase next;
    next.version_ = rb.version_ + 1;
    next.provenance_ = rb.provenance_;
    next.provenance_.push_back(ProvenanceEntry{next.version_, cause, epoch, batch_index});

    RuleOrigin fresh_origin = cause == UpdateCause::reflect ? RuleOrigin::reflection : RuleOrigin::check;
    int id = 1;
    for (const std::string& raw : new_texts) {
        std::string text = trim(raw);
        if (text.empty()) continue;
        bool duplicate = false;
        for (const Rule& r : next.rules_)
            if (r.text == text) { duplicate = true; break; }
        if (duplicate) continue;

        Rule rule;
        rule.id = id++;
        rule.text = text;
        rule.origin = fresh_origin;
        rule.epoch_created = epoch;
        // A text carried over from the prior version keeps its provenance.
        for (const Rule& prev : rb.rules_) {
            if (prev.text == text) {
                rule.origin = prev.origin;
                rule.epoch_created = prev.epoch_created;
                break;
            }
        }
        next.rules_.push_back(std::move(rule));
    }
    return next;
}

const char* to_string(RuleOrigin origin) {
    switch (origin) {
        case RuleOrigin::initial: return "initial";
        case RuleOrigin::reflection: return "reflection";
        case RuleOrigin::check: return "check";
    }
    return "initial";
}

const char* to_string(UpdateCause cause) {
    return cause == UpdateCause::reflect ? "reflect" : "check";
}

namespace {

RuleOrigin origin_from_string(const std::string& s) {
    if (s == "initial") return RuleOrigin::initial;
    if (s == "reflection") return RuleOrigin::reflection;
    if (s == "check") return RuleOrigin::check;
    throw std::runtime_error("corrupted snapshot: unknown origin '" + s + "'");
}

UpdateCause cause_from_string(const std::string& s) {
    if (s == "reflect") return UpdateCause::reflect;
    if (s == "check") return UpdateCause::check;
    throw std::runtime_error("corrupted snapshot: unknown cause '" + s + "'");
}

}  // namespace

json snapshot(const RuleBase& rb) {
    json rules = json::array();
    for (const Rule& r : rb.rules())
        rules.push_back(json{{"id", r.id},
                             {"text", r.text},
                             {"origin", to_string(r.origin)},
                             {"epoch_created", r.epoch_created}});
    json provenance = json::array();
    for (const ProvenanceEntry& p : rb.provenance())
        provenance.push_back(json{{"version", p.version},
                                  {"cause", to_string(p.cause)},
                                  {"epoch", p.epoch},
                                  {"batch_index", p.batch_index}});
    return json{{"version", rb.version()}, {"rules", rules}, {"provenance", provenance}};
}

RuleBase restore(const json& snapshot_doc) {
    try {
        RuleBase rb;
        rb.version_ = snapshot_doc.at("version").get<int>();
        for (const json& r : snapshot_doc.at("rules")) {
            Rule rule;
            rule.id = r.at("id").get<int>();
            rule.text = r.at("text").get<std::string>();
            rule.origin = origin_from_string(r.at("origin").get<std::string>());
            rule.epoch_created = r.at("epoch_created").get<int>();
            if (trim(rule.text).empty()) throw std::runtime_error("corrupted snapshot: blank rule text");
            rb.rules_.push_back(std::move(rule));
        }
        for (const json& p : snapshot_doc.at("provenance")) {
            ProvenanceEntry entry;
            entry.version = p.at("version").get<int>();
            entry.cause = cause_from_string(p.at("cause").get<std::string>());
            entry.epoch = p.at("epoch").get<int>();
            entry.batch_index = p.at("batch_index").get<int>();
            rb.provenance_.push_back(entry);
        }
        if (rb.version_ == 0 && !rb.rules_.empty())
            throw std::runtime_error("corrupted snapshot: version 0 must be empty");
        return rb;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("corrupted snapshot: ") + e.what());
    }
}

void append_snapshot(const std::string& path, const RuleBase& rb) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot append snapshot to " + path);
    out << snapshot(rb).dump() << "\n";
}

RuleBase load_last_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot stream " + path);
    std::string line, last;
    while (std::getline(in, line))
        if (!trim(line).empty()) last = line;
    if (last.empty()) throw std::runtime_error("snapshot stream is empty: " + path);
    return restore(json::parse(last));
}

}  // namespace rca
