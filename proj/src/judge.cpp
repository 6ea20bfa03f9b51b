#include "rca/judge.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "rca/text.hpp"

namespace rca {

using nlohmann::json;

std::string format_scores(const RubricScores& s) {
    return "CL: " + std::to_string(s.cl) + "\nLA: " + std::to_string(s.la) +
           "\nEBM: " + std::to_string(s.ebm) + "\nCB: " + std::to_string(s.cb);
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// First "<label> <int>" occurrence with word boundaries; label match is
// case-sensitive ("CL"/"LA"/"EBM"/"CB" as the prompt requests them).
std::optional<int> find_labeled_int(const std::string& text, const std::string& label) {
    for (std::size_t pos = text.find(label); pos != std::string::npos; pos = text.find(label, pos + 1)) {
        if (pos > 0 && is_word_char(text[pos - 1])) continue;
        std::size_t i = pos + label.size();
        if (i < text.size() && is_word_char(text[i])) continue;
        while (i < text.size() &&
               (text[i] == ':' || text[i] == '=' || std::isspace(static_cast<unsigned char>(text[i]))))
            ++i;
        if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) continue;
        int value = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            value = value * 10 + (text[i] - '0');
            ++i;
        }
        return value;
    }
    return std::nullopt;
}

int require_score(const std::string& text, const std::string& label) {
    auto value = find_labeled_int(text, label);
    if (!value) throw std::runtime_error("judge output missing criterion " + label);
    if (*value < 1 || *value > 10)
        throw std::runtime_error("judge score out of range for " + label + ": " + std::to_string(*value));
    return *value;
}

}  // namespace

RubricScores parse_scores(const std::string& judge_output) {
    RubricScores s;
    s.cl = require_score(judge_output, "CL");
    s.la = require_score(judge_output, "LA");
    s.ebm = require_score(judge_output, "EBM");
    s.cb = require_score(judge_output, "CB");
    return s;
}

namespace {

ItemJudgement judge_item(const JudgeItem& item, const JudgeConfig& cfg, Gateway& gateway,
                         const TemplateLibrary& lib) {
    ItemJudgement out;
    out.id = item.id;
    try {
        std::string prompt = build_judge_prompt(
            lib, item.explanation, cfg.include_features ? item.features_context : std::nullopt);
        double cl = 0, la = 0, ebm = 0, cb = 0;
        for (int r = 0; r < cfg.repeats; ++r) {
            CompletionResult result =
                gateway.complete_role(LlmRole::judge, prompt, cfg.temperature, cfg.max_tokens);
            RubricScores s = parse_scores(result.text);
            cl += s.cl;
            la += s.la;
            ebm += s.ebm;
            cb += s.cb;
        }
        out.cl = cl / cfg.repeats;
        out.la = la / cfg.repeats;
        out.ebm = ebm / cfg.repeats;
        out.cb = cb / cfg.repeats;
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

CorpusJudgement judge_corpus(const std::vector<JudgeItem>& items, const JudgeConfig& cfg,
                             Gateway& gateway, const TemplateLibrary& lib) {
    if (items.empty()) throw std::runtime_error("judge_corpus: empty corpus");
    if (cfg.repeats < 1) throw std::runtime_error("judge_corpus: repeats must be >= 1");

    CorpusJudgement corpus;
    corpus.items.resize(items.size());

    int workers = cfg.parallelism < 1 ? 1 : cfg.parallelism;
    if (workers == 1) {
        for (std::size_t i = 0; i < items.size(); ++i)
            corpus.items[i] = judge_item(items[i], cfg, gateway, lib);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= items.size()) return;
                    corpus.items[i] = judge_item(items[i], cfg, gateway, lib);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    double cl = 0, la = 0, ebm = 0, cb = 0;
    for (const auto& item : corpus.items) {
        if (item.failed) continue;
        cl += item.cl;
        la += item.la;
        ebm += item.ebm;
        cb += item.cb;
        ++corpus.judged;
    }
    if (corpus.judged > 0) {
        double n = static_cast<double>(corpus.judged);
        corpus.mean_cl = round2(cl / n);
        corpus.mean_la = round2(la / n);
        corpus.mean_ebm = round2(ebm / n);
        corpus.mean_cb = round2(cb / n);
    }
    return corpus;
}

json CorpusJudgement::summary_json() const {
    return json{{"note", "automated rubric, not paper-equivalent"},
                {"items", items.size()},
                {"judged", judged},
                {"mean_cl", mean_cl},
                {"mean_la", mean_la},
                {"mean_ebm", mean_ebm},
                {"mean_cb", mean_cb}};
}

}  // namespace rca
