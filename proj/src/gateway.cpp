#include "rca/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#ifdef RCA_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "rca/prompts.hpp"
#include "rca/rng.hpp"
#include "rca/text.hpp"

namespace rca {

using nlohmann::json;

const char* to_string(LlmRole role) {
    switch (role) {
        case LlmRole::predict: return "predict";
        case LlmRole::reflect: return "reflect";
        case LlmRole::check: return "check";
        case LlmRole::judge: return "judge";
    }
    return "predict";
}

LlmRole role_from_string(const std::string& s) {
    if (s == "predict") return LlmRole::predict;
    if (s == "reflect") return LlmRole::reflect;
    if (s == "check") return LlmRole::check;
    if (s == "judge") return LlmRole::judge;
    throw std::runtime_error("unknown llm role: " + s);
}

std::string BackendConfig::model_for(LlmRole role) const {
    auto it = role_models.find(to_string(role));
    return it != role_models.end() ? it->second : model_id;
}

// ---------------------------------------------------------------------------
// Scripted mock backend

ScriptedMockBackend::ScriptedMockBackend(std::vector<MockScriptEntry> entries) {
    for (auto& e : entries) {
        auto key = std::make_pair(e.role, e.ordinal);
        if (entries_.count(key))
            throw MockScriptError("duplicate mock entry for (" + e.role + ", " +
                                  std::to_string(e.ordinal) + ")");
        entries_.emplace(key, std::move(e));
    }
}

std::unique_ptr<ScriptedMockBackend> ScriptedMockBackend::from_file(const std::string& path) {
    std::vector<MockScriptEntry> entries;
    for (const std::string& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        json doc = json::parse(line);
        MockScriptEntry e;
        e.role = doc.at("role").get<std::string>();
        e.ordinal = doc.at("ordinal").get<long>();
        if (doc.contains("require_substring"))
            e.require_substring = doc.at("require_substring").get<std::string>();
        if (doc.contains("response")) e.response = doc.at("response").get<std::string>();
        if (doc.contains("fail")) {
            if (doc["fail"].is_string()) {
                e.fail = true;
                e.fail_message = doc["fail"].get<std::string>();
            } else {
                e.fail = doc["fail"].get<bool>();
            }
        }
        e.delay_ms = doc.value("delay_ms", 0L);
        if (!e.fail && !e.response)
            throw MockScriptError("mock entry needs a response or fail: " + line);
        entries.push_back(std::move(e));
    }
    return std::make_unique<ScriptedMockBackend>(std::move(entries));
}

AttemptOutcome ScriptedMockBackend::attempt(const CompletionRequest& req) {
    int now = ++in_flight_;
    int seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }

    MockScriptEntry entry;
    {
        std::lock_guard<std::mutex> lock(mu_);
        const std::string role = to_string(req.role);
        long ordinal = next_ordinal_[role]++;
        auto it = entries_.find(std::make_pair(role, ordinal));
        if (it == entries_.end()) {
            --in_flight_;
            throw MockScriptError("script has no entry for (" + role + ", " + std::to_string(ordinal) +
                                  ")");
        }
        entry = it->second;
    }

    if (entry.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(entry.delay_ms));
    --in_flight_;

    if (entry.require_substring && req.prompt.find(*entry.require_substring) == std::string::npos)
        throw MockScriptError("mock entry (" + entry.role + ", " + std::to_string(entry.ordinal) +
                              ") substring guard failed: " + *entry.require_substring);

    if (entry.fail) return {AttemptOutcome::Status::transient, entry.fail_message, {}};

    AttemptOutcome out;
    out.status = AttemptOutcome::Status::ok;
    out.text = *entry.response;
    out.usage.prompt_tokens = static_cast<long>(req.prompt.size() / 4);
    out.usage.completion_tokens = static_cast<long>(out.text.size() / 4);
    return out;
}

long ScriptedMockBackend::attempts_seen(const std::string& role) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = next_ordinal_.find(role);
    return it == next_ordinal_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// HTTP backend

HttpBackend::HttpBackend(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {
    if (base_url_.empty()) throw GatewayError("http backend needs a base url");
}

AttemptOutcome HttpBackend::attempt(const CompletionRequest& req) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    json body{{"model", req.model_id},
              {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens}};
    if (req.seed) body["seed"] = *req.seed;

    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res)
        return {AttemptOutcome::Status::transient, "connection error: " + httplib::to_string(res.error()), {}};
    if (res->status == 429 || res->status >= 500)
        return {AttemptOutcome::Status::transient, "http status " + std::to_string(res->status), {}};
    if (res->status != 200)
        return {AttemptOutcome::Status::fatal,
                "http status " + std::to_string(res->status) + ": " + res->body, {}};

    try {
        json doc = json::parse(res->body);
        AttemptOutcome out;
        out.status = AttemptOutcome::Status::ok;
        out.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        if (doc.contains("usage")) {
            out.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
            out.usage.completion_tokens = doc["usage"].value("completion_tokens", 0L);
        }
        return out;
    } catch (const json::exception& e) {
        return {AttemptOutcome::Status::fatal, std::string("malformed backend response: ") + e.what(), {}};
    }
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg) {
    if (cfg.kind == BackendKind::scripted_mock) return ScriptedMockBackend::from_file(cfg.script_path);
    const char* key = std::getenv(cfg.api_key_env.c_str());
    return std::make_unique<HttpBackend>(cfg.base_url, key ? key : "");
}

// ---------------------------------------------------------------------------
// Call log

CallLog::CallLog(const std::string& path) : out_(path, std::ios::app | std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open call log: " + path);
}

void CallLog::record(const json& line) {
    std::lock_guard<std::mutex> lock(mu_);
    out_ << line.dump() << "\n";
    out_.flush();
}

// ---------------------------------------------------------------------------
// Gateway

class Gateway::FlightSlot {
public:
    FlightSlot(Gateway& g) : g_(g) {
        std::unique_lock<std::mutex> lock(g_.mu_);
        g_.cv_.wait(lock, [&] { return g_.in_flight_ < g_.cfg_.concurrency_limit; });
        ++g_.in_flight_;
    }
    ~FlightSlot() {
        {
            std::lock_guard<std::mutex> lock(g_.mu_);
            --g_.in_flight_;
        }
        g_.cv_.notify_one();
    }

private:
    Gateway& g_;
};

Gateway::Gateway(std::unique_ptr<Backend> backend, BackendConfig cfg, std::shared_ptr<CallLog> log)
    : backend_(std::move(backend)), cfg_(std::move(cfg)), log_(std::move(log)) {
    if (cfg_.concurrency_limit < 1) throw GatewayError("concurrency limit must be >= 1");
}

void Gateway::log_call(const CompletionRequest& req, long ordinal, int attempts, long latency_ms,
                       const TokenUsage& usage, const std::string& status, const std::string& error) {
    if (!log_) return;
    json line{{"role", to_string(req.role)},
              {"ordinal", ordinal},
              {"model", req.model_id},
              {"prompt_hash", fnv1a64_hex(req.prompt)},
              {"prompt_chars", req.prompt.size()},
              {"distribution_in_prompt", contains_distribution_header(req.prompt)},
              {"attempts", attempts},
              {"latency_ms", latency_ms},
              {"prompt_tokens", usage.prompt_tokens},
              {"completion_tokens", usage.completion_tokens},
              {"status", status}};
    if (!error.empty()) line["error"] = error;
    log_->record(line);
}

CompletionResult Gateway::complete(const CompletionRequest& req) {
    if (trim(req.prompt).empty()) throw GatewayError("empty prompt");

    long ordinal;
    {
        std::lock_guard<std::mutex> lock(mu_);
        ordinal = call_counters_[to_string(req.role)]++;
    }

    FlightSlot slot(*this);
    auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                     start)
            .count();
    };

    std::string last_error;
    for (int attempt = 1; attempt <= cfg_.retry.max_attempts; ++attempt) {
        AttemptOutcome outcome;
        try {
            outcome = backend_->attempt(req);
        } catch (const std::exception& e) {
            log_call(req, ordinal, attempt, elapsed_ms(), {}, "error", e.what());
            throw;
        }
        if (outcome.status == AttemptOutcome::Status::ok) {
            CompletionResult result;
            result.text = outcome.text;
            result.usage = outcome.usage;
            result.latency_ms = elapsed_ms();
            result.attempts = attempt;
            log_call(req, ordinal, attempt, result.latency_ms, result.usage, "ok", "");
            return result;
        }
        if (outcome.status == AttemptOutcome::Status::fatal) {
            log_call(req, ordinal, attempt, elapsed_ms(), {}, "error", outcome.text);
            throw GatewayError(outcome.text);
        }
        last_error = outcome.text;
        if (attempt < cfg_.retry.max_attempts) {
            long delay = cfg_.retry.backoff_base_ms << (attempt - 1);
            if (cfg_.retry.jitter && delay > 0) {
                // +/- 50% jitter, seeded from the clock.
                SplitMix64 rng(static_cast<std::uint64_t>(
                    std::chrono::steady_clock::now().time_since_epoch().count()));
                delay = delay / 2 + static_cast<long>(rng.bounded(static_cast<std::uint64_t>(delay) + 1));
            }
            if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
    log_call(req, ordinal, cfg_.retry.max_attempts, elapsed_ms(), {}, "error",
             "retries exhausted: " + last_error);
    throw RetriesExhaustedError("retries exhausted after " + std::to_string(cfg_.retry.max_attempts) +
                                " attempts: " + last_error);
}

CompletionResult Gateway::complete_role(LlmRole role, const std::string& prompt, double temperature,
                                        int max_tokens, std::optional<std::uint64_t> seed) {
    CompletionRequest req;
    req.role = role;
    req.model_id = cfg_.model_for(role);
    req.prompt = prompt;
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    req.seed = seed;
    return complete(req);
}

}  // namespace rca
