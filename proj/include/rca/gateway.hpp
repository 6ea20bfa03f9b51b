#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rca {

enum class LlmRole { predict, reflect, check, judge };
const char* to_string(LlmRole role);
LlmRole role_from_string(const std::string& s);

struct CompletionRequest {
    LlmRole role = LlmRole::predict;
    std::string model_id;
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct CompletionResult {
    std::string text;
    TokenUsage usage;
    long latency_ms = 0;
    int attempts = 1;
};

struct RetryPolicy {
    int max_attempts = 3;
    long backoff_base_ms = 1000;  // delay doubles per retry
    bool jitter = true;           // off under test
};

enum class BackendKind { http_openai_compatible, scripted_mock };

struct BackendConfig {
    BackendKind kind = BackendKind::scripted_mock;
    std::string base_url;                          // http backend, e.g. https://api.openai.com
    std::string api_key_env = "RCA_API_KEY";
    std::string script_path;                       // mock backend
    std::string model_id = "mock-model";
    std::map<std::string, std::string> role_models;  // per-role override, keyed by role name
    int concurrency_limit = 4;
    RetryPolicy retry;

    std::string model_for(LlmRole role) const;
};

struct GatewayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RetriesExhaustedError : GatewayError {
    using GatewayError::GatewayError;
};
struct MockScriptError : GatewayError {
    using GatewayError::GatewayError;
};

/// One backend attempt: success, a retryable (transient) failure, or a
/// fatal failure that aborts the call.
struct AttemptOutcome {
    enum class Status { ok, transient, fatal };
    Status status = Status::ok;
    std::string text;   // response on ok, message otherwise
    TokenUsage usage;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual AttemptOutcome attempt(const CompletionRequest& req) = 0;
};

/// Deterministic offline backend. Each attempt for a role consumes the
/// script entry keyed by (role, per-role attempt ordinal). Entries either
/// carry a response or simulate one transient failure; require_substring
/// guards the prompt actually sent.
struct MockScriptEntry {
    std::string role;
    long ordinal = 0;
    std::optional<std::string> require_substring;
    std::optional<std::string> response;
    bool fail = false;
    std::string fail_message = "scripted failure";
    long delay_ms = 0;
};

class ScriptedMockBackend : public Backend {
public:
    explicit ScriptedMockBackend(std::vector<MockScriptEntry> entries);
    static std::unique_ptr<ScriptedMockBackend> from_file(const std::string& path);

    AttemptOutcome attempt(const CompletionRequest& req) override;

    // Instrumentation for concurrency tests.
    int max_in_flight() const { return max_in_flight_.load(); }
    long attempts_seen(const std::string& role) const;

private:
    mutable std::mutex mu_;
    std::map<std::pair<std::string, long>, MockScriptEntry> entries_;
    std::map<std::string, long> next_ordinal_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
};

/// OpenAI-compatible chat-completions client (POST /v1/chat/completions,
/// bearer token from the configured env var).
class HttpBackend : public Backend {
public:
    HttpBackend(std::string base_url, std::string api_key);
    AttemptOutcome attempt(const CompletionRequest& req) override;

private:
    std::string base_url_;
    std::string api_key_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg);

/// Thread-safe JSON-lines writer for calls.jsonl.
class CallLog {
public:
    explicit CallLog(const std::string& path);
    void record(const nlohmann::json& line);

private:
    std::mutex mu_;
    std::ofstream out_;
};

/// Dispatch with retry, bounded in-flight concurrency and per-call logging.
class Gateway {
public:
    Gateway(std::unique_ptr<Backend> backend, BackendConfig cfg, std::shared_ptr<CallLog> log = nullptr);

    /// Returns the first successful response; retries transient failures
    /// with exponential backoff up to retry.max_attempts. Thread-safe.
    CompletionResult complete(const CompletionRequest& req);

    /// Convenience wrapper stamping the configured model for the role.
    CompletionResult complete_role(LlmRole role, const std::string& prompt, double temperature = 0.0,
                                   int max_tokens = 1024, std::optional<std::uint64_t> seed = {});

    const BackendConfig& config() const { return cfg_; }
    Backend* backend() { return backend_.get(); }

private:
    class FlightSlot;

    std::unique_ptr<Backend> backend_;
    BackendConfig cfg_;
    std::shared_ptr<CallLog> log_;
    std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    std::map<std::string, long> call_counters_;

    void log_call(const CompletionRequest& req, long ordinal, int attempts, long latency_ms,
                  const TokenUsage& usage, const std::string& status, const std::string& error);
};

}  // namespace rca
