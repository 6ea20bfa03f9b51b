#pragma once

#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rca/gateway.hpp"

namespace rca {

/// Run-directory writer. Layout: config.json, manifest.json, rules.jsonl,
/// calls.jsonl, epochs.jsonl, final_rulebase.json plus per-command outputs.
class RunWriter {
public:
    explicit RunWriter(std::string run_dir);  // creates the directory

    const std::string& dir() const { return dir_; }
    std::string path(const std::string& name) const;

    void write_json(const std::string& name, const nlohmann::json& doc) const;
    void append_jsonl(const std::string& name, const nlohmann::json& line) const;
    void write_text(const std::string& name, const std::string& content) const;

    /// calls.jsonl sink, shared with the gateway.
    std::shared_ptr<CallLog> call_log();

private:
    std::string dir_;
    std::shared_ptr<CallLog> call_log_;
};

}  // namespace rca
