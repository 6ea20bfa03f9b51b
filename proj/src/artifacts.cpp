#include "rca/artifacts.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rca/text.hpp"

namespace rca {

RunWriter::RunWriter(std::string run_dir) : dir_(std::move(run_dir)) {
    std::filesystem::create_directories(dir_);
}

std::string RunWriter::path(const std::string& name) const {
    return (std::filesystem::path(dir_) / name).string();
}

void RunWriter::write_json(const std::string& name, const nlohmann::json& doc) const {
    write_file(path(name), doc.dump(2) + "\n");
}

void RunWriter::append_jsonl(const std::string& name, const nlohmann::json& line) const {
    std::ofstream out(path(name), std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot append to " + path(name));
    out << line.dump() << "\n";
}

void RunWriter::write_text(const std::string& name, const std::string& content) const {
    write_file(path(name), content);
}

std::shared_ptr<CallLog> RunWriter::call_log() {
    if (!call_log_) call_log_ = std::make_shared<CallLog>(path("calls.jsonl"));
    return call_log_;
}

}  // namespace rca
