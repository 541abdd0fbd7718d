#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace scrkit {

/// Provenance of one CLI invocation, written next to its outputs as run.json.
/// Kept apart from the output documents because it carries a timestamp.
struct RunRecord {
    std::string command;
    std::vector<std::pair<std::string, std::string>> inputs;      // path, sha256
    std::vector<std::pair<std::string, std::string>> parameters;  // flag, value
    std::vector<std::string> outputs;
    std::string timestamp;  // UTC, ISO 8601
    std::string version;
};

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);
std::string utc_timestamp();
std::string to_json(const RunRecord& record);

}  // namespace scrkit
