#include "run_record.hpp"

#include <chrono>
#include <ctime>
#include <memory>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "scr/io.hpp"

namespace scrkit {

std::string sha256_hex(std::string_view bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
        throw std::runtime_error("sha256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string file_sha256(const std::filesystem::path& path) {
    return sha256_hex(scr::io::read_file(path));
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string to_json(const RunRecord& record) {
    nlohmann::ordered_json doc;
    doc["command"] = record.command;
    doc["version"] = record.version;
    doc["timestamp"] = record.timestamp;
    auto inputs = nlohmann::ordered_json::array();
    for (const auto& [path, digest] : record.inputs) {
        inputs.push_back({{"path", path}, {"sha256", digest}});
    }
    doc["inputs"] = std::move(inputs);
    auto params = nlohmann::ordered_json::object();
    for (const auto& [key, value] : record.parameters) {
        params[key] = value;
    }
    doc["parameters"] = std::move(params);
    doc["outputs"] = record.outputs;
    return doc.dump(2) + "\n";
}

}  // namespace scrkit
