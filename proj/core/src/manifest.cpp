#include "wtad/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "wtad/errors.hpp"

namespace wtad {

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for digest");
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

void RunManifest::add_config(const std::filesystem::path& path) {
    config_digests[path.string()] = file_digest(path);
}

void RunManifest::add_input(const std::filesystem::path& path) {
    input_digests[path.string()] = file_digest(path);
}

void RunManifest::write(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["command_line"] = command_line;
    j["tool_version"] = tool_version.empty() ? kToolVersion : tool_version;
    j["config_digests"] = config_digests;
    j["input_digests"] = input_digests;
    j["seeds"] = seeds;
    j["wall_clock_seconds"] = wall_clock_seconds;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace wtad
