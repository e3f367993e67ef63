#ifndef WTAD_MANIFEST_HPP
#define WTAD_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace wtad {

/// Reproducibility record written alongside every CLI output: the exact
/// command line, content digests of configs and inputs, seeds in effect,
/// tool version, and wall-clock time.
struct RunManifest {
    std::string command_line;
    std::string tool_version;
    std::map<std::string, std::string> config_digests;  // path -> fnv1a-64 hex
    std::map<std::string, std::string> input_digests;
    std::vector<std::string> seeds;
    double wall_clock_seconds = 0.0;

    void add_config(const std::filesystem::path& path);
    void add_input(const std::filesystem::path& path);
    void write(const std::filesystem::path& path) const;
};

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

inline const char* kToolVersion = "wtad 1.0.0";

}  // namespace wtad

#endif
