#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ps {

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance record written next to every command's outputs.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> input_paths;
    std::vector<std::string> output_paths;
    std::string tool_version = kToolVersion;
    double duration_seconds = 0.0;

    std::string to_json_text() const;
};

// FNV-1a 64-bit over the exact config text, rendered as 16 hex digits.
std::string config_hash_hex(std::string_view text);

}  // namespace ps
