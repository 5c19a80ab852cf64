#include "plane_sample/manifest.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace ps {

std::string config_hash_hex(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunManifest::to_json_text() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["input_paths"] = input_paths;
    j["output_paths"] = output_paths;
    j["tool_version"] = tool_version;
    j["duration_seconds"] = duration_seconds;
    return j.dump(2) + "\n";
}

}  // namespace ps
