#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace ps::log {

enum class Level { off = 0, info = 1, debug = 2 };

// Verbosity comes from PLANE_SAMPLE_LOG (info|debug); anything else is silent.
// Read once; messages go to stderr so stdout stays machine-parseable.
inline Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("PLANE_SAMPLE_LOG");
        if (!env) return Level::off;
        const std::string v(env);
        if (v == "debug") return Level::debug;
        if (v == "info") return Level::info;
        return Level::off;
    }();
    return lvl;
}

inline void info(const std::string& msg) {
    if (level() >= Level::info) std::cerr << "[info] " << msg << "\n";
}

inline void debug(const std::string& msg) {
    if (level() >= Level::debug) std::cerr << "[debug] " << msg << "\n";
}

}  // namespace ps::log
