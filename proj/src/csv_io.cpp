#include "plane_sample/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ps {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what + ", line " + std::to_string(line));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

template <typename Int>
Int parse_int(const std::string& s, const std::filesystem::path& path, std::size_t line,
              const char* what) {
    Int value{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        if (!s.empty() && s[0] == '-') fail(path, line, std::string("negative ") + what);
        fail(path, line, std::string("cannot parse ") + what + " '" + s + "'");
    }
    return value;
}

}  // namespace

ScenarioSpace load_space(const std::filesystem::path& path, const std::string& hyperplane_feature) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail(path, lineno, "missing header");
    line = strip_cr(line);

    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "scenario_id")
        fail(path, lineno, "header must start with 'scenario_id' followed by feature names");

    FeatureSchema schema;
    for (std::size_t i = 1; i < header.size(); ++i)
        schema.features.push_back({header[i], {}});

    std::vector<Scenario> scenarios;
    std::vector<std::unordered_map<std::string, std::uint32_t>> level_lookup(schema.features.size());
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            fail(path, lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(fields.size()));
        Scenario s;
        s.id = parse_int<ScenarioId>(fields[0], path, lineno, "scenario_id");
        for (std::size_t f = 0; f < schema.features.size(); ++f) {
            auto& lookup = level_lookup[f];
            auto it = lookup.find(fields[f + 1]);
            std::uint32_t idx;
            if (it == lookup.end()) {
                idx = static_cast<std::uint32_t>(schema.features[f].levels.size());
                schema.features[f].levels.push_back(fields[f + 1]);
                lookup.emplace(fields[f + 1], idx);
            } else {
                idx = it->second;
            }
            s.coords.push_back(idx);
        }
        scenarios.push_back(std::move(s));
    }
    if (scenarios.empty()) fail(path, lineno, "no scenario rows");

    schema.hyperplane_feature = hyperplane_feature;
    if (schema.hyperplane_feature.empty()) {
        for (const auto& f : schema.features)
            if (f.name == "town") schema.hyperplane_feature = f.name;
        if (schema.hyperplane_feature.empty())
            throw std::runtime_error(path.string() +
                                     ": no 'town' column; specify the hyperplane feature explicitly");
    }

    try {
        return ScenarioSpace(std::move(schema), std::move(scenarios));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void save_space(const ScenarioSpace& space, const std::filesystem::path& path) {
    for (const auto& f : space.schema().features)
        for (const auto& l : f.levels)
            if (l.find(',') != std::string::npos)
                throw std::invalid_argument("level '" + l + "' contains a comma");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "scenario_id";
    for (const auto& f : space.schema().features) out << ',' << f.name;
    out << '\n';
    for (const Scenario& s : space.scenarios()) {
        out << s.id;
        for (std::size_t f = 0; f < s.coords.size(); ++f)
            out << ',' << space.schema().features[f].levels[s.coords[f]];
        out << '\n';
    }
}

std::vector<Observation> load_observations(const std::filesystem::path& path,
                                           const ScenarioSpace& space) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail(path, lineno, "missing header");
    line = strip_cr(line);
    const auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "scenario_id" || header[1] != "count")
        fail(path, lineno, "header must be 'scenario_id,count'");

    std::vector<Observation> out;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) fail(path, lineno, "expected 2 fields");
        Observation o;
        o.scenario_id = parse_int<ScenarioId>(fields[0], path, lineno, "scenario_id");
        if (!space.contains(o.scenario_id))
            fail(path, lineno, "unknown scenario_id " + std::to_string(o.scenario_id));
        o.count = parse_int<std::uint32_t>(fields[1], path, lineno, "count");
        out.push_back(o);
    }
    return out;
}

void save_observations(const std::vector<Observation>& observations,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "scenario_id,count\n";
    for (const Observation& o : observations) out << o.scenario_id << ',' << o.count << '\n';
}

}  // namespace ps
