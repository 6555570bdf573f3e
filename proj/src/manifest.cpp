#include "apgen/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace apgen {

std::uint64_t fnv1a_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return 0;
    std::ostringstream ss;
    ss << f.rdbuf();
    std::string s = ss.str();
    return fnv1a_bytes(s.data(), s.size());
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = nlohmann::json::parse(config_json);
    j["seed"] = seed;
    j["inputs"] = inputs;
    nlohmann::json outs = nlohmann::json::array();
    for (const std::string& o : outputs) {
        char buf[20];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(o)));
        outs.push_back({{"path", o}, {"fnv1a64", buf}});
    }
    j["outputs"] = outs;
    j["wall_seconds"] = wall_seconds;
    std::ofstream f(path);
    f << j.dump(2) << '\n';
}

}  // namespace apgen
