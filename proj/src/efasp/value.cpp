#include "apgen/efasp/value.hpp"

namespace apgen::efasp {

std::uint64_t hash_value(const Value& v) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t x) {
        h ^= x;
        h *= 1099511628211ull;
    };
    for (const Rational& r : v) {
        mix(static_cast<std::uint64_t>(r.num()));
        mix(static_cast<std::uint64_t>(r.den()));
    }
    return h;
}

std::string value_str(const Value& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += " ";
        s += v[i].str();
    }
    return s + ")";
}

}  // namespace apgen::efasp
