#ifndef POLYCYCLIC_TOOLS_CONFIG_HPP
#define POLYCYCLIC_TOOLS_CONFIG_HPP

#include "polycyclic/core/rational.hpp"

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace polycyclic::cli
{

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what) {}
};

inline std::string child(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

inline std::string child(const std::string& path, std::size_t i)
{
    return path + "[" + std::to_string(i) + "]";
}

inline const json& need(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object()) {
        throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError(child(path, key), "missing");
    }
    return *it;
}

inline const json* maybe(const json& obj, const std::string& key)
{
    if (!obj.is_object()) {
        return nullptr;
    }
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

// Numbers may be JSON numbers or strings holding exact rationals ("3/7", "-0.125").
inline Rational as_rational(const json& j, const std::string& path)
{
    if (j.is_number_integer()) {
        return Rational(j.get<long>());
    }
    if (j.is_number_float()) {
        double v = j.get<double>();
        if (!std::isfinite(v)) {
            throw ConfigError(path, "not finite");
        }
        return Rational(v);
    }
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(path, std::string("bad rational: ") + e.what());
        }
    }
    throw ConfigError(path, "expected a number or a rational string");
}

inline double as_double(const json& j, const std::string& path)
{
    if (j.is_number()) {
        double v = j.get<double>();
        if (!std::isfinite(v)) {
            throw ConfigError(path, "not finite");
        }
        return v;
    }
    return as_rational(j, path).get_d();
}

inline long as_int(const json& j, const std::string& path, long lo, long hi)
{
    if (!j.is_number_integer()) {
        throw ConfigError(path, "expected an integer");
    }
    long v = j.get<long>();
    if (v < lo || v > hi) {
        throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

inline std::string as_string(const json& j, const std::string& path)
{
    if (!j.is_string()) {
        throw ConfigError(path, "expected a string");
    }
    return j.get<std::string>();
}

inline const json& as_array(const json& j, const std::string& path)
{
    if (!j.is_array()) {
        throw ConfigError(path, "expected an array");
    }
    return j;
}

inline std::vector<double> as_doubles(const json& j, const std::string& path)
{
    std::vector<double> v;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
        v.push_back(as_double(j[i], child(path, i)));
    }
    return v;
}

// Either an explicit array or {"from", "to", "points", "spacing": "linear"|"log"}.
inline std::vector<double> as_grid(const json& j, const std::string& path)
{
    if (j.is_array()) {
        return as_doubles(j, path);
    }
    double a = as_double(need(j, "from", path), child(path, "from"));
    double b = as_double(need(j, "to", path), child(path, "to"));
    long n = as_int(need(j, "points", path), child(path, "points"), 1, 1000000);
    std::string spacing = "linear";
    if (const json* s = maybe(j, "spacing")) {
        spacing = as_string(*s, child(path, "spacing"));
    }
    if (spacing != "linear" && spacing != "log") {
        throw ConfigError(child(path, "spacing"), "expected \"linear\" or \"log\"");
    }
    if (spacing == "log" && !(a > 0.0 && b > 0.0)) {
        throw ConfigError(path, "log spacing needs positive end points");
    }
    std::vector<double> v;
    for (long i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        v.push_back(spacing == "log" ? std::exp(std::log(a) + (std::log(b) - std::log(a)) * t) : a + (b - a) * t);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Output

inline std::uint64_t fnv1a64(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RunContext
{
    std::string command;
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string config_hash; // 16 hex digits

    std::string header_comment() const
    {
        return "# polycyclic " + std::string(kToolVersion) + " command=" + command + " config_hash=" + config_hash +
               " seed=" + std::to_string(seed);
    }

    json header_object() const
    {
        return json{{"tool", "polycyclic"}, {"version", kToolVersion}, {"command", command}, {"config_hash", config_hash},
                    {"seed", seed}};
    }

    std::filesystem::path write(const std::string& name, const std::string& body) const
    {
        std::filesystem::create_directories(out_dir);
        auto p = out_dir / name;
        std::ofstream os(p, std::ios::binary);
        if (!os) {
            throw std::runtime_error("cannot write " + p.string());
        }
        os << body;
        return p;
    }

    std::filesystem::path write_json(const std::string& name, json body) const
    {
        json doc;
        doc["header"] = header_object();
        for (auto& [k, v] : body.items()) {
            doc[k] = v;
        }
        return write(name, doc.dump(2) + "\n");
    }
};

inline std::string config_hash(const json& cfg, std::uint64_t seed)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(cfg.dump() + "#seed=" + std::to_string(seed)));
    return buf;
}

} // namespace polycyclic::cli

#endif // POLYCYCLIC_TOOLS_CONFIG_HPP
