#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "../leakage.hpp"
#include "../mi_estimation.hpp"
#include "../qgrid.hpp"
#include "../sbox.hpp"

namespace leakbound::experiments {

/// Invalid or inconsistent experiment configuration (exit code 2).
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failure while reading or writing results (exit code 3).
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Profile { desk, paper };

inline std::size_t default_draws(Profile profile) { return profile == Profile::paper ? 1'000'000 : 100'000; }

struct ExperimentConfig
{
    unsigned ell = 8;
    SboxKind sbox = SboxKind::identity;
    std::uint64_t sbox_seed = 0;
    bool masked = false;
    std::vector<double> sigma2_list;
    QGrid q_grid;
    std::size_t n_draws = 0;
    std::vector<std::size_t> n_draws_list;
    std::size_t n_attacks = 200;
    double target_ps = 0.95;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    std::optional<MiKind> mi_kind;
    std::string canonical;  // sorted "key = value" lines, hashed for provenance

    LeakageConfig leakage(double sigma2) const
    {
        const FieldParams field(ell);
        return LeakageConfig(field, sbox_build(sbox, field, sbox_seed), masked, sigma2);
    }
};

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    std::from_chars_result res;
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for double is unreliable on older toolchains
        try {
            std::size_t used = 0;
            value = static_cast<T>(std::stod(text, &used));
            res = {begin + used, used == text.size() && !text.empty() ? std::errc{} : std::errc::invalid_argument};
        } catch (const std::exception&) {
            res = {begin, std::errc::invalid_argument};
        }
    } else {
        res = std::from_chars(begin, end, value);
    }
    if (res.ec != std::errc{} || res.ptr != end)
        throw ConfigError("key '" + key + "': cannot parse '" + text + "' as a number");
    return value;
}

/// Integers in configs may be written 1e5 or 100000.
inline std::size_t parse_count(const std::string& key, const std::string& text)
{
    const double v = parse_number<double>(key, text);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15)
        throw ConfigError("key '" + key + "': '" + text + "' is not a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + text + "'");
}

inline QGrid parse_grid(const std::string& text)
{
    try {
        if (text.rfind("linspace:", 0) == 0) {
            const auto parts = split(std::string_view(text).substr(9), ':');
            if (parts.size() != 3)
                throw ConfigError("q_grid: expected linspace:start:stop:count");
            return QGrid::linspace(parse_count("q_grid", parts[0]), parse_count("q_grid", parts[1]),
                                   parse_count("q_grid", parts[2]));
        }
        std::vector<std::size_t> pts;
        for (const auto& item : split(text, ','))
            pts.push_back(parse_count("q_grid", item));
        return QGrid(std::move(pts));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("q_grid: ") + e.what());
    }
}

inline const std::set<std::string, std::less<>>& known_keys()
{
    static const std::set<std::string, std::less<>> keys = {
        "ell",       "sbox",      "sbox_seed", "masked", "sigma2_list", "q_grid",     "n_draws",
        "n_draws_list", "n_attacks", "target_ps", "seed", "output_dir",  "mi_kind"};
    return keys;
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment. Every key is validated
/// before anything is computed. Unknown or repeated keys are rejected.
inline ExperimentConfig parse_config(std::istream& in, Profile profile = Profile::desk)
{
    using namespace detail;
    std::map<std::string, std::string> entries;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (!known_keys().contains(key))
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!entries.emplace(key, value).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }

    ExperimentConfig cfg;
    for (const auto& [key, value] : entries)
        cfg.canonical += key + " = " + value + "\n";

    auto get = [&](std::string_view key) -> const std::string* {
        auto it = entries.find(std::string(key));
        return it == entries.end() ? nullptr : &it->second;
    };

    if (auto v = get("ell")) {
        cfg.ell = static_cast<unsigned>(parse_count("ell", *v));
        if (cfg.ell < 1 || cfg.ell > max_ell)
            throw ConfigError("ell must lie in [1, 16]");
    }
    if (auto v = get("sbox")) {
        try {
            cfg.sbox = parse_sbox_kind(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (cfg.sbox == SboxKind::aes_subbytes && cfg.ell != 8)
        throw ConfigError("sbox = aes-subbytes requires ell = 8");
    if (auto v = get("sbox_seed"))
        cfg.sbox_seed = parse_number<std::uint64_t>("sbox_seed", *v);
    if (auto v = get("masked"))
        cfg.masked = parse_bool("masked", *v);

    const std::string* sigmas = get("sigma2_list");
    if (!sigmas || sigmas->empty())
        throw ConfigError("sigma2_list is required and must not be empty");
    for (const auto& item : split(*sigmas, ',')) {
        const double s = parse_number<double>("sigma2_list", item);
        if (!(s > 0.0) || !std::isfinite(s))
            throw ConfigError("sigma2_list entries must be positive");
        cfg.sigma2_list.push_back(s);
    }

    const std::string* grid = get("q_grid");
    if (!grid || grid->empty())
        throw ConfigError("q_grid is required");
    cfg.q_grid = parse_grid(*grid);

    cfg.n_draws = default_draws(profile);
    if (auto v = get("n_draws"))
        cfg.n_draws = parse_count("n_draws", *v);
    if (cfg.n_draws < 2)
        throw ConfigError("n_draws must be >= 2");
    if (auto v = get("n_draws_list")) {
        for (const auto& item : split(*v, ',')) {
            const std::size_t n = parse_count("n_draws_list", item);
            if (n < 2)
                throw ConfigError("n_draws_list entries must be >= 2");
            cfg.n_draws_list.push_back(n);
        }
    }
    if (auto v = get("n_attacks"))
        cfg.n_attacks = parse_count("n_attacks", *v);
    if (auto v = get("target_ps")) {
        cfg.target_ps = parse_number<double>("target_ps", *v);
        const double p_min = std::ldexp(1.0, -static_cast<int>(cfg.ell));
        if (!(cfg.target_ps >= p_min && cfg.target_ps <= 1.0))
            throw ConfigError("target_ps must lie in [2^-ell, 1]");
    }
    if (auto v = get("seed"))
        cfg.seed = parse_number<std::uint64_t>("seed", *v);
    if (auto v = get("output_dir")) {
        if (v->empty())
            throw ConfigError("output_dir must not be empty");
        cfg.output_dir = *v;
    }
    if (auto v = get("mi_kind")) {
        if (*v == "I_XYT")
            cfg.mi_kind = MiKind::xyt;
        else if (*v == "I_UYT")
            cfg.mi_kind = MiKind::uyt;
        else
            throw ConfigError("mi_kind must be I_XYT or I_UYT");
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path, Profile profile = Profile::desk)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    return parse_config(in, profile);
}

}  // namespace leakbound::experiments
