#pragma once
// key = value experiment configs, sweep persistence and run records.

#include "bilab/io.hpp"
#include "bilab/rational.hpp"
#include "bilab/witnesses.hpp"

#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilab {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

using ConfigMap = std::map<std::string, std::string>;

// One `key = value` per line; '#' starts a comment; later keys win.
inline ConfigMap parse_config(const std::string& text) {
    ConfigMap out;
    auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(i + 1) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(i + 1) + ": empty key");
        out[key] = val;
    }
    return out;
}

inline std::string format_config(const ConfigMap& m) {
    std::string s;
    for (const auto& [k, v] : m) s += k + " = " + v + "\n";
    return s;
}

namespace detail {

inline const std::string& need(const ConfigMap& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end() || it->second.empty()) throw ConfigError("config: missing required key '" + key + "'");
    return it->second;
}

inline long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' is not an integer: " + v);
    }
}

inline Rational to_rational(const std::string& key, const std::string& v) {
    try {
        return Rational::parse(v);
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' is not a rational: " + v);
    }
}

}  // namespace detail

inline std::vector<double> parse_scales(const std::string& v) {
    std::vector<double> out;
    for (const auto& part : split(v, ',')) {
        auto t = trim(part);
        if (!t.empty()) out.push_back(detail::to_rational("scales", t).to_double());
    }
    if (out.empty()) throw ConfigError("config: 'scales' is empty");
    return out;
}

// Keys: family, n, p, q, scales, grid_n, seed (required); tolerance, eps0,
// box_constant, box_samples (optional).
inline SweepConfig sweep_config_from(const ConfigMap& m) {
    SweepConfig c;
    try {
        c.family = parse_family(detail::need(m, "family"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.n = static_cast<int>(detail::to_int("n", detail::need(m, "n")));
    if (c.n < 2) throw ConfigError("config: n must be >= 2");
    Rational p = detail::to_rational("p", detail::need(m, "p")), q = detail::to_rational("q", detail::need(m, "q"));
    if (p <= Rational(0) || q <= Rational(0)) throw ConfigError("config: p and q must be positive");
    c.p_text = p.str();
    c.q_text = q.str();
    c.p = p.to_double();
    c.q = q.to_double();
    c.scales = parse_scales(detail::need(m, "scales"));
    long long g = detail::to_int("grid_n", detail::need(m, "grid_n"));
    if (g < 1) throw ConfigError("config: grid_n must be positive");
    c.grid_n = static_cast<std::size_t>(g);
    long long s = detail::to_int("seed", detail::need(m, "seed"));
    if (s < 0) throw ConfigError("config: seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
    if (auto it = m.find("tolerance"); it != m.end()) c.tolerance = parse_double(it->second);
    if (auto it = m.find("eps0"); it != m.end()) c.eps0 = parse_double(it->second);
    if (auto it = m.find("box_constant"); it != m.end()) c.witness.box_constant = parse_double(it->second);
    if (auto it = m.find("box_samples"); it != m.end())
        c.witness.box_samples = static_cast<std::size_t>(detail::to_int("box_samples", it->second));
    if (!(c.tolerance > 0)) throw ConfigError("config: tolerance must be positive");
    return c;
}

inline std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunRecord {
    std::string command;
    ConfigMap config;
    std::string started, finished;
    std::vector<std::string> files;
    nlohmann::ordered_json verdicts = nlohmann::ordered_json::object();

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["config"] = config;
        j["started"] = started;
        j["finished"] = finished;
        j["files"] = files;
        j["verdicts"] = verdicts;
        return j;
    }
};

struct SweepFiles {
    std::filesystem::path csv, summary, record;
};

inline SweepFiles sweep_paths(const std::filesystem::path& dir, Family f) {
    const std::string stem = family_name(f);
    return {dir / (stem + ".csv"), dir / (stem + ".summary.json"), dir / "run_record.json"};
}

// Writes the CSV and summary; the record lists them and is written last.
inline void write_sweep(const SweepResult& r, const std::filesystem::path& dir, RunRecord rec) {
    std::filesystem::create_directories(dir);
    SweepFiles f = sweep_paths(dir, r.config.family);
    atomic_write(f.csv, sweep_csv(r));
    atomic_write(f.summary, sweep_summary(r).dump(2) + "\n");
    rec.files = {f.csv.filename().string(), f.summary.filename().string(), f.record.filename().string()};
    rec.verdicts["sweep"] = r.pass;
    rec.finished = utc_timestamp();
    atomic_write(f.record, rec.to_json().dump(2) + "\n");
}

}  // namespace bilab
