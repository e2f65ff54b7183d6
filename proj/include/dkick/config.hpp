#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "csv.hpp"

namespace dkick {

enum class ExperimentKind { kick, scan_strength, scan_expansion, multispin, coil_field, qm_sweep, qm_depth_scan, qm_decay };

inline const std::vector<std::pair<ExperimentKind, std::string>>& experiment_names() {
    static const std::vector<std::pair<ExperimentKind, std::string>> names{
        {ExperimentKind::kick, "kick"},
        {ExperimentKind::scan_strength, "scan-strength"},
        {ExperimentKind::scan_expansion, "scan-expansion"},
        {ExperimentKind::multispin, "multispin"},
        {ExperimentKind::coil_field, "coil-field"},
        {ExperimentKind::qm_sweep, "qm-sweep"},
        {ExperimentKind::qm_depth_scan, "qm-depth-scan"},
        {ExperimentKind::qm_decay, "qm-decay"}};
    return names;
}

inline std::string to_string(ExperimentKind k) {
    for (const auto& [kind, name] : experiment_names())
        if (kind == k) return name;
    return "?";
}

inline std::optional<ExperimentKind> experiment_from_string(const std::string& s) {
    for (const auto& [kind, name] : experiment_names())
        if (name == s) return kind;
    return std::nullopt;
}

namespace config {

enum class Dimension { none, time, length, temperature, velocity, gradient, curvature, field, current, rate, slope };

struct Unit {
    const char* suffix;
    double scale;  // SI per unit
};

/// Accepted suffixes per dimension; the first is the SI unit used when serializing.
inline const std::vector<Unit>& units(Dimension d) {
    static const std::map<Dimension, std::vector<Unit>> table{
        {Dimension::none, {}},
        {Dimension::time, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}}},
        {Dimension::length, {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}},
        {Dimension::temperature, {{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}, {"nK", 1e-9}}},
        {Dimension::velocity, {{"m_per_s", 1.0}, {"cm_per_s", 1e-2}, {"mm_per_s", 1e-3}}},
        {Dimension::gradient, {{"T_per_m", 1.0}, {"G_per_cm", 1e-2}}},
        {Dimension::curvature, {{"T_per_m2", 1.0}, {"G_per_cm2", 1.0}}},
        {Dimension::field, {{"T", 1.0}, {"G", 1e-4}}},
        {Dimension::current, {{"A", 1.0}}},
        {Dimension::rate, {{"per_s", 1.0}}},
        {Dimension::slope, {{"K_per_m", 1.0}, {"uK_per_cm", 1e-4}}}};
    return table.at(d);
}

enum class Type { real, integer, boolean, choice, real_list };
enum class Constraint { any, positive, nonnegative };

struct KeySpec {
    std::string name;  // without unit suffix
    Type type = Type::real;
    Dimension dim = Dimension::none;
    Constraint constraint = Constraint::any;
    std::string default_text;  // in the SI unit (or plain for dimensionless); empty = required
    std::vector<std::string> choices;
    std::string doc;
};

using Value = std::variant<double, long long, bool, std::string, std::vector<double>>;

namespace detail {

inline std::vector<KeySpec> ensemble_keys(const std::string& t_uK, const std::string& r_mm) {
    return {
        {"n_atoms", Type::integer, Dimension::none, Constraint::positive, "100000", {}, "number of atoms"},
        {"temperature", Type::real, Dimension::temperature, Constraint::nonnegative, t_uK, {}, "initial temperature"},
        {"rms_radius", Type::real, Dimension::length, Constraint::nonnegative, r_mm, {}, "initial rms radius"},
        {"m_F", Type::integer, Dimension::none, Constraint::any, "3", {}, "spin state of every atom"},
    };
}

inline std::vector<KeySpec> kick_keys() {
    return {
        {"t_f", Type::real, Dimension::time, Constraint::nonnegative, "0.011", {}, "free expansion before the kick"},
        {"t_k", Type::real, Dimension::time, Constraint::positive, "0.003", {}, "kick duration"},
        {"kick_field", Type::choice, Dimension::none, Constraint::any, "quadrupole", {"quadrupole", "harmonic", "coil"},
         "kick field model"},
        {"kick_dv", Type::real, Dimension::velocity, Constraint::nonnegative, "0.024", {},
         "on-axis speed change of an m_F = F atom (quadrupole)"},
        {"curvature", Type::real, Dimension::curvature, Constraint::nonnegative, "60", {}, "axial curvature (harmonic)"},
        {"bias", Type::real, Dimension::field, Constraint::nonnegative, "0", {}, "bias field (harmonic)"},
        {"coil_current", Type::real, Dimension::current, Constraint::any, "18", {}, "coil current (coil)"},
        {"coil_polarity", Type::choice, Dimension::none, Constraint::any, "opposed", {"opposed", "aligned"},
         "coil current sense (coil)"},
        {"gravity", Type::boolean, Dimension::none, Constraint::any, "true", {}, "gravity along -y"},
        {"axis", Type::integer, Dimension::none, Constraint::any, "2", {}, "reported axis 0, 1 or 2"},
        {"tof_delays", Type::real_list, Dimension::time, Constraint::nonnegative, "0,0.002,0.004,0.006,0.008,0.01", {},
         "time-of-flight delays after the kick"},
    };
}

inline std::vector<KeySpec> sweep_keys() {
    return {
        {"temperature", Type::real, Dimension::temperature, Constraint::positive, "1.3e-6", {}, "initial temperature"},
        {"trap_slope", Type::real, Dimension::slope, Constraint::nonnegative, "0.03", {}, "V-trap slope alpha/k_B"},
        {"barrier_height", Type::real, Dimension::temperature, Constraint::nonnegative, "6e-7", {},
         "barrier height U0/k_B"},
        {"barrier_waist", Type::real, Dimension::length, Constraint::positive, "2e-5", {}, "1/e^2 intensity radius"},
        {"x_start", Type::real, Dimension::length, Constraint::any, "-0.00025", {}, "barrier start position"},
        {"x_stop", Type::real, Dimension::length, Constraint::any, "0.00025", {}, "barrier stop position"},
        {"speed", Type::real, Dimension::velocity, Constraint::positive, "0.0005", {}, "sweep speed"},
        {"grid_min", Type::real, Dimension::length, Constraint::any, "-0.0004", {}, "grid start"},
        {"grid_max", Type::real, Dimension::length, Constraint::any, "0.0004", {}, "grid end"},
        {"grid_points", Type::integer, Dimension::none, Constraint::positive, "8192", {}, "grid points"},
        {"dt", Type::real, Dimension::time, Constraint::positive, "5e-7", {}, "time step"},
        {"weight_tolerance", Type::real, Dimension::none, Constraint::positive, "0.001", {},
         "neglected thermal weight"},
        {"series_points", Type::integer, Dimension::none, Constraint::nonnegative, "0", {}, "time-series checkpoints"},
        {"absorber_fraction", Type::real, Dimension::none, Constraint::nonnegative, "0.1", {},
         "absorbing layer width per side"},
        {"absorber_rate", Type::real, Dimension::rate, Constraint::nonnegative, "10000", {}, "absorber strength"},
    };
}

inline std::vector<KeySpec> append(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
    for (const auto& k : b) {
        auto it = std::find_if(a.begin(), a.end(), [&](const KeySpec& s) { return s.name == k.name; });
        if (it != a.end())
            *it = k;
        else
            a.push_back(k);
    }
    return a;
}

}  // namespace detail

/// Keys accepted by each experiment kind, besides `experiment` and `seed`.
inline std::vector<KeySpec> schema(ExperimentKind kind) {
    using namespace detail;
    switch (kind) {
        case ExperimentKind::kick:
            return append(ensemble_keys("7.5e-6", "0.00025"), kick_keys());
        case ExperimentKind::scan_strength:
            return append(append(ensemble_keys("7.5e-6", "0.00025"), kick_keys()),
                          {{"strengths", Type::real_list, Dimension::velocity, Constraint::nonnegative,
                            "0,0.005,0.01,0.015,0.02,0.025,0.03,0.035,0.04", {}, "kick strengths dv"},
                           {"n_atoms", Type::integer, Dimension::none, Constraint::positive, "20000", {},
                            "atoms per scan point"},
                           {"tof_delays", Type::real_list, Dimension::time, Constraint::nonnegative, "", {},
                            "time-of-flight delays after the kick"}});
        case ExperimentKind::scan_expansion:
            return append(ensemble_keys("7.5e-6", "0.0001"),
                          {{"t_f_list", Type::real_list, Dimension::time, Constraint::nonnegative,
                            "0,0.002,0.004,0.006,0.008,0.011", {}, "expansion times"},
                           {"kick_type", Type::choice, Dimension::none, Constraint::any, "harmonic",
                            {"harmonic", "quadrupole"}, "matched kick model"},
                           {"duration_fraction", Type::real, Dimension::none, Constraint::positive, "0.01", {},
                            "harmonic t_k / t_f"},
                           {"t_k", Type::real, Dimension::time, Constraint::positive, "0.003", {},
                            "quadrupole kick duration"},
                           {"strengths", Type::real_list, Dimension::velocity, Constraint::nonnegative,
                            "0.01,0.015,0.02,0.025,0.03,0.035", {}, "quadrupole strengths tried per t_f"},
                           {"gravity", Type::boolean, Dimension::none, Constraint::any, "false", {}, "gravity"},
                           {"axis", Type::integer, Dimension::none, Constraint::any, "2", {}, "reported axis"},
                           {"n_atoms", Type::integer, Dimension::none, Constraint::positive, "20000", {},
                            "atoms per point"}});
        case ExperimentKind::multispin:
            return append(append(ensemble_keys("7.5e-6", "0.00025"), kick_keys()),
                          {{"spin_weights", Type::real_list, Dimension::none, Constraint::nonnegative, "1,1,1,1,1,1,1",
                            {}, "weights of m_F = -F..F"},
                           {"spin_correlation", Type::real, Dimension::none, Constraint::any, "0", {},
                            "spin-radius rank correlation"},
                           {"profile_delay", Type::real, Dimension::time, Constraint::nonnegative, "0.01", {},
                            "delay of the composite profile"},
                           {"bins", Type::integer, Dimension::none, Constraint::positive, "128", {}, "profile bins"},
                           {"gravity", Type::boolean, Dimension::none, Constraint::any, "false", {}, "gravity"},
                           {"tof_delays", Type::real_list, Dimension::time, Constraint::nonnegative, "", {},
                            "time-of-flight delays after the kick"}});
        case ExperimentKind::coil_field:
            return {{"coil_current", Type::real, Dimension::current, Constraint::any, "18", {}, "coil current"},
                    {"coil_polarity", Type::choice, Dimension::none, Constraint::any, "opposed", {"opposed", "aligned"},
                     "current sense"},
                    {"coil_radius", Type::real, Dimension::length, Constraint::positive, "0.04", {}, "loop radius"},
                    {"coil_separation", Type::real, Dimension::length, Constraint::positive, "0.08", {},
                     "loop separation"},
                    {"coil_turns", Type::integer, Dimension::none, Constraint::positive, "200", {}, "turns per loop"},
                    {"z_min", Type::real, Dimension::length, Constraint::any, "-0.02", {}, "profile start"},
                    {"z_max", Type::real, Dimension::length, Constraint::any, "0.02", {}, "profile end"},
                    {"points", Type::integer, Dimension::none, Constraint::positive, "81", {}, "profile points"}};
        case ExperimentKind::qm_sweep:
            return detail::sweep_keys();
        case ExperimentKind::qm_depth_scan:
            return append(detail::sweep_keys(),
                          {{"depths", Type::real_list, Dimension::temperature, Constraint::nonnegative,
                            "1e-7,2e-7,3e-7,4e-7,5e-7,6e-7,7e-7,8e-7", {}, "barrier heights U0/k_B"}});
        case ExperimentKind::qm_decay:
            return {{"trap_slope", Type::real, Dimension::slope, Constraint::nonnegative, "0.03", {}, "V-trap slope"},
                    {"barrier_height", Type::real, Dimension::temperature, Constraint::nonnegative, "2.67e-7", {},
                     "barrier height U0/k_B"},
                    {"barrier_waist", Type::real, Dimension::length, Constraint::positive, "1e-5", {},
                     "1/e^2 intensity radius"},
                    {"barrier_center", Type::real, Dimension::length, Constraint::any, "0.0001", {}, "barrier position"},
                    {"dt", Type::real, Dimension::time, Constraint::positive, "5e-7", {}, "time step"},
                    {"horizon", Type::real, Dimension::time, Constraint::positive, "0.3", {}, "evolution time"},
                    {"sample_interval", Type::real, Dimension::time, Constraint::positive, "0.001", {},
                     "survival sampling"},
                    {"transient_fraction", Type::real, Dimension::none, Constraint::nonnegative, "0.1", {},
                     "excluded start of the fit window"},
                    {"absorber_rate", Type::real, Dimension::rate, Constraint::nonnegative, "30000", {},
                     "absorber strength"}};
    }
    return {};
}

}  // namespace config

struct ConfigIssue {
    int line = 0;  // 0 when not tied to a line
    std::string key;
    std::string message;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues)
        : std::runtime_error(summary(issues)), issues_(std::move(issues)) {}
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    static std::string summary(const std::vector<ConfigIssue>& issues) {
        std::string s = std::to_string(issues.size()) + " config error(s)";
        for (const auto& i : issues) {
            s += "; ";
            if (i.line > 0) s += "line " + std::to_string(i.line) + ": ";
            if (!i.key.empty()) s += i.key + ": ";
            s += i.message;
        }
        return s;
    }
    std::vector<ConfigIssue> issues_;
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::kick;
    std::map<std::string, config::Value> params;  // SI values keyed by name without suffix
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    bool operator==(const RunConfig& o) const {
        return kind == o.kind && params == o.params && seed == o.seed && output_dir == o.output_dir;
    }

    double real(const std::string& k) const { return std::get<double>(params.at(k)); }
    long long integer(const std::string& k) const { return std::get<long long>(params.at(k)); }
    bool flag(const std::string& k) const { return std::get<bool>(params.at(k)); }
    const std::string& choice(const std::string& k) const { return std::get<std::string>(params.at(k)); }
    const std::vector<double>& list(const std::string& k) const { return std::get<std::vector<double>>(params.at(k)); }
};

namespace config::detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_real(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto [p, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_integer(const std::string& s) {
    std::string t = trim(s);
    long long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc() && p == t.data() + t.size() && !t.empty()) return v;
    auto r = parse_real(t);  // 1e5 style
    if (r && *r == std::floor(*r) && std::abs(*r) < 9e18) return static_cast<long long>(*r);
    return std::nullopt;
}

/// Splits key into (base, unit) using the dimension table of the schema entry with that base.
struct KeyMatch {
    const KeySpec* spec = nullptr;
    const Unit* unit = nullptr;
    std::string problem;
};

inline KeyMatch match_key(const std::string& key, const std::vector<KeySpec>& keys) {
    KeyMatch best;
    for (const auto& k : keys) {
        if (key == k.name) {
            KeyMatch m;
            m.spec = &k;
            if (k.dim != Dimension::none)
                m.problem = "missing unit suffix (e.g. " + k.name + "_" + units(k.dim).front().suffix + ")";
            return m;
        }
    }
    for (const auto& k : keys) {
        if (k.dim == Dimension::none) continue;
        if (key.size() <= k.name.size() + 1 || key.compare(0, k.name.size() + 1, k.name + "_") != 0) continue;
        std::string suffix = key.substr(k.name.size() + 1);
        for (const auto& u : units(k.dim)) {
            if (suffix == u.suffix) {
                KeyMatch m;
                m.spec = &k;
                m.unit = &u;
                return m;
            }
        }
        if (best.spec && best.spec->name.size() >= k.name.size()) continue;
        std::string allowed;
        for (const auto& u : units(k.dim)) allowed += (allowed.empty() ? "" : ", ") + std::string(u.suffix);
        best.spec = &k;
        best.problem = "unit mismatch: '" + suffix + "' is not a unit of " + k.name + " (allowed: " + allowed + ")";
    }
    return best;
}

inline std::optional<Value> convert(const KeySpec& k, const std::string& text, double scale, std::string& err) {
    auto check = [&](double v) {
        if (k.constraint == Constraint::positive && !(v > 0.0)) {
            err = "must be > 0 (got " + trim(text) + ")";
            return false;
        }
        if (k.constraint == Constraint::nonnegative && !(v >= 0.0)) {
            err = "must be >= 0 (got " + trim(text) + ")";
            return false;
        }
        return true;
    };
    switch (k.type) {
        case Type::real: {
            auto v = parse_real(text);
            if (!v) {
                err = "not a number: '" + trim(text) + "'";
                return std::nullopt;
            }
            if (!check(*v)) return std::nullopt;
            return Value{*v * scale};
        }
        case Type::integer: {
            auto v = parse_integer(text);
            if (!v) {
                err = "not an integer: '" + trim(text) + "'";
                return std::nullopt;
            }
            if (!check(static_cast<double>(*v))) return std::nullopt;
            return Value{*v};
        }
        case Type::boolean: {
            std::string t = trim(text);
            if (t == "true" || t == "1" || t == "yes" || t == "on") return Value{true};
            if (t == "false" || t == "0" || t == "no" || t == "off") return Value{false};
            err = "not a boolean: '" + t + "'";
            return std::nullopt;
        }
        case Type::choice: {
            std::string t = trim(text);
            if (std::find(k.choices.begin(), k.choices.end(), t) != k.choices.end()) return Value{t};
            std::string allowed;
            for (const auto& c : k.choices) allowed += (allowed.empty() ? "" : ", ") + c;
            err = "'" + t + "' is not one of " + allowed;
            return std::nullopt;
        }
        case Type::real_list: {
            std::vector<double> out;
            std::string t = trim(text);
            if (t.empty()) return Value{out};
            std::stringstream ss(t);
            std::string item;
            while (std::getline(ss, item, ',')) {
                auto v = parse_real(item);
                if (!v) {
                    err = "not a number in list: '" + trim(item) + "'";
                    return std::nullopt;
                }
                if (!check(*v)) return std::nullopt;
                out.push_back(*v * scale);
            }
            return Value{out};
        }
    }
    return std::nullopt;
}

}  // namespace config::detail

/// Parses flat `key = value` text. `experiment` selects the kind unless forced by the caller; all problems
/// are collected and thrown together as ConfigError.
inline RunConfig parse_config(const std::string& text, std::optional<ExperimentKind> forced = std::nullopt) {
    using namespace config;
    using namespace config::detail;
    std::vector<ConfigIssue> issues;
    struct Entry {
        int line;
        std::string key, value;
    };
    std::vector<Entry> entries;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            issues.push_back({line_no, "", "expected 'key = value'"});
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            issues.push_back({line_no, "", "empty key"});
            continue;
        }
        entries.push_back({line_no, key, trim(line.substr(eq + 1))});
    }
    RunConfig cfg;
    std::optional<ExperimentKind> kind = forced;
    std::map<std::string, int> seen;
    for (const auto& e : entries) {
        if (seen.count(e.key)) {
            issues.push_back({e.line, e.key, "duplicate key (first on line " + std::to_string(seen[e.key]) + ")"});
            continue;
        }
        seen[e.key] = e.line;
        if (e.key == "experiment") {
            auto k = experiment_from_string(e.value);
            if (!k) {
                issues.push_back({e.line, e.key, "unknown experiment '" + e.value + "'"});
            } else if (forced && *k != *forced) {
                issues.push_back({e.line, e.key, "config is for '" + e.value + "' but '" + to_string(*forced) +
                                                     "' was requested"});
            } else {
                kind = k;
            }
        }
    }
    if (!kind) {
        if (!seen.count("experiment")) issues.push_back({0, "experiment", "missing required key"});
        throw ConfigError(issues);
    }
    cfg.kind = *kind;
    auto keys = schema(*kind);
    std::map<std::string, int> assigned;
    for (const auto& e : entries) {
        if (e.key == "experiment") continue;
        if (seen.at(e.key) != e.line) continue;
        if (e.key == "seed") {
            std::uint64_t v = 0;
            auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
            if (ec != std::errc() || p != e.value.data() + e.value.size())
                issues.push_back({e.line, e.key, "not an unsigned 64-bit integer: '" + e.value + "'"});
            else
                cfg.seed = v;
            continue;
        }
        auto m = match_key(e.key, keys);
        if (!m.spec) {
            issues.push_back({e.line, e.key, "unknown key for experiment '" + to_string(*kind) + "'"});
            continue;
        }
        if (!m.problem.empty()) {
            issues.push_back({e.line, e.key, m.problem});
            continue;
        }
        if (assigned.count(m.spec->name)) {
            issues.push_back({e.line, e.key, m.spec->name + " already set on line " + std::to_string(assigned[m.spec->name])});
            continue;
        }
        assigned[m.spec->name] = e.line;
        std::string err;
        auto v = convert(*m.spec, e.value, m.unit ? m.unit->scale : 1.0, err);
        if (!v)
            issues.push_back({e.line, e.key, err});
        else
            cfg.params[m.spec->name] = *v;
    }
    for (const auto& k : keys) {
        if (cfg.params.count(k.name) || assigned.count(k.name)) continue;
        if (k.default_text.empty() && k.type != Type::real_list) {
            issues.push_back({0, k.name, "missing required key"});
            continue;
        }
        std::string err;
        auto v = convert(k, k.default_text, 1.0, err);
        if (!v) throw std::logic_error("bad default for " + k.name + ": " + err);
        cfg.params[k.name] = *v;
    }
    if (!issues.empty()) throw ConfigError(issues);
    return cfg;
}

/// Canonical text with SI unit suffixes; parse_config(serialize_config(c)) == c up to output_dir.
inline std::string serialize_config(const RunConfig& cfg) {
    using namespace config;
    std::string out = "experiment = " + to_string(cfg.kind) + "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    for (const auto& k : schema(cfg.kind)) {
        auto it = cfg.params.find(k.name);
        if (it == cfg.params.end()) continue;
        std::string key = k.name;
        if (k.dim != Dimension::none) key += std::string("_") + units(k.dim).front().suffix;
        std::string value = std::visit(
            [](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>) {
                    return format_number(v);
                } else if constexpr (std::is_same_v<T, long long>) {
                    return std::to_string(v);
                } else if constexpr (std::is_same_v<T, bool>) {
                    return v ? "true" : "false";
                } else if constexpr (std::is_same_v<T, std::string>) {
                    return v;
                } else {
                    std::string s;
                    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
                    return s;
                }
            },
            it->second);
        out += key + " = " + value + "\n";
    }
    return out;
}

}  // namespace dkick
