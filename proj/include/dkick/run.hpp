#pragma once

#include <fftw3.h>
#include <lapacke.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "constants.hpp"
#include "csv.hpp"
#include "ensemble.hpp"
#include "fields.hpp"
#include "parallel.hpp"
#include "protocols.hpp"
#include "quantum/selection.hpp"
#include "tof.hpp"

namespace dkick {

inline constexpr const char* version = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_runtime = 3 };

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

namespace run_detail {

class Outputs {
public:
    explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    template <class Fn>
    void write(const std::string& name, Fn&& fill) {
        std::ostringstream os;
        fill(os);
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
        f << os.str();
        files_.emplace_back(name, sha256_hex(os.str()));
    }

    const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

inline ThermalSpec thermal_spec(const RunConfig& c) {
    return ThermalSpec::isotropic(c.real("temperature"), c.real("rms_radius"), {{static_cast<int>(c.integer("m_F")), 1.0}});
}

inline FieldConfiguration kick_field(const RunConfig& c, const AtomSpecies& species) {
    const auto& kind = c.choice("kick_field");
    if (kind == "harmonic") return FieldConfiguration({IdealHarmonic{c.real("curvature"), c.real("bias")}});
    if (kind == "coil") {
        auto pol = c.choice("coil_polarity") == "aligned" ? Polarity::aligned : Polarity::opposed;
        return FieldConfiguration({CoilPair::standard_coil(c.real("coil_current"), pol)});
    }
    FieldConfiguration tmpl({IdealQuadrupole{1.0}});
    double dv = c.real("kick_dv");
    if (dv == 0.0) return tmpl.scaled(0.0);
    return field_for_kick_strength(tmpl, dv, c.real("t_k"), species);
}

inline KickSchedule schedule(const RunConfig& c, const AtomSpecies& species) {
    KickSchedule s;
    s.expansion_time = c.real("t_f");
    s.kick_duration = c.real("t_k");
    s.field = kick_field(c, species);
    s.post_expansion_times = c.list("tof_delays");
    s.axis = static_cast<int>(c.integer("axis"));
    return s;
}

inline void check_axis(const RunConfig& c) {
    long long a = c.integer("axis");
    if (a < 0 || a > 2) throw ConfigError({{0, "axis", "must be 0, 1 or 2"}});
}

inline void write_fit(std::ostream& os, const ExperimentResult& r) {
    CsvWriter w(os, {"axis", "T", "T_err", "sigma0", "sigma0_err", "upper_limit", "T_upper"});
    if (r.has_fit)
        w.row(r.axis, r.fit.temperature, r.fit.temperature_err, r.fit.sigma0, r.fit.sigma0_err,
              r.fit.upper_limit ? 1 : 0, r.fit.temperature_upper);
}

inline void run_kick(const RunConfig& c, Outputs& out) {
    check_axis(c);
    auto species = AtomSpecies::rubidium85();
    auto s = schedule(c, species);
    auto r = run_kick_experiment(thermal_spec(c), s, c.flag("gravity"), static_cast<std::size_t>(c.integer("n_atoms")),
                                 c.seed, species);
    out.write("result.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"axis", "T_before", "T_after", "ratio", "sigma_before", "sigma_at_kick", "sigma_after"});
        for (int a = 0; a < 3; ++a)
            w.row(a, r.temperature_before[a], r.temperature_after[a], r.cooling_ratio[a], r.size_before[a],
                  r.size_at_kick[a], r.size_after[a]);
    });
    out.write("expansion.csv", [&](std::ostream& os) { write_curve_csv(os, r.expansion_curve); });
    out.write("fit.csv", [&](std::ostream& os) { write_fit(os, r); });
}

inline void run_scan_strength(const RunConfig& c, Outputs& out) {
    check_axis(c);
    auto species = AtomSpecies::rubidium85();
    auto s = schedule(c, species);
    const auto& kind = c.choice("kick_field");
    if (kind == "quadrupole") s.field = FieldConfiguration({IdealQuadrupole{1.0}});
    if (c.list("strengths").empty()) throw ConfigError({{0, "strengths", "must not be empty"}});
    auto scan = scan_kick_strength(thermal_spec(c), s, c.list("strengths"), c.flag("gravity"),
                                   static_cast<std::size_t>(c.integer("n_atoms")), c.seed, species);
    out.write("result.csv", [&](std::ostream& os) { write_scan_csv(os, scan); });
}

inline void run_scan_expansion(const RunConfig& c, Outputs& out) {
    check_axis(c);
    if (c.list("t_f_list").empty()) throw ConfigError({{0, "t_f_list", "must not be empty"}});
    MatchedKick k;
    k.kind = c.choice("kick_type") == "quadrupole" ? KickKind::quadrupole : KickKind::harmonic;
    k.duration_fraction = c.real("duration_fraction");
    k.quadrupole_duration = c.real("t_k");
    k.strengths = c.list("strengths");
    k.gravity = c.flag("gravity");
    k.axis = static_cast<int>(c.integer("axis"));
    if (k.kind == KickKind::quadrupole && k.strengths.empty())
        throw ConfigError({{0, "strengths", "must not be empty for quadrupole kicks"}});
    auto pts = scan_expansion_ratio(thermal_spec(c), c.list("t_f_list"), k,
                                    static_cast<std::size_t>(c.integer("n_atoms")), c.seed);
    out.write("result.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"t_f", "expansion_ratio", "ratio", "predicted_ratio", "best_strength"});
        for (const auto& p : pts)
            w.row(p.expansion_time, p.expansion_ratio, p.result.cooling_ratio[k.axis], p.predicted_ratio,
                  p.best_strength);
    });
}

inline void run_multispin(const RunConfig& c, Outputs& out) {
    check_axis(c);
    auto species = AtomSpecies::rubidium85();
    const auto& weights = c.list("spin_weights");
    std::size_t states = static_cast<std::size_t>(2 * species.f_ground() + 1);
    if (weights.size() != states)
        throw ConfigError({{0, "spin_weights", "needs " + std::to_string(states) + " entries (m_F = -F..F)"}});
    double rho = c.real("spin_correlation");
    if (!(rho >= -1.0 && rho <= 1.0)) throw ConfigError({{0, "spin_correlation", "must lie in [-1, 1]"}});
    ThermalSpec spec = ThermalSpec::isotropic(c.real("temperature"), c.real("rms_radius"));
    spec.spin_populations.clear();
    for (std::size_t i = 0; i < states; ++i) spec.spin_populations[static_cast<int>(i) - species.f_ground()] = weights[i];
    spec.spin_position_correlation = rho;
    auto s = schedule(c, species);
    auto r = molasses_multispin_experiment(spec, s, static_cast<std::size_t>(c.integer("n_atoms")), c.seed,
                                           c.real("profile_delay"), static_cast<int>(c.integer("bins")),
                                           c.flag("gravity"), species);
    int a = s.axis;
    out.write("result.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"m_F", "count", "T_before", "T_after", "ratio"});
        for (const auto& [m, sr] : r.per_spin) {
            double ratio = sr.temperature_before[a] > 0.0 ? sr.temperature_after[a] / sr.temperature_before[a] : 0.0;
            w.row(m, sr.count, sr.temperature_before[a], sr.temperature_after[a], ratio);
        }
    });
    out.write("profile.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"x", "density"});
        for (std::size_t i = 0; i < r.profile.x.size(); ++i) w.row(r.profile.x[i], r.profile.y[i]);
    });
    out.write("bimodal.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"narrow_weight", "narrow_width", "broad_weight", "broad_width", "center", "unimodal"});
        const auto& b = r.bimodal;
        w.row(b.narrow.weight, b.narrow.width, b.broad.weight, b.broad.width, b.center, b.unimodal ? 1 : 0);
    });
}

inline void run_coil_field(const RunConfig& c, Outputs& out) {
    auto pol = c.choice("coil_polarity") == "aligned" ? Polarity::aligned : Polarity::opposed;
    CoilPair pair(c.real("coil_radius"), c.real("coil_separation") / 2.0, static_cast<int>(c.integer("coil_turns")),
                  c.real("coil_current"), pol);
    FieldConfiguration field({pair});
    long long n = c.integer("points");
    double z0 = c.real("z_min"), z1 = c.real("z_max");
    if (n < 2 || !(z1 > z0)) throw ConfigError({{0, "points", "need points >= 2 and z_max > z_min"}});
    out.write("result.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"z", "Bz", "dBz_dz", "d2Bz_dz2"});
        for (long long i = 0; i < n; ++i) {
            double z = z0 + (z1 - z0) * static_cast<double>(i) / static_cast<double>(n - 1);
            auto d = pair.axial_derivatives(z);
            w.row(z, d[0], d[1], d[2]);
        }
    });
    out.write("summary.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"B0", "gradient", "curvature"});
        auto d = pair.axial_derivatives(0.0);
        w.row(d[0], axial_gradient(field, 0.0), axial_curvature(field, 0.0));
    });
}

inline quantum::SweepConfig sweep_config(const RunConfig& c) {
    quantum::SweepConfig s;
    s.temperature = c.real("temperature");
    s.v_slope = c.real("trap_slope") * constants.k_boltzmann;
    s.barrier_height = c.real("barrier_height") * constants.k_boltzmann;
    s.barrier_waist = c.real("barrier_waist");
    s.x_start = c.real("x_start");
    s.x_stop = c.real("x_stop");
    s.speed = c.real("speed");
    if (!(c.real("grid_max") > c.real("grid_min")))
        throw ConfigError({{0, "grid_max", "must exceed grid_min"}});
    if (c.integer("grid_points") < 64) throw ConfigError({{0, "grid_points", "must be >= 64"}});
    s.grid = quantum::Grid1D(c.real("grid_min"), c.real("grid_max"), static_cast<std::size_t>(c.integer("grid_points")));
    s.dt = c.real("dt");
    s.weight_tolerance = c.real("weight_tolerance");
    s.series_points = static_cast<std::size_t>(c.integer("series_points"));
    s.propagator.absorber_fraction = c.real("absorber_fraction");
    s.propagator.absorber_rate = c.real("absorber_rate");
    if (!(s.propagator.absorber_fraction < 0.5))
        throw ConfigError({{0, "absorber_fraction", "must be < 0.5"}});
    return s;
}

inline double to_nK(double joules) { return joules / constants.k_boltzmann * 1e9; }

inline void run_qm_sweep(const RunConfig& c, Outputs& out) {
    auto r = quantum::sweep_transfer(sweep_config(c));
    out.write("result.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"transfer", "bound_states", "lowest_state_nK", "well_depth_nK", "classical_estimate",
                         "basis_size", "neglected_weight", "partition_grid", "partition_continuum", "absorbed"});
        w.row(r.transfer, r.bound_states, to_nK(r.lowest_state_energy), to_nK(r.well_depth), r.classical_estimate,
              r.basis_size, r.neglected_weight, r.partition_grid, r.partition_continuum, r.absorbed);
    });
    out.write("populations.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"state", "energy_nK", "population"});
        for (std::size_t i = 0; i < r.bound_populations.size(); ++i)
            w.row(i, to_nK(r.bound_energies[i]), r.bound_populations[i]);
    });
    if (!r.series.empty()) out.write("series.csv", [&](std::ostream& os) { quantum::write_series_csv(os, r.series); });
}

inline void run_qm_depth_scan(const RunConfig& c, Outputs& out) {
    auto base = sweep_config(c);
    std::vector<double> depths;
    for (double d : c.list("depths")) depths.push_back(d * constants.k_boltzmann);
    if (depths.empty()) throw ConfigError({{0, "depths", "must not be empty"}});
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (!(depths[i] > depths[i - 1])) throw ConfigError({{0, "depths", "must ascend"}});
    auto pts = quantum::transfer_vs_depth(depths, base);
    out.write("transfer_vs_depth.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"depth_nK", "transfer", "bound_states"});
        for (const auto& p : pts) w.row(std::round(to_nK(p.depth) * 1e6) / 1e6, p.transfer, p.bound_states);
    });
}

inline void run_qm_decay(const RunConfig& c, Outputs& out) {
    quantum::DecayConfig d;
    d.v_slope = c.real("trap_slope") * constants.k_boltzmann;
    d.barrier_height = c.real("barrier_height") * constants.k_boltzmann;
    d.barrier_waist = c.real("barrier_waist");
    d.barrier_center = c.real("barrier_center");
    d.dt = c.real("dt");
    d.horizon = c.real("horizon");
    d.sample_interval = c.real("sample_interval");
    d.transient_fraction = c.real("transient_fraction");
    if (!(d.transient_fraction < 1.0)) throw ConfigError({{0, "transient_fraction", "must be < 1"}});
    d.propagator.absorber_rate = c.real("absorber_rate");
    auto r = quantum::tunneling_decay(d);
    out.write("result.csv", [&](std::ostream& os) {
        CsvWriter w(os, {"rate", "secular_period", "per_period_loss", "lifetime", "well_depth_nK", "bound_states"});
        w.row(r.rate, r.secular_period, r.per_period_loss, r.lifetime, to_nK(r.well_depth), r.bound_states);
    });
    out.write("survival.csv", [&](std::ostream& os) { quantum::write_series_csv(os, r.survival); });
}

}  // namespace run_detail

inline nlohmann::ordered_json library_versions() {
    nlohmann::ordered_json v;
    v["dkick"] = version;
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                 std::to_string(BOOST_VERSION % 100);
    v["fftw"] = std::string(fftw_version);
    lapack_int major = 0, minor = 0, patch = 0;
    LAPACKE_ilaver(&major, &minor, &patch);
    v["lapack"] = std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
    v["openssl"] = OPENSSL_VERSION_TEXT;
    v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                         "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    v["compiler"] = __VERSION__;
    return v;
}

/// Runs the experiment, writing its CSV files and manifest.json into cfg.output_dir. Returns the file names.
inline std::vector<std::string> run(const RunConfig& cfg) {
    run_detail::Outputs out(cfg.output_dir);
    switch (cfg.kind) {
        case ExperimentKind::kick: run_detail::run_kick(cfg, out); break;
        case ExperimentKind::scan_strength: run_detail::run_scan_strength(cfg, out); break;
        case ExperimentKind::scan_expansion: run_detail::run_scan_expansion(cfg, out); break;
        case ExperimentKind::multispin: run_detail::run_multispin(cfg, out); break;
        case ExperimentKind::coil_field: run_detail::run_coil_field(cfg, out); break;
        case ExperimentKind::qm_sweep: run_detail::run_qm_sweep(cfg, out); break;
        case ExperimentKind::qm_depth_scan: run_detail::run_qm_depth_scan(cfg, out); break;
        case ExperimentKind::qm_decay: run_detail::run_qm_decay(cfg, out); break;
    }
    std::string canonical = serialize_config(cfg);
    nlohmann::ordered_json m;
    m["experiment"] = to_string(cfg.kind);
    m["seed"] = cfg.seed;
    m["config_sha256"] = sha256_hex(canonical);
    m["config"] = canonical;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    std::vector<std::string> names;
    for (const auto& [name, hash] : out.files()) {
        files.push_back({{"name", name}, {"sha256", hash}});
        names.push_back(name);
    }
    m["outputs"] = files;
    m["versions"] = library_versions();
    std::ofstream f(out.dir() / "manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
    names.push_back("manifest.json");
    return names;
}

/// Machine-readable error record.
inline nlohmann::ordered_json error_record(int code, const std::string& message,
                                           const std::vector<ConfigIssue>& issues = {}) {
    nlohmann::ordered_json e;
    e["status"] = "error";
    e["exit_code"] = code;
    e["category"] = code == exit_config ? "config" : "runtime";
    e["message"] = message;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& i : issues) list.push_back({{"line", i.line}, {"key", i.key}, {"message", i.message}});
    e["issues"] = list;
    return e;
}

}  // namespace dkick
