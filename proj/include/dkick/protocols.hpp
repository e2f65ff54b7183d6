#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "constants.hpp"
#include "csv.hpp"
#include "ensemble.hpp"
#include "fields.hpp"
#include "random.hpp"
#include "tof.hpp"

namespace dkick {

/// t_k with t_f t_k = 1/omega^2.
inline double optimal_harmonic_duration(double omega, double t_f) {
    if (!(omega > 0.0) || !(t_f > 0.0)) throw std::domain_error("optimal_harmonic_duration: inputs must be > 0");
    return 1.0 / (omega * omega * t_f);
}

/// (r0/r_f)^2 with r_f^2 = r0^2 + (v0 t_f)^2.
inline double predicted_cooling_ratio(double r0, double v0, double t_f) {
    if (!(r0 > 0.0) || !(v0 >= 0.0) || !(t_f >= 0.0)) throw std::domain_error("predicted_cooling_ratio: bad inputs");
    double vt = v0 * t_f;
    return r0 * r0 / (r0 * r0 + vt * vt);
}

/// 1D point-source optimum: the Gaussian mean speed sqrt(2/pi) v_rms.
inline double optimal_quadrupole_kick(double v_rms) {
    if (!(v_rms > 0.0)) throw std::domain_error("optimal_quadrupole_kick: v_rms must be > 0");
    return std::sqrt(2.0 / std::numbers::pi) * v_rms;
}

/// Minimum <KE> ratio 1 - 2/pi of a 1D point source after the optimal constant-magnitude kick.
inline double quadrupole_ke_ratio() { return 1.0 - 2.0 / std::numbers::pi; }

/// Ratio <KE_after>/<KE_before> for a 1D point source kicked by dv toward v = 0 (v -> v - dv sign v).
inline double quadrupole_ke_ratio(double dv, double v_rms) {
    if (!(v_rms > 0.0)) throw std::domain_error("quadrupole_ke_ratio: v_rms must be > 0");
    double u = dv / v_rms;
    return 1.0 - 2.0 * std::sqrt(2.0 / std::numbers::pi) * u + u * u;
}

/// (sqrt(N) tau0, N tau0): kick time vs adiabatic-expansion time for the same cooling factor.
inline std::pair<double, double> adiabatic_time_comparison(double cooling_factor, double tau0) {
    if (!(cooling_factor >= 1.0) || !(tau0 > 0.0)) throw std::domain_error("adiabatic_time_comparison: bad inputs");
    return {std::sqrt(cooling_factor) * tau0, cooling_factor * tau0};
}

struct KickSchedule {
    double expansion_time = 0.0;  // t_f
    double kick_duration = 0.0;   // t_k
    FieldConfiguration field;
    std::vector<double> post_expansion_times;
    double step = 0.0;  // 0 selects the default leapfrog step
    int axis = 2;       // axis reported in scans and fits

    void validate() const {
        if (!(expansion_time >= 0.0)) throw std::domain_error("KickSchedule: t_f must be >= 0");
        if (!(kick_duration > 0.0)) throw std::domain_error("KickSchedule: t_k must be > 0");
        for (std::size_t i = 1; i < post_expansion_times.size(); ++i)
            if (!(post_expansion_times[i] > post_expansion_times[i - 1]))
                throw std::domain_error("KickSchedule: post_expansion_times must increase");
        if (axis < 0 || axis > 2) throw std::domain_error("KickSchedule: axis must be 0, 1 or 2");
    }
};

struct ExperimentResult {
    std::array<double, 3> temperature_before{};
    std::array<double, 3> temperature_after{};
    std::array<double, 3> size_before{};
    std::array<double, 3> size_at_kick{};
    std::array<double, 3> size_after{};
    std::array<double, 3> cooling_ratio{};
    int axis = 2;
    ExpansionCurve expansion_curve;  // along axis, empty if fewer than 3 delays
    TemperatureFit fit;              // TOF fit of expansion_curve
    bool has_fit = false;
    double node_fraction = 0.0;
    double param = 0.0;  // scan parameter, set by scan drivers
};

/// On-axis speed change for an m_F = 3 atom, per unit of the template's strength.
inline double kick_velocity(const FieldConfiguration& field, double t_k, const AtomSpecies& species) {
    double g = std::abs(axial_gradient(field, 0.0));
    return species.moment(species.f_ground()) * g * t_k / species.mass();
}

/// Scales a gradient-type template so an on-axis m_F = F atom receives speed change dv over t_k.
inline FieldConfiguration field_for_kick_strength(const FieldConfiguration& tmpl, double dv, double t_k,
                                                  const AtomSpecies& species) {
    double unit = kick_velocity(tmpl, t_k, species);
    if (!(unit > 0.0)) throw std::domain_error("field_for_kick_strength: template has no gradient at the origin");
    return tmpl.scaled(dv / unit);
}

namespace detail {

inline ExperimentResult measure(const Ensemble& initial, const Ensemble& expanded, const Ensemble& kicked,
                                const KickSchedule& schedule) {
    ExperimentResult r;
    r.axis = schedule.axis;
    for (int a = 0; a < 3; ++a) {
        r.temperature_before[a] = temperature(initial, a);
        r.temperature_after[a] = temperature(kicked, a);
        r.size_before[a] = cloud_size(initial, a);
        r.size_at_kick[a] = cloud_size(expanded, a);
        r.size_after[a] = cloud_size(kicked, a);
        r.cooling_ratio[a] = r.temperature_before[a] > 0.0 ? r.temperature_after[a] / r.temperature_before[a] : 1.0;
    }
    if (schedule.post_expansion_times.size() >= 3) {
        r.expansion_curve = expansion_curve(kicked, schedule.post_expansion_times, schedule.axis);
        r.fit = fit_temperature(r.expansion_curve, kicked.species);
        r.has_fit = true;
    }
    std::size_t flagged = 0;
    for (const auto& a : kicked.atoms) flagged += a.node_touched ? 1 : 0;
    r.node_fraction = static_cast<double>(flagged) / static_cast<double>(kicked.atoms.size());
    return r;
}

}  // namespace detail

/// Sample, expand for t_f, kick for t_k, then measure.
inline ExperimentResult run_kick_experiment(const ThermalSpec& spec, const KickSchedule& schedule, bool gravity,
                                            std::size_t n, std::uint64_t seed,
                                            const AtomSpecies& species = AtomSpecies::rubidium85()) {
    schedule.validate();
    if (n < 3) throw std::domain_error("run_kick_experiment: n must be >= 3");
    FieldConfiguration field = schedule.field;
    field.gravity_enabled = gravity;
    Ensemble initial = sample_ensemble(spec, n, species, seed);
    Ensemble expanded = free_expansion(initial, schedule.expansion_time, gravity, field.vertical_axis);
    Ensemble kicked = apply_kick(expanded, field, schedule.kick_duration, schedule.step);
    return detail::measure(initial, expanded, kicked, schedule);
}

/// One experiment per kick strength dv (m_F = F on-axis speed change). Point i uses seed derive_seed(seed, i).
inline std::vector<ExperimentResult> scan_kick_strength(const ThermalSpec& spec, const KickSchedule& tmpl,
                                                        const std::vector<double>& strengths, bool gravity,
                                                        std::size_t n, std::uint64_t seed,
                                                        const AtomSpecies& species = AtomSpecies::rubidium85()) {
    if (strengths.empty()) throw std::invalid_argument("scan_kick_strength: no strengths");
    std::vector<ExperimentResult> out;
    out.reserve(strengths.size());
    for (std::size_t i = 0; i < strengths.size(); ++i) {
        KickSchedule s = tmpl;
        s.field = strengths[i] == 0.0 ? tmpl.field.scaled(0.0)
                                      : field_for_kick_strength(tmpl.field, strengths[i], tmpl.kick_duration, species);
        auto r = run_kick_experiment(spec, s, gravity, n, derive_seed(seed, i), species);
        r.param = strengths[i];
        out.push_back(std::move(r));
    }
    return out;
}

/// Scan of kick durations t_k at fixed field strength.
inline std::vector<ExperimentResult> scan_kick_duration(const ThermalSpec& spec, const KickSchedule& tmpl,
                                                        const std::vector<double>& durations, bool gravity,
                                                        std::size_t n, std::uint64_t seed,
                                                        const AtomSpecies& species = AtomSpecies::rubidium85()) {
    std::vector<ExperimentResult> out;
    for (std::size_t i = 0; i < durations.size(); ++i) {
        KickSchedule s = tmpl;
        s.kick_duration = durations[i];
        auto r = run_kick_experiment(spec, s, gravity, n, derive_seed(seed, i), species);
        r.param = durations[i];
        out.push_back(std::move(r));
    }
    return out;
}

/// Index of the smallest cooling ratio along axis.
inline std::size_t best_index(const std::vector<ExperimentResult>& scan, int axis) {
    if (scan.empty()) throw std::invalid_argument("best_index: empty scan");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.size(); ++i)
        if (scan[i].cooling_ratio[axis] < scan[best].cooling_ratio[axis]) best = i;
    return best;
}

enum class KickKind { harmonic, quadrupole };

/// Matched-kick settings for scan_expansion_ratio.
struct MatchedKick {
    KickKind kind = KickKind::harmonic;
    /// harmonic: t_k = fraction * t_f, curvature set for the optimal linear kick
    double duration_fraction = 0.01;
    /// quadrupole: fixed t_k, dv re-optimized over `strengths`
    double quadrupole_duration = 3e-3;
    std::vector<double> strengths;
    FieldConfiguration quadrupole_template{{IdealQuadrupole{1.0}}};
    bool gravity = false;
    int axis = 2;
};

struct ExpansionPoint {
    double expansion_time = 0.0;
    double expansion_ratio = 0.0;  // measured r at kick / r0 along axis
    double predicted_ratio = 0.0;  // (r0/r_f)^2 from the measured sizes
    double best_strength = 0.0;
    ExperimentResult result;
};

/// Cooling ratio versus expansion ratio with the kick re-matched at each t_f.
inline std::vector<ExpansionPoint> scan_expansion_ratio(const ThermalSpec& spec, const std::vector<double>& t_f_list,
                                                        const MatchedKick& kick, std::size_t n, std::uint64_t seed,
                                                        const AtomSpecies& species = AtomSpecies::rubidium85()) {
    if (t_f_list.empty()) throw std::invalid_argument("scan_expansion_ratio: empty list");
    std::vector<ExpansionPoint> out;
    for (std::size_t i = 0; i < t_f_list.size(); ++i) {
        double t_f = t_f_list[i];
        std::uint64_t point_seed = derive_seed(seed, i);
        ExpansionPoint p;
        p.expansion_time = t_f;
        if (kick.kind == KickKind::harmonic) {
            KickSchedule s;
            s.axis = kick.axis;
            s.expansion_time = t_f;
            if (t_f > 0.0) {
                s.kick_duration = kick.duration_fraction * t_f;
                // optimal linear kick Cov(x, v)/Var(x), which tends to 1/t_f once v0 t_f >> r0
                double v2 = constants.k_boltzmann * spec.temperature[kick.axis] / species.mass();
                double r2 = spec.rms_radius[kick.axis] * spec.rms_radius[kick.axis];
                double kappa = v2 > 0.0 ? v2 * t_f / (r2 + v2 * t_f * t_f) : 1.0 / t_f;
                double omega2 = kappa / s.kick_duration;
                double curvature = species.mass() * omega2 / species.moment(species.f_ground());
                s.field = FieldConfiguration({IdealHarmonic{curvature, 0.0}});
            } else {
                s.kick_duration = 1e-6;
                s.field = FieldConfiguration({IdealHarmonic{0.0, 0.0}});
            }
            p.result = run_kick_experiment(spec, s, kick.gravity, n, point_seed, species);
        } else {
            KickSchedule s;
            s.axis = kick.axis;
            s.expansion_time = t_f;
            s.kick_duration = kick.quadrupole_duration;
            s.field = kick.quadrupole_template;
            auto scan = scan_kick_strength(spec, s, kick.strengths, kick.gravity, n, point_seed, species);
            std::size_t b = best_index(scan, kick.axis);
            p.best_strength = kick.strengths[b];
            p.result = scan[b];
        }
        int a = kick.axis;
        p.expansion_ratio = p.result.size_at_kick[a] / p.result.size_before[a];
        p.predicted_ratio = 1.0 / (p.expansion_ratio * p.expansion_ratio);
        p.result.param = t_f;
        out.push_back(std::move(p));
    }
    return out;
}

/// Keeps atoms whose magnetic force g_F m_F mu_B B' exceeds their weight.
inline Ensemble magnetic_trap_spin_filter(const Ensemble& e, double gradient) {
    if (!(gradient > 0.0)) throw std::domain_error("magnetic_trap_spin_filter: gradient must be > 0");
    Ensemble out = e;
    out.atoms.clear();
    double weight = e.species.mass() * constants.gravity_g;
    for (const auto& a : e.atoms)
        if (e.species.moment(a.m_f) * gradient > weight) out.atoms.push_back(a);
    return out;
}

struct SpinClassResult {
    std::size_t count = 0;
    std::array<double, 3> temperature_before{};
    std::array<double, 3> temperature_after{};
};

struct MultispinResult {
    std::map<int, SpinClassResult> per_spin;
    Profile profile;  // composite density along the schedule axis at profile_delay after the kick
    double profile_delay = 0.0;
    BimodalFit bimodal;
    ExperimentResult overall;
};

/// Kicks a multi-spin cloud; every atom moves in its own m_F potential. The composite profile is
/// taken profile_delay after the kick.
inline MultispinResult molasses_multispin_experiment(const ThermalSpec& spec, const KickSchedule& schedule,
                                                     std::size_t n, std::uint64_t seed, double profile_delay,
                                                     int bins = 128, bool gravity = false,
                                                     const AtomSpecies& species = AtomSpecies::rubidium85()) {
    schedule.validate();
    auto pops = spec.normalized_populations();
    int populated = 0;
    for (auto [m, w] : pops) populated += w > 0.0 ? 1 : 0;
    if (populated < 2) throw std::domain_error("molasses_multispin_experiment: need >= 2 populated spin states");
    FieldConfiguration field = schedule.field;
    field.gravity_enabled = gravity;
    Ensemble initial = sample_ensemble(spec, n, species, seed);
    Ensemble expanded = free_expansion(initial, schedule.expansion_time, gravity, field.vertical_axis);
    Ensemble kicked = apply_kick(expanded, field, schedule.kick_duration, schedule.step);
    MultispinResult out;
    out.overall = detail::measure(initial, expanded, kicked, schedule);
    for (auto [m, w] : pops) {
        Ensemble before = initial, after = kicked;
        before.atoms.clear();
        after.atoms.clear();
        for (std::size_t i = 0; i < initial.atoms.size(); ++i) {
            if (initial.atoms[i].m_f != m) continue;
            before.atoms.push_back(initial.atoms[i]);
            after.atoms.push_back(kicked.atoms[i]);
        }
        SpinClassResult r;
        r.count = before.atoms.size();
        if (r.count >= 2) {
            for (int a = 0; a < 3; ++a) {
                r.temperature_before[a] = temperature(before, a);
                r.temperature_after[a] = temperature(after, a);
            }
        }
        out.per_spin[m] = r;
    }
    Ensemble later = free_expansion(kicked, profile_delay, false);
    int axis = schedule.axis;
    double center = 0.0;
    for (const auto& a : later.atoms) center += a.position[axis];
    center /= static_cast<double>(later.atoms.size());
    double half = 4.0 * cloud_size(later, axis);
    out.profile_delay = profile_delay;
    out.profile = density_profile(later, axis, bins, half, center);
    out.bimodal = fit_bimodal(out.profile.x, out.profile.y);
    return out;
}

/// Scan CSV: param,T_before,T_after,ratio,sigma_before,sigma_after,fit_T,fit_err along each result's axis.
inline void write_scan_csv(std::ostream& os, const std::vector<ExperimentResult>& scan) {
    CsvWriter w(os, {"param", "T_before", "T_after", "ratio", "sigma_before", "sigma_after", "fit_T", "fit_err"});
    for (const auto& r : scan) {
        int a = r.axis;
        w.row(r.param, r.temperature_before[a], r.temperature_after[a], r.cooling_ratio[a], r.size_before[a],
              r.size_after[a], r.has_fit ? r.fit.temperature : 0.0, r.has_fit ? r.fit.temperature_err : 0.0);
    }
}

}  // namespace dkick
