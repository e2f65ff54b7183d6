#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "constants.hpp"
#include "csv.hpp"
#include "fields.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace dkick {

struct Atom {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    int m_f = 0;
    bool node_touched = false;
};

/// Separable Gaussian cloud description.
struct ThermalSpec {
    std::array<double, 3> temperature{};  // K per axis
    std::array<double, 3> rms_radius{};   // m per axis
    std::map<int, double> spin_populations{{0, 1.0}};
    double spin_position_correlation = 0.0;

    static ThermalSpec isotropic(double temperature, double rms_radius,
                                 std::map<int, double> spins = {{3, 1.0}}) {
        ThermalSpec s;
        s.temperature = {temperature, temperature, temperature};
        s.rms_radius = {rms_radius, rms_radius, rms_radius};
        s.spin_populations = std::move(spins);
        return s;
    }

    /// Throws on invalid fields; returns populations normalized to unit sum.
    std::map<int, double> normalized_populations() const {
        for (int a = 0; a < 3; ++a) {
            if (!(temperature[a] >= 0.0) || !std::isfinite(temperature[a]))
                throw std::domain_error("ThermalSpec: temperature must be >= 0");
            if (!(rms_radius[a] >= 0.0) || !std::isfinite(rms_radius[a]))
                throw std::domain_error("ThermalSpec: rms_radius must be >= 0");
        }
        if (!(spin_position_correlation >= -1.0 && spin_position_correlation <= 1.0))
            throw std::domain_error("ThermalSpec: correlation outside [-1, 1]");
        double total = 0.0;
        for (auto [m, w] : spin_populations) {
            if (!(w >= 0.0)) throw std::domain_error("ThermalSpec: negative spin weight");
            total += w;
        }
        if (!(total > 0.0)) throw std::domain_error("ThermalSpec: spin weights sum to zero");
        std::map<int, double> out;
        for (auto [m, w] : spin_populations) out[m] = w / total;
        return out;
    }
};

struct Ensemble {
    std::vector<Atom> atoms;
    AtomSpecies species = AtomSpecies::rubidium85();
    std::uint64_t seed = 0;
    double time = 0.0;

    std::size_t size() const { return atoms.size(); }
};

namespace detail {

inline int draw_spin(const std::map<int, double>& pops, double u) {
    double acc = 0.0;
    int last = pops.begin()->first;
    for (auto [m, w] : pops) {
        if (w <= 0.0) continue;
        acc += w;
        last = m;
        if (u < acc) return m;
    }
    return last;
}

/// Reassigns m_F among atoms so that |m_F| is rank-correlated with radial distance via a Gaussian copula.
inline void correlate_spins(std::vector<Atom>& atoms, double rho, std::uint64_t seed) {
    std::size_t n = atoms.size();
    if (n < 2 || rho == 0.0) return;
    std::vector<double> radius(n);
    for (std::size_t i = 0; i < n; ++i) radius[i] = atoms[i].position.norm();
    std::vector<std::size_t> by_radius(n);
    std::iota(by_radius.begin(), by_radius.end(), 0);
    std::stable_sort(by_radius.begin(), by_radius.end(),
                     [&](std::size_t a, std::size_t b) { return radius[a] < radius[b]; });
    boost::math::normal_distribution<double> unit;
    std::vector<double> latent(n);
    double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (std::size_t rank = 0; rank < n; ++rank) {
        std::size_t i = by_radius[rank];
        double score = -boost::math::quantile(unit, (rank + 0.5) / static_cast<double>(n));
        SplitMix64 rng(derive_seed(seed ^ 0x5851f42d4c957f2dULL, i));
        latent[i] = rho * score + c * rng.normal();
    }
    std::vector<int> spins(n);
    for (std::size_t i = 0; i < n; ++i) spins[i] = atoms[i].m_f;
    std::stable_sort(spins.begin(), spins.end(), [](int a, int b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
    });
    std::vector<std::size_t> by_latent(n);
    std::iota(by_latent.begin(), by_latent.end(), 0);
    std::stable_sort(by_latent.begin(), by_latent.end(),
                     [&](std::size_t a, std::size_t b) { return latent[a] < latent[b]; });
    for (std::size_t k = 0; k < n; ++k) atoms[by_latent[k]].m_f = spins[k];
}

}  // namespace detail

/// Draws n atoms; atom i depends only on (seed, i) apart from the optional spin reordering.
inline Ensemble sample_ensemble(const ThermalSpec& spec, std::size_t n, const AtomSpecies& species,
                                std::uint64_t seed) {
    if (n == 0) throw std::domain_error("sample_ensemble: n must be >= 1");
    auto pops = spec.normalized_populations();
    for (auto [m, w] : pops) species.moment(m);
    std::array<double, 3> vrms{};
    for (int a = 0; a < 3; ++a) vrms[a] = thermal_velocity(species, spec.temperature[a]);
    Ensemble e;
    e.species = species;
    e.seed = seed;
    e.atoms.resize(n);
    parallel_each(n, [&](std::size_t i) {
        SplitMix64 rng(derive_seed(seed, i));
        Atom& atom = e.atoms[i];
        for (int a = 0; a < 3; ++a) atom.position[a] = spec.rms_radius[a] * rng.normal();
        for (int a = 0; a < 3; ++a) atom.velocity[a] = vrms[a] * rng.normal();
        atom.m_f = detail::draw_spin(pops, rng.uniform());
    });
    detail::correlate_spins(e.atoms, spec.spin_position_correlation, seed);
    return e;
}

/// Ballistic flight, with gravity along -vertical_axis when enabled.
inline Ensemble free_expansion(Ensemble e, double duration, bool gravity = false, int vertical_axis = 1) {
    if (!(duration >= 0.0)) throw std::domain_error("free_expansion: negative duration");
    double g = constants.gravity_g;
    for (auto& a : e.atoms) {
        a.position += a.velocity * duration;
        if (gravity) {
            a.position[vertical_axis] -= 0.5 * g * duration * duration;
            a.velocity[vertical_axis] -= g * duration;
        }
    }
    e.time += duration;
    return e;
}

/// Default leapfrog step min(duration/100, 10 us).
inline double default_kick_step(double duration) { return std::min(duration / 100.0, 10e-6); }

/// Velocity-Verlet integration under the configuration's force (including gravity when enabled).
inline Ensemble apply_kick(Ensemble e, const FieldConfiguration& config, double duration, double step = 0.0) {
    if (!(duration > 0.0)) throw std::domain_error("apply_kick: duration must be > 0");
    if (step == 0.0) step = default_kick_step(duration);
    if (!(step > 0.0) || step > duration * (1.0 + 1e-12))
        throw std::domain_error("apply_kick: step must be in (0, duration]");
    auto nsteps = static_cast<std::size_t>(std::ceil(duration / step - 1e-9));
    double dt = duration / static_cast<double>(nsteps);
    double inv_m = 1.0 / e.species.mass();
    const AtomSpecies species = e.species;
    parallel_each(e.atoms.size(), [&](std::size_t i) {
        Atom& a = e.atoms[i];
        auto f = force_with_flag(config, a.position, a.m_f, species);
        bool node = f.node;
        for (std::size_t s = 0; s < nsteps; ++s) {
            a.velocity += (0.5 * dt * inv_m) * f.force;
            a.position += dt * a.velocity;
            f = force_with_flag(config, a.position, a.m_f, species);
            node = node || f.node;
            a.velocity += (0.5 * dt * inv_m) * f.force;
        }
        a.node_touched = a.node_touched || node;
    });
    e.time += duration;
    return e;
}

/// Instantaneous impulse F(x)/m * duration; positions untouched.
inline Ensemble impulse_kick(Ensemble e, const FieldConfiguration& config, double duration) {
    if (!(duration > 0.0)) throw std::domain_error("impulse_kick: duration must be > 0");
    double inv_m = 1.0 / e.species.mass();
    const AtomSpecies species = e.species;
    parallel_each(e.atoms.size(), [&](std::size_t i) {
        Atom& a = e.atoms[i];
        auto f = force_with_flag(config, a.position, a.m_f, species);
        a.velocity += (duration * inv_m) * f.force;
        a.node_touched = a.node_touched || f.node;
    });
    return e;
}

namespace detail {
inline void require_two(const Ensemble& e) {
    if (e.atoms.size() < 2) throw std::domain_error("ensemble statistics need n >= 2");
}

template <class Get>
double sample_variance(const Ensemble& e, Get get) {
    require_two(e);
    double mean = 0.0;
    for (const auto& a : e.atoms) mean += get(a);
    mean /= static_cast<double>(e.atoms.size());
    double ss = 0.0;
    for (const auto& a : e.atoms) {
        double d = get(a) - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(e.atoms.size() - 1);
}
}  // namespace detail

/// m Var(v_axis) / k_B.
inline double temperature(const Ensemble& e, int axis) {
    double var = detail::sample_variance(e, [axis](const Atom& a) { return a.velocity[axis]; });
    return e.species.mass() * var / constants.k_boltzmann;
}

/// Centered rms position along axis.
inline double cloud_size(const Ensemble& e, int axis) {
    return std::sqrt(detail::sample_variance(e, [axis](const Atom& a) { return a.position[axis]; }));
}

/// Sample covariance of (x, y, z, vx, vy, vz).
inline Eigen::Matrix<double, 6, 6> phase_space_covariance(const Ensemble& e) {
    detail::require_two(e);
    using V6 = Eigen::Matrix<double, 6, 1>;
    V6 mean = V6::Zero();
    auto pack = [](const Atom& a) {
        V6 v;
        v << a.position, a.velocity;
        return v;
    };
    for (const auto& a : e.atoms) mean += pack(a);
    mean /= static_cast<double>(e.atoms.size());
    Eigen::Matrix<double, 6, 6> cov = Eigen::Matrix<double, 6, 6>::Zero();
    for (const auto& a : e.atoms) {
        V6 d = pack(a) - mean;
        cov.noalias() += d * d.transpose();
    }
    return cov / static_cast<double>(e.atoms.size() - 1);
}

/// sqrt(det Cov(x_a, v_a)).
inline double phase_space_area(const Ensemble& e, int axis) {
    auto c = phase_space_covariance(e);
    double det = c(axis, axis) * c(axis + 3, axis + 3) - c(axis, axis + 3) * c(axis + 3, axis);
    return std::sqrt(std::max(0.0, det));
}

/// Mean kinetic energy along one axis (about zero velocity, not the mean).
inline double mean_kinetic_energy(const Ensemble& e, int axis) {
    if (e.atoms.empty()) throw std::domain_error("mean_kinetic_energy: empty ensemble");
    double s = 0.0;
    for (const auto& a : e.atoms) s += a.velocity[axis] * a.velocity[axis];
    return 0.5 * e.species.mass() * s / static_cast<double>(e.atoms.size());
}

inline void write_ensemble_csv(std::ostream& os, const Ensemble& e) {
    CsvWriter w(os, {"x", "y", "z", "vx", "vy", "vz", "mF"});
    for (const auto& a : e.atoms)
        w.row(a.position.x(), a.position.y(), a.position.z(), a.velocity.x(), a.velocity.y(),
              a.velocity.z(), a.m_f);
}

}  // namespace dkick
