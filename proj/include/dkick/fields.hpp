#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "constants.hpp"

namespace dkick {

using Vec3 = Eigen::Vector3d;

enum class Polarity { opposed, aligned };

/// Two coaxial circular loops at z = +-half_separation.
class CoilPair {
public:
    CoilPair(double radius, double half_separation, int turns, double current, Polarity polarity)
        : radius_(radius), half_separation_(half_separation), turns_(turns), current_(current),
          polarity_(polarity) {
        if (!(radius > 0.0)) throw std::domain_error("CoilPair: radius must be > 0");
        if (!(half_separation > 0.0)) throw std::domain_error("CoilPair: half_separation must be > 0");
        if (turns < 1) throw std::domain_error("CoilPair: turns must be >= 1");
        if (!std::isfinite(current)) throw std::domain_error("CoilPair: current must be finite");
    }

    /// 4 cm radius, 8 cm separation, 200 turns.
    static CoilPair standard_coil(double current, Polarity polarity) {
        return CoilPair(0.04, 0.04, 200, current, polarity);
    }

    double radius() const { return radius_; }
    double half_separation() const { return half_separation_; }
    int turns() const { return turns_; }
    double current() const { return current_; }
    Polarity polarity() const { return polarity_; }

    CoilPair with_current(double current) const {
        return CoilPair(radius_, half_separation_, turns_, current, polarity_);
    }

    /// On-axis field of the pair and its first three z derivatives, analytic.
    std::array<double, 4> axial_derivatives(double z) const {
        std::array<double, 4> out{};
        double sign = polarity_ == Polarity::opposed ? -1.0 : 1.0;
        auto upper = loop(z - half_separation_);
        auto lower = loop(z + half_separation_);
        for (int k = 0; k < 4; ++k) out[k] = upper[k] + sign * lower[k];
        return out;
    }

private:
    std::array<double, 4> loop(double u) const {
        double r2 = radius_ * radius_;
        double c = constants.mu0 * turns_ * current_ * r2 / 2.0;
        double s = r2 + u * u;
        double s12 = std::sqrt(s);
        double s32 = s * s12;
        double s52 = s32 * s;
        double s72 = s52 * s;
        double s92 = s72 * s;
        return {c / s32, -3.0 * c * u / s52, 3.0 * c * (4.0 * u * u - r2) / s72,
                15.0 * c * u * (3.0 * r2 - 4.0 * u * u) / s92};
    }

    double radius_;
    double half_separation_;
    int turns_;
    double current_;
    Polarity polarity_;
};

/// B = B'(-x/2, -y/2, z).
struct IdealQuadrupole {
    double axial_gradient = 0.0;  // T/m
};

/// Field-magnitude model |B| = bias + (B''/2)(z^2 - (x^2 + y^2)/2), the large-bias limit.
struct IdealHarmonic {
    double axial_curvature = 0.0;  // T/m^2
    double bias = 0.0;             // T
};

using FieldSource = std::variant<CoilPair, IdealQuadrupole, IdealHarmonic>;

/// Sum of field sources plus optional gravity along a fixed axis.
struct FieldConfiguration {
    std::vector<FieldSource> sources;
    bool gravity_enabled = false;
    int vertical_axis = 1;       // gravity acts along -vertical_axis
    double fd_step = 1e-6;       // m, coil-model finite differences
    double node_epsilon = 1e-9;  // m

    FieldConfiguration() = default;
    explicit FieldConfiguration(std::vector<FieldSource> s, bool gravity = false)
        : sources(std::move(s)), gravity_enabled(gravity) {}

    /// Multiplies every source strength (coil current, gradient, curvature and bias) by factor.
    FieldConfiguration scaled(double factor) const {
        FieldConfiguration out = *this;
        for (auto& src : out.sources) {
            std::visit(
                [&](auto& s) {
                    using T = std::decay_t<decltype(s)>;
                    if constexpr (std::is_same_v<T, CoilPair>) {
                        s = s.with_current(s.current() * factor);
                    } else if constexpr (std::is_same_v<T, IdealQuadrupole>) {
                        s.axial_gradient *= factor;
                    } else {
                        s.axial_curvature *= factor;
                        s.bias *= factor;
                    }
                },
                src);
        }
        return out;
    }

    bool has_coils() const {
        for (const auto& s : sources)
            if (std::holds_alternative<CoilPair>(s)) return true;
        return false;
    }
};

inline double on_axis_field(const CoilPair& pair, double z) { return pair.axial_derivatives(z)[0]; }

/// Vector part of the field (coils and quadrupoles). Coils use the second-order near-axis expansion.
inline Vec3 vector_field(const FieldConfiguration& config, const Vec3& r) {
    Vec3 b = Vec3::Zero();
    for (const auto& src : config.sources) {
        if (const auto* q = std::get_if<IdealQuadrupole>(&src)) {
            b += q->axial_gradient * Vec3(-0.5 * r.x(), -0.5 * r.y(), r.z());
        } else if (const auto* c = std::get_if<CoilPair>(&src)) {
            auto d = c->axial_derivatives(r.z());
            double rho2 = r.x() * r.x() + r.y() * r.y();
            b += Vec3(-0.5 * r.x() * d[1], -0.5 * r.y() * d[1], d[0] - 0.25 * rho2 * d[2]);
        }
    }
    return b;
}

inline double harmonic_magnitude(const FieldConfiguration& config, const Vec3& r) {
    double m = 0.0;
    for (const auto& src : config.sources) {
        if (const auto* h = std::get_if<IdealHarmonic>(&src)) {
            double rho2 = r.x() * r.x() + r.y() * r.y();
            m += h->bias + 0.5 * h->axial_curvature * (r.z() * r.z() - 0.5 * rho2);
        }
    }
    return m;
}

/// |B| of the configuration at r.
inline double field_magnitude(const FieldConfiguration& config, const Vec3& r) {
    return vector_field(config, r).norm() + harmonic_magnitude(config, r);
}

/// Total on-axis B_z at (0, 0, z).
inline double on_axis_total(const FieldConfiguration& config, double z) {
    double b = 0.0;
    for (const auto& src : config.sources) {
        if (const auto* q = std::get_if<IdealQuadrupole>(&src)) b += q->axial_gradient * z;
        else if (const auto* c = std::get_if<CoilPair>(&src)) b += on_axis_field(*c, z);
        else if (const auto* h = std::get_if<IdealHarmonic>(&src))
            b += h->bias + 0.5 * h->axial_curvature * z * z;
    }
    return b;
}

/// dB_z/dz on axis. Analytic for ideal models, central difference for coils.
inline double axial_gradient(const FieldConfiguration& config, double z) {
    if (config.sources.empty()) throw std::invalid_argument("axial_gradient: empty configuration");
    double g = 0.0;
    double h = config.fd_step;
    for (const auto& src : config.sources) {
        if (const auto* q = std::get_if<IdealQuadrupole>(&src)) g += q->axial_gradient;
        else if (const auto* c = std::get_if<CoilPair>(&src))
            g += (on_axis_field(*c, z + h) - on_axis_field(*c, z - h)) / (2.0 * h);
        else if (const auto* hm = std::get_if<IdealHarmonic>(&src)) g += hm->axial_curvature * z;
    }
    return g;
}

/// d^2B_z/dz^2 on axis. Analytic for ideal models, central second difference for coils.
inline double axial_curvature(const FieldConfiguration& config, double z) {
    if (config.sources.empty()) throw std::invalid_argument("axial_curvature: empty configuration");
    double k = 0.0;
    double h = config.fd_step;
    for (const auto& src : config.sources) {
        if (const auto* c = std::get_if<CoilPair>(&src))
            k += (on_axis_field(*c, z + h) - 2.0 * on_axis_field(*c, z) + on_axis_field(*c, z - h)) /
                 (h * h);
        else if (const auto* hm = std::get_if<IdealHarmonic>(&src)) k += hm->axial_curvature;
    }
    return k;
}

inline double gravity_potential(const FieldConfiguration& config, const Vec3& r, const AtomSpecies& s) {
    if (!config.gravity_enabled) return 0.0;
    return s.mass() * constants.gravity_g * r[config.vertical_axis];
}

/// U = g_F m_F mu_B |B| + m g h.
inline double potential_energy(const FieldConfiguration& config, const Vec3& r, int m_f,
                               const AtomSpecies& species) {
    double mu = species.moment(m_f);
    double magnetic = mu == 0.0 ? 0.0 : mu * field_magnitude(config, r);
    return magnetic + gravity_potential(config, r, species);
}

struct ForceResult {
    Vec3 force = Vec3::Zero();
    bool node = false;
};

/// -grad U. Coil configurations use central differences of |B| with config.fd_step.
inline ForceResult force_with_flag(const FieldConfiguration& config, const Vec3& r, int m_f,
                                   const AtomSpecies& species) {
    ForceResult out;
    double mu = species.moment(m_f);
    if (mu != 0.0) {
        Vec3 grad = Vec3::Zero();
        if (config.has_coils()) {
            Vec3 b0 = vector_field(config, r);
            double h = config.fd_step;
            double gscale = std::abs(axial_gradient(config, r.z()));
            if (b0.norm() <= config.node_epsilon * gscale) {
                out.node = true;
            } else {
                for (int a = 0; a < 3; ++a) {
                    Vec3 rp = r, rm = r;
                    rp[a] += h;
                    rm[a] -= h;
                    grad[a] = (vector_field(config, rp).norm() - vector_field(config, rm).norm()) / (2.0 * h);
                }
            }
        } else {
            Vec3 b = Vec3::Zero();
            Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
            for (const auto& src : config.sources) {
                if (const auto* q = std::get_if<IdealQuadrupole>(&src)) {
                    Vec3 d(-0.5, -0.5, 1.0);
                    b += q->axial_gradient * d.cwiseProduct(r);
                    jac.diagonal() += q->axial_gradient * d;
                }
            }
            double bn = b.norm();
            double jn = jac.norm();
            if (jn > 0.0 && bn <= config.node_epsilon * jn) out.node = true;
            else if (bn > 0.0) grad = jac.transpose() * b / bn;
        }
        for (const auto& src : config.sources) {
            if (const auto* hm = std::get_if<IdealHarmonic>(&src)) {
                grad += hm->axial_curvature * Vec3(-0.5 * r.x(), -0.5 * r.y(), r.z());
            }
        }
        out.force = -mu * grad;
    }
    if (config.gravity_enabled) out.force[config.vertical_axis] -= species.mass() * constants.gravity_g;
    return out;
}

inline Vec3 force(const FieldConfiguration& config, const Vec3& r, int m_f, const AtomSpecies& species) {
    return force_with_flag(config, r, m_f, species).force;
}

/// Gradient at which an atom in m_f is held against gravity: m g / (g_F m_F mu_B).
inline double levitation_gradient(const AtomSpecies& species, int m_f) {
    double mu = species.moment(m_f);
    if (!(mu > 0.0)) return INFINITY;
    return species.mass() * constants.gravity_g / mu;
}

/// Axial angular frequency sqrt(mu B''/m) of a harmonic field for state m_f.
inline double harmonic_omega(double curvature, int m_f, const AtomSpecies& species) {
    double k = species.moment(m_f) * curvature;
    if (!(k > 0.0)) throw std::domain_error("harmonic_omega: non-confining curvature");
    return std::sqrt(k / species.mass());
}

}  // namespace dkick
