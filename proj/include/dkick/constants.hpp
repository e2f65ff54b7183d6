#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dkick {

struct PhysicalConstants {
    double planck_h = 6.62607015e-34;       // J s
    double hbar = 6.62607015e-34 / (2.0 * std::numbers::pi);
    double k_boltzmann = 1.380649e-23;      // J/K
    double bohr_magneton = 9.2740100783e-24; // J/T
    double mu0 = 1.25663706212e-6;          // T m/A
    double gravity_g = 9.80665;             // m/s^2
};

inline constexpr PhysicalConstants constants{};

/// Alkali species record. Only (F, g_F, m_F) hyperfine structure is modeled.
class AtomSpecies {
public:
    AtomSpecies(double mass, double d2_wavelength, int f_ground, double g_f)
        : mass_(mass), d2_wavelength_(d2_wavelength), f_ground_(f_ground), g_f_(g_f) {
        if (!(mass > 0.0)) throw std::domain_error("AtomSpecies: mass must be > 0");
        if (!(d2_wavelength > 0.0)) throw std::domain_error("AtomSpecies: wavelength must be > 0");
        if (f_ground < 0) throw std::domain_error("AtomSpecies: f_ground must be >= 0");
    }

    double mass() const { return mass_; }
    double d2_wavelength() const { return d2_wavelength_; }
    int f_ground() const { return f_ground_; }
    double g_f() const { return g_f_; }

    /// Magnetic moment g_F m_F mu_B; throws if |m_f| > F.
    double moment(int m_f) const {
        if (m_f > f_ground_ || m_f < -f_ground_)
            throw std::domain_error("m_F outside [-F, F]");
        return g_f_ * m_f * constants.bohr_magneton;
    }

    static AtomSpecies rubidium85() { return AtomSpecies(1.4100e-25, 780.241e-9, 3, 1.0 / 3.0); }

private:
    double mass_;
    double d2_wavelength_;
    int f_ground_;
    double g_f_;
};

inline double recoil_velocity(const AtomSpecies& s) {
    return constants.planck_h / (s.mass() * s.d2_wavelength());
}

inline double recoil_temperature(const AtomSpecies& s) {
    double v = recoil_velocity(s);
    return s.mass() * v * v / constants.k_boltzmann;
}

/// 1D rms thermal speed sqrt(k_B T / m).
inline double thermal_velocity(const AtomSpecies& s, double temperature_1d) {
    if (temperature_1d < 0.0) throw std::domain_error("temperature must be >= 0");
    return std::sqrt(constants.k_boltzmann * temperature_1d / s.mass());
}

/// h / (m v_rms) with the 1D rms speed.
inline double de_broglie_wavelength(const AtomSpecies& s, double temperature_1d) {
    if (!(temperature_1d > 0.0)) throw std::domain_error("de_broglie_wavelength: temperature must be > 0");
    return constants.planck_h / (s.mass() * thermal_velocity(s, temperature_1d));
}

/// Boundary unit conversions. Everything past configuration parsing is SI.
namespace units {
inline constexpr double gauss = 1e-4;            // T
inline constexpr double gauss_per_cm = 1e-2;     // T/m
inline constexpr double gauss_per_cm2 = 1.0;     // T/m^2
inline constexpr double cm = 1e-2;
inline constexpr double mm = 1e-3;
inline constexpr double um = 1e-6;
inline constexpr double nm = 1e-9;
inline constexpr double ms = 1e-3;
inline constexpr double us = 1e-6;
inline constexpr double uK = 1e-6;
inline constexpr double nK = 1e-9;
inline constexpr double cm_per_s = 1e-2;
inline constexpr double mm_per_s = 1e-3;

/// Energy k_B * T for a temperature in kelvin.
inline constexpr double kelvin_energy(double t) { return t * 1.380649e-23; }
}  // namespace units

}  // namespace dkick
