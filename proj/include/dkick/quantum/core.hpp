#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "../constants.hpp"
#include "../csv.hpp"

namespace dkick::quantum {

using cplx = std::complex<double>;

/// Uniform grid x_i = x_min + i dx, i = 0..n-1, endpoints included.
struct Grid1D {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t n = 0;

    Grid1D() = default;
    Grid1D(double lo, double hi, std::size_t points) : x_min(lo), x_max(hi), n(points) {
        if (!(hi > lo)) throw std::invalid_argument("Grid1D: x_max must exceed x_min");
        if (points < 64) throw std::invalid_argument("Grid1D: need n >= 64");
    }

    double dx() const { return (x_max - x_min) / static_cast<double>(n - 1); }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }

    /// Index of the grid point nearest to position (clamped).
    std::size_t index_of(double pos) const {
        double f = std::round((pos - x_min) / dx());
        return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(n - 1)));
    }
};

struct Wavefunction {
    Grid1D grid;
    std::vector<cplx> psi;
    double time = 0.0;
    double absorbed = 0.0;  // probability removed by the absorbing layer

    double norm() const {
        double s = 0.0;
        for (const auto& z : psi) s += std::norm(z);
        return s * grid.dx();
    }

    /// Probability on grid points with index in [i0, i1).
    double probability(std::size_t i0, std::size_t i1) const {
        double s = 0.0;
        for (std::size_t i = i0; i < std::min(i1, psi.size()); ++i) s += std::norm(psi[i]);
        return s * grid.dx();
    }

    double mean_x() const {
        double s = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) s += grid.x(i) * std::norm(psi[i]);
        return s * grid.dx() / norm();
    }

    double variance_x() const {
        double m = mean_x(), s = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) s += (grid.x(i) - m) * (grid.x(i) - m) * std::norm(psi[i]);
        return s * grid.dx() / norm();
    }
};

/// <a|b> = sum conj(a) b dx.
inline cplx overlap(const Wavefunction& a, const Wavefunction& b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.psi.size(); ++i) s += std::conj(a.psi[i]) * b.psi[i];
    return s * a.grid.dx();
}

/// Gaussian packet of position rms sigma, center x0 and mean wavenumber k0, normalized on the grid.
inline Wavefunction gaussian_packet(const Grid1D& g, double x0, double sigma, double k0 = 0.0) {
    Wavefunction w;
    w.grid = g;
    w.psi.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        double d = g.x(i) - x0;
        w.psi[i] = std::exp(-d * d / (4.0 * sigma * sigma)) * std::polar(1.0, k0 * g.x(i));
    }
    double nrm = std::sqrt(w.norm());
    for (auto& z : w.psi) z /= nrm;
    return w;
}

/// Piecewise-linear barrier trajectory; constant before the first and after the last knot.
struct Trajectory {
    std::vector<std::pair<double, double>> knots;  // (t, x_c)

    static Trajectory fixed(double x) { return Trajectory{{{0.0, x}}}; }
    static Trajectory linear(double x_start, double x_stop, double duration) {
        return Trajectory{{{0.0, x_start}, {duration, x_stop}}};
    }

    double at(double t) const {
        if (knots.empty()) return 0.0;
        if (t <= knots.front().first) return knots.front().second;
        if (t >= knots.back().first) return knots.back().second;
        auto it = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double v, const std::pair<double, double>& k) { return v < k.first; });
        auto [t1, x1] = *it;
        auto [t0, x0] = *(it - 1);
        return x0 + (x1 - x0) * (t - t0) / (t1 - t0);
    }

    double duration() const { return knots.empty() ? 0.0 : knots.back().first - knots.front().first; }

    /// Same path traversed backwards over [0, T].
    Trajectory reversed(double total) const {
        Trajectory r;
        for (auto it = knots.rbegin(); it != knots.rend(); ++it) r.knots.emplace_back(total - it->first, it->second);
        return r;
    }
};

/// V-shaped trap plus a (possibly dithered) Gaussian barrier; quadratic and custom terms for tests.
struct PotentialSpec {
    double v_slope = 0.0;         // alpha, J/m
    double barrier_height = 0.0;  // U0, J
    double barrier_waist = 20e-6; // w, 1/e^2 intensity radius
    Trajectory center = Trajectory::fixed(0.0);
    std::vector<std::pair<double, double>> dither{{0.0, 1.0}};  // (offset, weight)
    double quadratic = 0.0;       // k in k x^2 / 2
    std::function<double(double)> extra;  // static additional term

    void validate() const {
        if (!(v_slope >= 0.0)) throw std::invalid_argument("PotentialSpec: v_slope must be >= 0");
        if (!(barrier_height >= 0.0)) throw std::invalid_argument("PotentialSpec: barrier_height must be >= 0");
        if (!(barrier_waist > 0.0)) throw std::invalid_argument("PotentialSpec: barrier_waist must be > 0");
        double sum = 0.0;
        for (auto [o, wgt] : dither) {
            if (!(wgt >= 0.0)) throw std::invalid_argument("PotentialSpec: negative dither weight");
            sum += wgt;
        }
        if (!(sum > 0.0)) throw std::invalid_argument("PotentialSpec: dither weights sum to zero");
    }

    std::vector<std::pair<double, double>> normalized_dither() const {
        double sum = 0.0;
        for (auto [o, wgt] : dither) sum += wgt;
        std::vector<std::pair<double, double>> out;
        for (auto [o, wgt] : dither) out.emplace_back(o, wgt / sum);
        return out;
    }

    /// Time-independent part.
    double static_part(double x) const {
        double v = v_slope * std::abs(x) + 0.5 * quadratic * x * x;
        if (extra) v += extra(x);
        return v;
    }

    /// Barrier profile sum_i weight_i exp(-2 (x - x_c - offset_i)^2 / w^2), without U0.
    double barrier_shape(double x, double x_c) const {
        double s = 0.0, wsum = 0.0;
        for (auto [o, wgt] : dither) wsum += wgt;
        for (auto [o, wgt] : dither) {
            double d = x - x_c - o;
            s += wgt * std::exp(-2.0 * d * d / (barrier_waist * barrier_waist));
        }
        return s / wsum;
    }

    PotentialSpec frozen(double t) const {
        PotentialSpec s = *this;
        s.center = Trajectory::fixed(center.at(t));
        return s;
    }
};

inline double potential_at(const PotentialSpec& spec, double x, double t) {
    double v = spec.static_part(x);
    if (spec.barrier_height != 0.0) v += spec.barrier_height * spec.barrier_shape(x, spec.center.at(t));
    return v;
}

inline std::vector<double> sample_potential(const PotentialSpec& spec, const Grid1D& g, double t) {
    std::vector<double> v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = potential_at(spec, g.x(i), t);
    return v;
}

inline void write_wavefunction_csv(std::ostream& os, const Wavefunction& w) {
    CsvWriter out(os, {"x", "re", "im"});
    for (std::size_t i = 0; i < w.psi.size(); ++i) out.row(w.grid.x(i), w.psi[i].real(), w.psi[i].imag());
}

/// V-trap slope alpha from a gradient-equivalent temperature per length (e.g. 300 uK/cm).
inline double slope_from_temperature_gradient(double kelvin_per_meter) {
    return kelvin_per_meter * constants.k_boltzmann;
}

}  // namespace dkick::quantum
