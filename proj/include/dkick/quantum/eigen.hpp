#pragma once

#include <lapacke.h>

#include <algorithm>
#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "../constants.hpp"
#include "core.hpp"

namespace dkick::quantum {

struct Eigenpair {
    double energy = 0.0;        // J
    std::vector<double> state;  // sum state^2 dx = 1
};

/// Hopping energy hbar^2 / (2 m dx^2) of the second-order Laplacian.
inline double hopping_energy(double dx, double mass) {
    return constants.hbar * constants.hbar / (2.0 * mass * dx * dx);
}

/// All eigenvalues (ascending) of the hard-wall finite-difference Hamiltonian with potential v.
inline std::vector<double> tridiagonal_eigenvalues(const std::vector<double>& v, double dx, double mass) {
    std::size_t n = v.size();
    double unit = hopping_energy(dx, mass);
    std::vector<double> d(n), e(n, -1.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = 2.0 + v[i] / unit;
    lapack_int info = LAPACKE_dsterf(static_cast<lapack_int>(n), d.data(), e.data());
    if (info != 0) throw std::runtime_error("dsterf failed with info " + std::to_string(info));
    for (auto& x : d) x *= unit;
    return d;
}

/// Eigenpairs with 0-based indices [lo, hi] of the hard-wall finite-difference Hamiltonian.
inline std::vector<Eigenpair> tridiagonal_eigenpairs(const std::vector<double>& v, double dx, double mass,
                                                     std::size_t lo, std::size_t hi) {
    std::size_t n = v.size();
    if (hi < lo || hi >= n) throw std::invalid_argument("tridiagonal_eigenpairs: bad index range");
    double unit = hopping_energy(dx, mass);
    std::vector<double> d(n), e(n, -1.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = 2.0 + v[i] / unit;
    std::size_t k = hi - lo + 1;
    std::vector<double> w(n), z(n * k);
    std::vector<lapack_int> isuppz(2 * k);
    lapack_int m = 0;
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', static_cast<lapack_int>(n), d.data(), e.data(), 0.0,
                                     0.0, static_cast<lapack_int>(lo + 1), static_cast<lapack_int>(hi + 1), 0.0, &m,
                                     w.data(), z.data(), static_cast<lapack_int>(n), isuppz.data());
    if (info != 0 || static_cast<std::size_t>(m) != k)
        throw std::runtime_error("dstevr failed with info " + std::to_string(info));
    std::vector<Eigenpair> out(k);
    double scale = 1.0 / std::sqrt(dx);
    for (std::size_t j = 0; j < k; ++j) {
        out[j].energy = w[j] * unit;
        out[j].state.assign(z.begin() + j * n, z.begin() + (j + 1) * n);
        auto peak = std::max_element(out[j].state.begin(), out[j].state.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
        double sign = *peak < 0.0 ? -1.0 : 1.0;
        for (auto& s : out[j].state) s *= sign * scale;
    }
    return out;
}

/// Lowest k eigenvectors as columns of a column-major n x k array (sum z^2 dx = 1, largest component positive).
/// Divide and conquer on the whole spectrum when n^2 doubles fit in memory_limit bytes, blocked MRRR otherwise.
inline std::vector<double> tridiagonal_lowest_vectors(const std::vector<double>& v, double dx, double mass,
                                                      std::size_t k, std::size_t memory_limit = std::size_t{1} << 31) {
    std::size_t n = v.size();
    if (k == 0 || k > n) throw std::invalid_argument("tridiagonal_lowest_vectors: k must be in [1, n]");
    std::vector<double> out;
    double scale = 1.0 / std::sqrt(dx);
    auto fix = [&](double* col) {
        double* peak = std::max_element(col, col + n, [](double a, double b) { return std::abs(a) < std::abs(b); });
        double s = (*peak < 0.0 ? -1.0 : 1.0) * scale;
        for (std::size_t i = 0; i < n; ++i) col[i] *= s;
    };
    if (2 * n * n * sizeof(double) <= memory_limit) {
        double unit = hopping_energy(dx, mass);
        std::vector<double> d(n), e(n, -1.0);
        for (std::size_t i = 0; i < n; ++i) d[i] = 2.0 + v[i] / unit;
        out.resize(n * n);
        lapack_int info = LAPACKE_dstedc(LAPACK_COL_MAJOR, 'I', static_cast<lapack_int>(n), d.data(), e.data(),
                                         out.data(), static_cast<lapack_int>(n));
        if (info != 0) throw std::runtime_error("dstedc failed with info " + std::to_string(info));
        out.resize(n * k);
        out.shrink_to_fit();
        for (std::size_t j = 0; j < k; ++j) fix(out.data() + j * n);
        return out;
    }
    out.reserve(n * k);
    for (std::size_t lo = 0; lo < k; lo += 512) {
        auto pairs = tridiagonal_eigenpairs(v, dx, mass, lo, std::min(k, lo + 512) - 1);
        for (const auto& p : pairs) out.insert(out.end(), p.state.begin(), p.state.end());
    }
    return out;
}

/// k lowest eigenpairs of the potential frozen at time t. Throws if a state reaches the grid boundary.
inline std::vector<Eigenpair> stationary_states(const PotentialSpec& spec, double t, const Grid1D& grid, std::size_t k,
                                                double mass = AtomSpecies::rubidium85().mass()) {
    if (k == 0 || k > grid.n) throw std::invalid_argument("stationary_states: k must be in [1, n]");
    spec.validate();
    auto v = sample_potential(spec, grid, t);
    auto pairs = tridiagonal_eigenpairs(v, grid.dx(), mass, 0, k - 1);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const auto& s = pairs[j].state;
        double peak = 0.0;
        for (double x : s) peak = std::max(peak, std::abs(x));
        double edge = std::max(std::abs(s.front()), std::abs(s.back()));
        if (edge >= 1e-6 * peak)
            throw std::runtime_error("stationary_states: state " + std::to_string(j) +
                                     " reaches the grid boundary; widen the grid");
    }
    return pairs;
}

/// ||H psi - E psi|| / ||psi|| in units of the hopping energy.
inline double eigen_residual(const std::vector<double>& v, double dx, double mass, const Eigenpair& p) {
    double unit = hopping_energy(dx, mass);
    std::size_t n = v.size();
    double r2 = 0.0, p2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double h = (2.0 + v[i] / unit) * p.state[i];
        if (i > 0) h -= p.state[i - 1];
        if (i + 1 < n) h -= p.state[i + 1];
        double r = h - (p.energy / unit) * p.state[i];
        r2 += r * r;
        p2 += p.state[i] * p.state[i];
    }
    return std::sqrt(r2 / p2);
}

/// Energy scale (alpha^2 hbar^2 / 2m)^(1/3) of the V-trap.
inline double vtrap_energy_scale(double alpha, double mass) {
    return std::cbrt(alpha * alpha * constants.hbar * constants.hbar / (2.0 * mass));
}

/// k-th zero (k >= 1) of Ai', negative.
inline double airy_ai_prime_zero(int k) {
    double t = 3.0 * std::numbers::pi / 8.0 * (4.0 * k - 3.0);
    double x = -std::pow(t, 2.0 / 3.0) * (1.0 - 7.0 / (48.0 * t * t) + 35.0 / (288.0 * t * t * t * t));
    for (int it = 0; it < 50; ++it) {
        double f = boost::math::airy_ai_prime(x);
        double df = x * boost::math::airy_ai(x);
        double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-15 * std::abs(x)) break;
    }
    return x;
}

/// Exact V-trap level n (0-based): even levels from Ai' zeros, odd from Ai zeros.
inline double vtrap_level(double alpha, double mass, std::size_t n) {
    double eps = vtrap_energy_scale(alpha, mass);
    int k = static_cast<int>(n / 2 + 1);
    return n % 2 == 0 ? -eps * airy_ai_prime_zero(k) : -eps * boost::math::airy_ai_zero<double>(k);
}

/// Partition function of the continuum V-trap at temperature T (energies from the trap floor).
inline double vtrap_partition_function(double alpha, double mass, double temperature) {
    double eps = vtrap_energy_scale(alpha, mass);
    double beta = 1.0 / (constants.k_boltzmann * temperature);
    double z = 0.0;
    for (int k = 1;; ++k) {
        double e_even = -eps * airy_ai_prime_zero(k);
        double e_odd = -eps * boost::math::airy_ai_zero<double>(k);
        double term = std::exp(-beta * e_even) + std::exp(-beta * e_odd);
        z += term;
        if (term < 1e-17 * z) break;
    }
    return z;
}

}  // namespace dkick::quantum
