#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "../constants.hpp"
#include "../csv.hpp"
#include "core.hpp"

namespace dkick::quantum {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Largest stable step m dx^2 / (pi hbar) for the spectral kinetic propagator.
inline double max_stable_dt(const Grid1D& g, double mass) {
    double dx = g.dx();
    return mass * dx * dx / (std::numbers::pi * constants.hbar);
}

struct PropagatorOptions {
    double absorber_fraction = 0.1;  // width of each absorbing layer as a fraction of the domain
    double absorber_rate = 1e4;      // 1/s at the grid edge
    bool absorb_left = true;
    bool absorb_right = true;
};

/// Strang split-operator stepper: half potential, full kinetic (spectral), half potential, then absorber.
/// The barrier term is evaluated at each step's midpoint time and only inside a window around the barrier.
class SplitOperator {
public:
    SplitOperator(const Grid1D& grid, const PotentialSpec& spec, double dt, double mass,
                  PropagatorOptions opt = {})
        : grid_(grid), spec_(spec), dt_(dt), mass_(mass), opt_(opt) {
        spec_.validate();
        if (!(dt > 0.0)) throw std::invalid_argument("SplitOperator: dt must be > 0");
        double limit = max_stable_dt(grid, mass);
        if (!(dt < limit))
            throw std::invalid_argument("SplitOperator: dt = " + format_number(dt) +
                                        " s violates the stability limit m dx^2/(pi hbar) = " + format_number(limit) +
                                        " s");
        std::size_t n = grid.n;
        buffer_ = fftw_alloc_complex(n);
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            forward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
            backward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        double dx = grid.dx();
        double length = dx * static_cast<double>(n);
        kinetic_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            long long jj = static_cast<long long>(j);
            long long sj = jj <= static_cast<long long>(n / 2) ? jj : jj - static_cast<long long>(n);
            double k = 2.0 * std::numbers::pi * static_cast<double>(sj) / length;
            double phase = -constants.hbar * k * k * dt / (2.0 * mass);
            kinetic_[j] = std::polar(1.0 / static_cast<double>(n), phase);
        }
        static_half_.resize(n);
        mask_.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            static_half_[i] = std::polar(1.0, -spec_.static_part(grid.x(i)) * dt / (2.0 * constants.hbar));
        if (opt_.absorber_fraction > 0.0) {
            double layer = opt_.absorber_fraction * (grid.x_max - grid.x_min);
            for (std::size_t i = 0; i < n; ++i) {
                double x = grid.x(i);
                double depth = 0.0;
                if (opt_.absorb_left && x < grid.x_min + layer) depth = (grid.x_min + layer - x) / layer;
                if (opt_.absorb_right && x > grid.x_max - layer) depth = (x - (grid.x_max - layer)) / layer;
                if (depth > 0.0) {
                    double s = std::sin(0.5 * std::numbers::pi * depth);
                    mask_[i] = std::exp(-opt_.absorber_rate * dt * s * s);
                }
            }
        }
        double reach = 5.0 * spec_.barrier_waist;
        double lo = 0.0, hi = 0.0;
        for (auto [o, w] : spec_.dither) {
            lo = std::min(lo, o);
            hi = std::max(hi, o);
        }
        window_lo_ = lo - reach;
        window_hi_ = hi + reach;
        barrier_scale_ = spec_.barrier_height * dt / (2.0 * constants.hbar);
        weights_ = spec_.normalized_dither();
        for (std::size_t i = 0; i < n;) {
            if (mask_[i] == 1.0) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < n && mask_[j] != 1.0) ++j;
            mask_ranges_.emplace_back(i, j);
            i = j;
        }
    }

    SplitOperator(const SplitOperator&) = delete;
    SplitOperator& operator=(const SplitOperator&) = delete;

    ~SplitOperator() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buffer_);
    }

    double dt() const { return dt_; }

    /// One step from psi.time to psi.time + dt. With mask_first the absorber acts before the step,
    /// which is the ordering that makes the evolution the exact adjoint of the default one under conjugation.
    void step(Wavefunction& w, bool mask_first = false) {
        if (mask_first) apply_mask(w);
        double t_mid = w.time + 0.5 * dt_;
        prepare_barrier(t_mid);
        std::size_t n = grid_.n;
        auto* b = reinterpret_cast<double*>(buffer_);
        auto* p = reinterpret_cast<double*>(w.psi.data());
        const auto* h = reinterpret_cast<const double*>(static_half_.data());
        multiply(b, p, h, 0, n);
        apply_barrier(b);
        fftw_execute(forward_);
        const auto* k = reinterpret_cast<const double*>(kinetic_.data());
        multiply(b, b, k, 0, n);
        fftw_execute(backward_);
        apply_barrier(b);
        multiply(p, b, h, 0, n);
        if (!mask_first) apply_mask(w);
        w.time += dt_;
    }

    void apply_mask(Wavefunction& w) const {
        if (opt_.absorber_fraction <= 0.0) return;
        double lost = 0.0;
        for (auto [i0, i1] : mask_ranges_) {
            for (std::size_t i = i0; i < i1; ++i) {
                double m = mask_[i];
                lost += std::norm(w.psi[i]) * (1.0 - m * m);
                w.psi[i] *= m;
            }
        }
        w.absorbed += lost * grid_.dx();
    }

private:
    /// out[i] = a[i] * c[i] for interleaved complex arrays, i in [i0, i1).
    static void multiply(double* out, const double* a, const double* c, std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            double ar = a[2 * i], ai = a[2 * i + 1], cr = c[2 * i], ci = c[2 * i + 1];
            out[2 * i] = ar * cr - ai * ci;
            out[2 * i + 1] = ar * ci + ai * cr;
        }
    }

    void apply_barrier(double* b) const {
        if (phase_.empty()) return;
        double* q = b + 2 * phase_begin_;
        multiply(q, q, reinterpret_cast<const double*>(phase_.data()), 0, phase_.size());
    }

    void prepare_barrier(double t) {
        phase_.clear();
        if (barrier_scale_ == 0.0) return;
        double xc = spec_.center.at(t);
        phase_begin_ = grid_.index_of(xc + window_lo_);
        std::size_t i1 = grid_.index_of(xc + window_hi_);
        std::size_t m = i1 + 1 - phase_begin_;
        shape_.assign(m, 0.0);
        double dx = grid_.dx();
        double a = -2.0 / (spec_.barrier_waist * spec_.barrier_waist);
        double q = std::exp(2.0 * a * dx * dx);
        for (auto [o, wgt] : weights_) {
            double d0 = grid_.x(phase_begin_) - xc - o;
            double g = std::exp(a * d0 * d0);
            double r = std::exp(a * (2.0 * d0 * dx + dx * dx));
            for (std::size_t j = 0; j < m; ++j) {
                shape_[j] += wgt * g;
                g *= r;
                r *= q;
            }
        }
        phase_.resize(m);
        if (barrier_scale_ <= 0.05) {
            for (std::size_t j = 0; j < m; ++j) {
                double th = barrier_scale_ * shape_[j];
                double t2 = th * th;
                double c = 1.0 - t2 / 2.0 * (1.0 - t2 / 12.0 * (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0)));
                double s = th * (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0))));
                phase_[j] = cplx(c, -s);
            }
        } else {
            for (std::size_t j = 0; j < m; ++j) phase_[j] = std::polar(1.0, -barrier_scale_ * shape_[j]);
        }
    }

    Grid1D grid_;
    PotentialSpec spec_;
    double dt_;
    double mass_;
    PropagatorOptions opt_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
    std::vector<cplx> kinetic_;
    std::vector<cplx> static_half_;
    std::vector<double> mask_;
    double window_lo_ = 0.0, window_hi_ = 0.0;
    double barrier_scale_ = 0.0;
    std::vector<std::pair<double, double>> weights_;
    std::vector<std::pair<std::size_t, std::size_t>> mask_ranges_;
    std::vector<double> shape_;
    std::vector<cplx> phase_;
    std::size_t phase_begin_ = 0;
};

/// Evolves psi by steps of dt; observer(w) is called after every `every` steps when given.
inline Wavefunction evolve(Wavefunction psi, const PotentialSpec& spec, double dt, std::size_t steps,
                           double mass = AtomSpecies::rubidium85().mass(), PropagatorOptions opt = {},
                           const std::function<void(const Wavefunction&)>& observer = {}, std::size_t every = 0) {
    SplitOperator op(psi.grid, spec, dt, mass, opt);
    for (std::size_t s = 0; s < steps; ++s) {
        op.step(psi);
        if (observer && every > 0 && (s + 1) % every == 0) observer(psi);
    }
    return psi;
}

/// Energy expectation <H> on the grid, spectral kinetic term, potential at time t.
inline double energy_expectation(const Wavefunction& w, const PotentialSpec& spec, double t,
                                 double mass = AtomSpecies::rubidium85().mass()) {
    std::size_t n = w.grid.n;
    std::vector<cplx> buf(w.psi);
    fftw_plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(buf.data()),
                                reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    double length = w.grid.dx() * static_cast<double>(n);
    double kin = 0.0, total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        long long jj = static_cast<long long>(j);
        long long sj = jj <= static_cast<long long>(n / 2) ? jj : jj - static_cast<long long>(n);
        double k = 2.0 * std::numbers::pi * static_cast<double>(sj) / length;
        double p = std::norm(buf[j]);
        kin += p * constants.hbar * constants.hbar * k * k / (2.0 * mass);
        total += p;
    }
    double pot = 0.0;
    for (std::size_t i = 0; i < n; ++i) pot += std::norm(w.psi[i]) * potential_at(spec, w.grid.x(i), t);
    return kin / total + pot * w.grid.dx() / w.norm();
}

}  // namespace dkick::quantum
