#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "../constants.hpp"
#include "../csv.hpp"
#include "../parallel.hpp"
#include "core.hpp"
#include "eigen.hpp"
#include "propagator.hpp"

namespace dkick::quantum {

/// Barrier peak and the auxiliary well on its far side from the trap center.
struct WellGeometry {
    bool exists = false;
    int side = 1;              // +1: well at larger x than the peak
    std::size_t peak = 0;      // grid index of the barrier maximum
    std::size_t minimum = 0;   // grid index of the well floor
    std::size_t turn = 0;      // outer point where V climbs back to the peak value
    double v_peak = 0.0;
    double v_min = 0.0;

    double depth() const { return exists ? v_peak - v_min : 0.0; }

    /// Grid indices [begin, end) of the domain beyond the peak.
    std::pair<std::size_t, std::size_t> beyond(std::size_t n) const {
        return side > 0 ? std::pair{peak + 1, n} : std::pair{std::size_t{0}, peak};
    }

    /// Grid indices [begin, end) between the peak and the outer turning point.
    std::pair<std::size_t, std::size_t> region() const {
        return side > 0 ? std::pair{peak + 1, turn + 1} : std::pair{turn, peak};
    }
};

/// Locates the barrier peak near x_c and the local minimum beyond it.
inline WellGeometry find_well(const std::vector<double>& v, const Grid1D& grid, double x_c, double waist) {
    WellGeometry g;
    std::size_t n = v.size();
    g.side = x_c >= 0.0 ? 1 : -1;
    std::size_t p = grid.index_of(x_c);
    std::size_t reach = grid.index_of(x_c + 2.0 * waist) - grid.index_of(x_c);
    if (p + 1 < n && v[p + 1] > v[p]) {
        while (p + 1 < n && v[p + 1] > v[p]) ++p;
    } else {
        while (p > 0 && v[p - 1] > v[p]) --p;
    }
    std::size_t start = grid.index_of(x_c);
    if ((p > start ? p - start : start - p) > reach) return g;
    g.peak = p;
    g.v_peak = v[p];
    if (p == 0 || p + 1 >= n) return g;
    if (!(v[p] > v[p - 1] || v[p] > v[p + 1])) return g;
    long long i = static_cast<long long>(p);
    long long step = g.side;
    long long last = g.side > 0 ? static_cast<long long>(n) - 1 : 0;
    while (i != last && v[i + step] < v[i]) i += step;
    if (i == last || i == static_cast<long long>(p)) return g;
    g.minimum = static_cast<std::size_t>(i);
    g.v_min = v[g.minimum];
    if (!(g.v_min < g.v_peak)) return g;
    while (i != last && v[i] < g.v_peak) i += step;
    g.turn = static_cast<std::size_t>(i);
    g.exists = true;
    return g;
}

inline WellGeometry find_well(const PotentialSpec& spec, const Grid1D& grid, double t) {
    return find_well(sample_potential(spec, grid, t), grid, spec.center.at(t), spec.barrier_waist);
}

struct QuasiBoundStates {
    WellGeometry geometry;
    std::vector<Eigenpair> states;  // embedded on the full grid
    double first_unbound_energy = 0.0;  // next restricted level, used for the secular period of one-state wells
};

/// Eigenstates of the domain beyond the barrier peak (hard wall at the peak) with energy below the peak and
/// more than half their probability between the peak and the outer turning point.
inline QuasiBoundStates quasi_bound_states(const PotentialSpec& spec, const Grid1D& grid, double t,
                                           double mass = AtomSpecies::rubidium85().mass(), std::size_t min_states = 0) {
    QuasiBoundStates out;
    auto v = sample_potential(spec, grid, t);
    out.geometry = find_well(v, grid, spec.center.at(t), spec.barrier_waist);
    if (!out.geometry.exists) return out;
    auto [b, e] = out.geometry.beyond(grid.n);
    std::vector<double> slice(v.begin() + static_cast<long>(b), v.begin() + static_cast<long>(e));
    auto levels = tridiagonal_eigenvalues(slice, grid.dx(), mass);
    std::size_t below = 0;
    while (below < levels.size() && levels[below] < out.geometry.v_peak) ++below;
    std::size_t want = std::min(std::max(below, min_states) + 1, slice.size());
    auto pairs = tridiagonal_eigenpairs(slice, grid.dx(), mass, 0, want - 1);
    auto [r0, r1] = out.geometry.region();
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        Eigenpair full;
        full.energy = pairs[j].energy;
        full.state.assign(grid.n, 0.0);
        std::copy(pairs[j].state.begin(), pairs[j].state.end(), full.state.begin() + static_cast<long>(b));
        double inside = 0.0;
        for (std::size_t i = r0; i < r1; ++i) inside += full.state[i] * full.state[i];
        if (j < below && inside * grid.dx() > 0.5) out.states.push_back(std::move(full));
    }
    if (out.states.size() < pairs.size()) out.first_unbound_energy = pairs[out.states.size()].energy;
    return out;
}

inline int count_quasi_bound_states(const PotentialSpec& spec, const Grid1D& grid, double t = 0.0,
                                    double mass = AtomSpecies::rubidium85().mass()) {
    return static_cast<int>(quasi_bound_states(spec, grid, t, mass).states.size());
}

/// Semiclassical estimate floor(depth / hbar omega) from the curvature at the well floor.
inline int harmonic_state_estimate(const PotentialSpec& spec, const Grid1D& grid, double t,
                                   double mass = AtomSpecies::rubidium85().mass()) {
    auto v = sample_potential(spec, grid, t);
    auto g = find_well(v, grid, spec.center.at(t), spec.barrier_waist);
    if (!g.exists) return 0;
    double h = grid.dx();
    double x = grid.x(g.minimum);
    double curv = (potential_at(spec, x + h, t) - 2.0 * potential_at(spec, x, t) + potential_at(spec, x - h, t)) / (h * h);
    double omega = std::sqrt(curv / mass);
    return static_cast<int>(std::floor(g.depth() / (constants.hbar * omega)));
}

/// Boltzmann weights of the hard-wall grid eigenstates of the bare V-trap.
/// Weights are normalized by the continuum partition function (Airy levels), which the grid sum
/// only approaches as dx resolves thermal momenta.
struct ThermalBasis {
    std::vector<double> potential;
    std::vector<double> energies;  // all grid levels
    std::vector<double> weights;   // first K levels
    double partition = 0.0;        // sum exp(-(E - E0)/kT) over all grid levels
    double normalization = 0.0;    // continuum sum exp(-(E - E0)/kT)
    double neglected = 0.0;        // 1 - sum of weights
    std::size_t size() const { return weights.size(); }
};

inline ThermalBasis thermal_basis(double alpha, const Grid1D& grid, double temperature, double tolerance,
                                  std::size_t max_basis, double mass) {
    if (!(temperature > 0.0)) throw std::domain_error("thermal_basis: temperature must be > 0");
    PotentialSpec bare;
    bare.v_slope = alpha;
    ThermalBasis tb;
    tb.potential = sample_potential(bare, grid, 0.0);
    tb.energies = tridiagonal_eigenvalues(tb.potential, grid.dx(), mass);
    double beta = 1.0 / (constants.k_boltzmann * temperature);
    double e0 = tb.energies.front();
    std::vector<double> boltz(tb.energies.size());
    for (std::size_t i = 0; i < boltz.size(); ++i) boltz[i] = std::exp(-beta * (tb.energies[i] - e0));
    double z = 0.0;
    for (auto it = boltz.rbegin(); it != boltz.rend(); ++it) z += *it;
    tb.partition = z;
    double z_cont = vtrap_partition_function(alpha, mass, temperature) * std::exp(beta * vtrap_level(alpha, mass, 0));
    tb.normalization = z_cont;
    double acc = 0.0;
    std::size_t k = 0;
    while (k < boltz.size() && 1.0 - acc / z_cont >= tolerance) acc += boltz[k++];
    if (1.0 - acc / z_cont >= tolerance)
        throw std::runtime_error("thermal basis: grid levels hold only " + format_number(acc / z_cont) +
                                 " of the continuum partition function; refine dx or widen the grid");
    std::size_t cap = max_basis == 0 ? grid.n : max_basis;
    if (k > cap)
        throw std::runtime_error("thermal basis needs K = " + std::to_string(k) + " states, exceeding grid capacity " +
                                 std::to_string(cap));
    tb.weights.resize(k);
    for (std::size_t i = 0; i < k; ++i) tb.weights[i] = boltz[i] / z_cont;
    tb.neglected = 1.0 - acc / z_cont;
    return tb;
}

struct SweepConfig {
    double temperature = 1.3e-6;
    double v_slope = 300e-6 / 1e-2 * constants.k_boltzmann;  // 300 uK/cm
    double barrier_height = 600e-9 * constants.k_boltzmann;
    double barrier_waist = 20e-6;
    std::vector<std::pair<double, double>> dither{{0.0, 1.0}};
    double x_start = -250e-6;
    double x_stop = 250e-6;
    double speed = 0.5e-3;
    Grid1D grid{-400e-6, 400e-6, 8192};
    double dt = 0.5e-6;
    double weight_tolerance = 1e-3;
    std::size_t max_basis = 0;     // 0: grid size
    std::size_t series_points = 0; // checkpoints of the adjoint time series
    PropagatorOptions propagator{};
    double mass = AtomSpecies::rubidium85().mass();

    double duration() const { return std::abs(x_stop - x_start) / speed; }

    std::size_t steps() const {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration() / dt)));
    }

    PotentialSpec potential() const {
        PotentialSpec p;
        p.v_slope = v_slope;
        p.barrier_height = barrier_height;
        p.barrier_waist = barrier_waist;
        p.dither = dither;
        p.center = Trajectory::linear(x_start, x_stop, duration());
        return p;
    }

    void validate() const {
        if (!(speed > 0.0)) throw std::domain_error("sweep: speed must be > 0");
        if (!(temperature > 0.0)) throw std::domain_error("sweep: temperature must be > 0");
        if (x_start == x_stop) throw std::domain_error("sweep: start and stop coincide");
        if (!(dt > 0.0)) throw std::domain_error("sweep: dt must be > 0");
        potential().validate();
    }

    /// Shortened variant: start/stop scaled by 1/factor at the same speed.
    SweepConfig shortened(double factor) const {
        SweepConfig s = *this;
        s.x_start /= factor;
        s.x_stop /= factor;
        return s;
    }
};

struct SeriesPoint {
    double t = 0.0;
    double transfer = 0.0;
    double absorbed = 0.0;
};

struct SweepResult {
    double transfer = 0.0;
    std::vector<double> bound_energies;     // above the well floor, J
    std::vector<double> bound_populations;  // per final quasi-bound state
    int bound_states = 0;
    double well_depth = 0.0;
    double lowest_state_energy = 0.0;       // above the well floor, J
    double classical_estimate = 0.0;        // sqrt(E0 / k_B T_i)
    std::size_t basis_size = 0;
    double neglected_weight = 0.0;
    double partition_grid = 0.0;
    double partition_continuum = 0.0;       // both partition functions relative to their ground level
    double absorbed = 0.0;                  // weighted absorbed probability of the back-propagated states
    std::vector<SeriesPoint> series;        // transfer of a sweep begun at t from the bare-trap thermal state
};

namespace detail {

struct AdjointJob {
    Wavefunction start;
    std::vector<Wavefunction> checkpoints;  // ordered by forward time, last is t = 0
    std::vector<double> checkpoint_times;
};

/// Back-propagates a final state through the sweep: forward stepping of the reversed trajectory with the absorber
/// applied before each step, so |<phi|result>| equals |<chi|S phi>| for real phi.
inline AdjointJob back_propagate(const std::vector<double>& chi, const SweepConfig& cfg, std::size_t checkpoints) {
    AdjointJob job;
    std::size_t steps = cfg.steps();
    double dt = cfg.duration() / static_cast<double>(steps);
    PotentialSpec rev = cfg.potential();
    rev.center = rev.center.reversed(cfg.duration());
    Wavefunction w;
    w.grid = cfg.grid;
    w.psi.assign(chi.begin(), chi.end());
    SplitOperator op(cfg.grid, rev, dt, cfg.mass, cfg.propagator);
    std::vector<std::size_t> marks;
    for (std::size_t c = 1; c < checkpoints; ++c) marks.push_back(steps * c / checkpoints);
    std::size_t next = 0;
    for (std::size_t s = 0; s < steps; ++s) {
        op.step(w, true);
        if (next < marks.size() && s + 1 == marks[next]) {
            job.checkpoints.push_back(w);
            job.checkpoint_times.push_back(cfg.duration() - static_cast<double>(s + 1) * dt);
            ++next;
        }
    }
    std::reverse(job.checkpoints.begin(), job.checkpoints.end());
    std::reverse(job.checkpoint_times.begin(), job.checkpoint_times.end());
    job.checkpoints.insert(job.checkpoints.begin(), w);
    job.checkpoint_times.insert(job.checkpoint_times.begin(), 0.0);
    return job;
}

/// sum_n w_n |<phi_n|psi_j>|^2 for each psi_j.
inline std::vector<double> thermal_expectations(const ThermalBasis& tb, const Grid1D& grid, double mass,
                                                const std::vector<const Wavefunction*>& states) {
    std::vector<double> out(states.size(), 0.0);
    std::size_t k = tb.size();
    std::size_t n = grid.n;
    double dx = grid.dx();
    auto basis = tridiagonal_lowest_vectors(tb.potential, dx, mass, k);
    parallel_each(states.size(), [&](std::size_t j) {
        const auto& psi = states[j]->psi;
        double acc = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
            const double* phi = basis.data() + m * n;
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                re += phi[i] * psi[i].real();
                im += phi[i] * psi[i].imag();
            }
            acc += tb.weights[m] * (re * re + im * im) * dx * dx;
        }
        out[j] = acc;
    });
    return out;
}

}  // namespace detail

/// Results for several barrier heights that share one thermal basis.
inline std::vector<SweepResult> sweep_transfer_batch(const SweepConfig& base, const std::vector<double>& heights) {
    base.validate();
    auto tb = thermal_basis(base.v_slope, base.grid, base.temperature, base.weight_tolerance, base.max_basis, base.mass);
    std::vector<SweepResult> results(heights.size());
    std::vector<SweepConfig> configs(heights.size(), base);
    struct Item {
        std::size_t config;
        std::size_t state;
    };
    std::vector<Item> items;
    std::vector<QuasiBoundStates> finals(heights.size());
    for (std::size_t h = 0; h < heights.size(); ++h) {
        configs[h].barrier_height = heights[h];
        auto spec = configs[h].potential();
        finals[h] = quasi_bound_states(spec, base.grid, configs[h].duration(), base.mass);
        auto& r = results[h];
        r.bound_states = static_cast<int>(finals[h].states.size());
        r.well_depth = finals[h].geometry.depth();
        for (const auto& s : finals[h].states) r.bound_energies.push_back(s.energy - finals[h].geometry.v_min);
        if (!r.bound_energies.empty()) {
            r.lowest_state_energy = r.bound_energies.front();
            r.classical_estimate = std::sqrt(r.lowest_state_energy / (constants.k_boltzmann * base.temperature));
        }
        r.basis_size = tb.size();
        r.neglected_weight = tb.neglected;
        r.partition_grid = tb.partition;
        r.partition_continuum = tb.normalization;
        r.bound_populations.assign(finals[h].states.size(), 0.0);
        for (std::size_t b = 0; b < finals[h].states.size(); ++b) items.push_back({h, b});
    }
    std::size_t checkpoints = std::max<std::size_t>(1, base.series_points);
    std::vector<detail::AdjointJob> jobs(items.size());
    parallel_each(items.size(), [&](std::size_t i) {
        jobs[i] = detail::back_propagate(finals[items[i].config].states[items[i].state].state, configs[items[i].config],
                                         checkpoints);
    });
    std::vector<const Wavefunction*> ptrs;
    for (const auto& j : jobs)
        for (const auto& c : j.checkpoints) ptrs.push_back(&c);
    auto values = ptrs.empty() ? std::vector<double>{} : detail::thermal_expectations(tb, base.grid, base.mass, ptrs);
    std::size_t at = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto& r = results[items[i].config];
        const auto& job = jobs[i];
        r.bound_populations[items[i].state] = values[at];
        r.transfer += values[at];
        if (base.series_points > 0) {
            if (r.series.empty()) {
                for (double t : job.checkpoint_times) r.series.push_back({t, 0.0, 0.0});
            }
            for (std::size_t c = 0; c < job.checkpoints.size(); ++c) {
                r.series[c].transfer += values[at + c];
                r.series[c].absorbed += job.checkpoints[c].absorbed;
            }
        }
        r.absorbed += job.checkpoints.front().absorbed;
        at += job.checkpoints.size();
    }
    for (std::size_t h = 0; h < heights.size(); ++h) {
        auto& r = results[h];
        if (base.series_points > 0 && r.series.empty()) {
            for (std::size_t c = 0; c < checkpoints; ++c)
                r.series.push_back({configs[h].duration() * static_cast<double>(c) / checkpoints, 0.0, 0.0});
        }
    }
    return results;
}

/// Thermal transfer into the quasi-bound states of the swept well.
inline SweepResult sweep_transfer(const SweepConfig& cfg) {
    return sweep_transfer_batch(cfg, {cfg.barrier_height}).front();
}

/// Direct route: every thermal eigenstate is evolved forward and projected on the final quasi-bound states.
/// Costs K propagations; intended for small grids and cross-checks.
inline SweepResult sweep_transfer_forward(const SweepConfig& cfg) {
    cfg.validate();
    auto tb = thermal_basis(cfg.v_slope, cfg.grid, cfg.temperature, cfg.weight_tolerance, cfg.max_basis, cfg.mass);
    auto spec = cfg.potential();
    auto fin = quasi_bound_states(spec, cfg.grid, cfg.duration(), cfg.mass);
    SweepResult r;
    r.bound_states = static_cast<int>(fin.states.size());
    r.basis_size = tb.size();
    r.partition_grid = tb.partition;
    r.bound_populations.assign(fin.states.size(), 0.0);
    if (fin.states.empty()) return r;
    auto basis = tridiagonal_lowest_vectors(tb.potential, cfg.grid.dx(), cfg.mass, tb.size());
    std::size_t n = cfg.grid.n;
    std::size_t steps = cfg.steps();
    double dt = cfg.duration() / static_cast<double>(steps);
    std::vector<std::vector<double>> pops(tb.size(), std::vector<double>(fin.states.size(), 0.0));
    parallel_each(tb.size(), [&](std::size_t m) {
        Wavefunction w;
        w.grid = cfg.grid;
        w.psi.assign(basis.begin() + static_cast<long>(m * n), basis.begin() + static_cast<long>((m + 1) * n));
        SplitOperator op(cfg.grid, spec, dt, cfg.mass, cfg.propagator);
        for (std::size_t s = 0; s < steps; ++s) op.step(w);
        for (std::size_t b = 0; b < fin.states.size(); ++b) {
            cplx o = 0.0;
            for (std::size_t i = 0; i < cfg.grid.n; ++i) o += fin.states[b].state[i] * w.psi[i];
            o *= cfg.grid.dx();
            pops[m][b] = tb.weights[m] * std::norm(o);
        }
    });
    for (std::size_t m = 0; m < tb.size(); ++m)
        for (std::size_t b = 0; b < fin.states.size(); ++b) r.bound_populations[b] += pops[m][b];
    for (double p : r.bound_populations) r.transfer += p;
    return r;
}

struct DepthPoint {
    double depth = 0.0;  // barrier height U0, J
    double transfer = 0.0;
    int bound_states = 0;
};

/// Transfer and quasi-bound-state count versus barrier height, all else as in base.
inline std::vector<DepthPoint> transfer_vs_depth(const std::vector<double>& depths, const SweepConfig& base) {
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (!(depths[i] > depths[i - 1])) throw std::invalid_argument("transfer_vs_depth: depths must ascend");
    std::vector<double> heights;
    for (double d : depths) {
        if (!(d >= 0.0)) throw std::invalid_argument("transfer_vs_depth: negative depth");
        heights.push_back(d);
    }
    auto results = sweep_transfer_batch(base, heights);
    std::vector<DepthPoint> out;
    for (std::size_t i = 0; i < depths.size(); ++i)
        out.push_back({depths[i], results[i].transfer, results[i].bound_states});
    return out;
}

struct DecayConfig {
    double v_slope = 300e-6 / 1e-2 * constants.k_boltzmann;
    double barrier_height = 267e-9 * constants.k_boltzmann;
    double barrier_waist = 10e-6;
    double barrier_center = 100e-6;
    std::optional<Grid1D> grid;  // default: [x_c - 100 um, x_c + 6 w + 30 um] at dx <= 50 nm
    double dt = 0.5e-6;
    double horizon = 0.3;
    double sample_interval = 1e-3;
    double transient_fraction = 0.1;
    double monotone_tolerance = 1e-3;
    PropagatorOptions propagator{0.1, 3e4, true, true};
    double mass = AtomSpecies::rubidium85().mass();

    PotentialSpec potential() const {
        PotentialSpec p;
        p.v_slope = v_slope;
        p.barrier_height = barrier_height;
        p.barrier_waist = barrier_waist;
        p.center = Trajectory::fixed(barrier_center);
        return p;
    }

    Grid1D resolved_grid() const {
        if (grid) return *grid;
        double lo = barrier_center - 100e-6;
        double hi = barrier_center + 6.0 * barrier_waist + 30e-6;
        std::size_t n = 64;
        while ((hi - lo) / static_cast<double>(n - 1) > 50e-9) n *= 2;
        return Grid1D(lo, hi, n);
    }
};

struct DecayResult {
    double rate = 0.0;             // 1/s
    double secular_period = 0.0;   // s
    double per_period_loss = 0.0;
    double lifetime = 0.0;         // 1/e time, s
    double well_depth = 0.0;
    int bound_states = 0;
    std::vector<SeriesPoint> survival;  // t, probability beyond the peak, absorbed
};

/// Static narrowed barrier; the well's ground state leaks through it.
inline DecayResult tunneling_decay(const DecayConfig& cfg) {
    Grid1D grid = cfg.resolved_grid();
    auto spec = cfg.potential();
    auto qb = quasi_bound_states(spec, grid, 0.0, cfg.mass, 2);
    if (qb.states.empty()) throw std::domain_error("tunneling_decay: configuration has no quasi-bound state");
    DecayResult r;
    r.bound_states = static_cast<int>(qb.states.size());
    r.well_depth = qb.geometry.depth();
    double e1 = qb.states.size() >= 2 ? qb.states[1].energy : qb.first_unbound_energy;
    r.secular_period = constants.planck_h / (e1 - qb.states[0].energy);
    Wavefunction w;
    w.grid = grid;
    w.psi.assign(qb.states[0].state.begin(), qb.states[0].state.end());
    auto [b, e] = qb.geometry.beyond(grid.n);
    std::size_t steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
    std::size_t every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.sample_interval / cfg.dt)));
    SplitOperator op(grid, spec, cfg.dt, cfg.mass, cfg.propagator);
    r.survival.push_back({0.0, w.probability(b, e), 0.0});
    for (std::size_t s = 0; s < steps; ++s) {
        op.step(w);
        if ((s + 1) % every == 0) r.survival.push_back({w.time, w.probability(b, e), w.absorbed});
    }
    for (std::size_t i = 1; i < r.survival.size(); ++i)
        if (r.survival[i].transfer > r.survival[i - 1].transfer + cfg.monotone_tolerance)
            throw std::runtime_error("tunneling_decay: survival rises at t = " + std::to_string(r.survival[i].t) +
                                     " s; reflections suspected, enlarge the grid or absorber");
    double t0 = cfg.transient_fraction * cfg.horizon;
    double sw = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (const auto& p : r.survival) {
        if (p.t < t0 || !(p.transfer > 0.0)) continue;
        double y = std::log(p.transfer);
        sw += 1.0;
        st += p.t;
        sy += y;
        stt += p.t * p.t;
        sty += p.t * y;
    }
    if (sw < 3.0) throw std::runtime_error("tunneling_decay: too few samples after the transient window");
    double slope = (sw * sty - st * sy) / (sw * stt - st * st);
    r.rate = -slope;
    r.per_period_loss = 1.0 - std::exp(-r.rate * r.secular_period);
    r.lifetime = r.rate > 0.0 ? 1.0 / r.rate : INFINITY;
    return r;
}

inline void write_series_csv(std::ostream& os, const std::vector<SeriesPoint>& s) {
    CsvWriter w(os, {"t", "transfer", "absorbed"});
    for (const auto& p : s) w.row(p.t, p.transfer, p.absorbed);
}

}  // namespace dkick::quantum
