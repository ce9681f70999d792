// Ground-state configuration scans, labeled spectrum traces, beam-splitter
// time evolution and the critical-coupling estimator.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tworabi/hilbert.hpp"
#include "tworabi/models.hpp"
#include "tworabi/observables.hpp"
#include "tworabi/solver.hpp"

namespace tworabi {

// Worker count: TWORABI_WORKERS if set, otherwise the hardware concurrency.
inline unsigned default_workers() {
    if (const char* env = std::getenv("TWORABI_WORKERS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return unsigned(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is
// processed exactly once; the first exception is rethrown after joining.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, unsigned(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Inclusive grid of `count` points.
inline std::vector<double> linspace(double start, double stop, std::size_t count) {
    if (count == 0) throw InvalidArgument("grid needs at least one point");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = start;
        return out;
    }
    for (std::size_t i = 0; i < count; ++i)
        out[i] = i + 1 == count ? stop : start + (stop - start) * double(i) / double(count - 1);
    return out;
}

inline ModelKind lab_kind(BeamSplitterModel m) { return m == BeamSplitterModel::H1 ? ModelKind::H1 : ModelKind::H2; }

// ---------------------------------------------------------------------------
// Phase scan

struct ScanOptions {
    ConvergenceSpec convergence{1e-6, 4, 2, 40};
    std::optional<int> fixed_n_max;  // skips convergence when set
    unsigned workers = 0;            // 0: default_workers()
};

struct ScanRow {
    double g1 = 0.0;
    double g2 = 0.0;
    OrderParameters op;
    double e0 = 0.0;
    int n_max = 0;
    bool converged = true;
};

struct ScanTable {
    std::vector<double> g1_grid;
    std::vector<double> g2_grid;
    std::vector<ScanRow> rows;  // row-major in (g1, g2)

    std::vector<std::size_t> flagged() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (!rows[i].converged) out.push_back(i);
        return out;
    }
};

namespace detail {

inline void require_full_resonance(const ModelParams& p) {
    if (!p.fully_resonant()) throw InvalidArgument("this experiment requires omega0 == omega1 == omega2");
}

// Ground state of a lab-frame model at one coupling point, with the
// truncation either fixed or converged on E0 starting from `n_guess`.
inline ConvergenceResult ground_point(ModelKind kind, const ModelParams& p, const ScanOptions& opts, int n_guess) {
    auto solve = [&](int n) { return eigensolve_parity(build_hamiltonian(kind, p, make_space(n, n)), 1); };
    if (opts.fixed_n_max) {
        ConvergenceResult r;
        r.n_max = *opts.fixed_n_max;
        r.system = solve(r.n_max);
        r.value = ground_energy(r.system);
        r.converged = true;
        return r;
    }
    ConvergenceSpec spec = opts.convergence;
    spec.n_start = std::clamp(n_guess - spec.n_step, spec.n_start, spec.n_cap);
    return converge_truncation_solve(solve, ground_energy, spec);
}

}  // namespace detail

// Ground-state order parameters on the (g1, g2) grid. Rows along g2 are
// processed in sequence so each point starts from the previous cutoff; rows
// of different g1 run in parallel. Unconverged points are kept and flagged.
inline ScanTable phase_scan(BeamSplitterModel model, const ModelParams& tmpl, const std::vector<double>& g1_grid,
                            const std::vector<double>& g2_grid, const ScanOptions& opts = {}) {
    tmpl.validate();
    detail::require_full_resonance(tmpl);
    if (g1_grid.empty() || g2_grid.empty()) throw InvalidArgument("scan grids must be non-empty");
    ScanTable table{g1_grid, g2_grid, std::vector<ScanRow>(g1_grid.size() * g2_grid.size())};
    const ModelKind kind = lab_kind(model);
    parallel_for(g1_grid.size(), opts.workers ? opts.workers : default_workers(), [&](std::size_t i) {
        int guess = opts.convergence.n_start;
        for (std::size_t j = 0; j < g2_grid.size(); ++j) {
            ModelParams p = tmpl;
            p.g1 = g1_grid[i];
            p.g2 = g2_grid[j];
            const ConvergenceResult r = detail::ground_point(kind, p, opts, guess);
            guess = r.n_max;
            ScanRow& row = table.rows[i * g2_grid.size() + j];
            row = {p.g1, p.g2, order_parameters(r.system.states.front()), ground_energy(r.system), r.n_max,
                   r.converged};
        }
    });
    return table;
}

// ---------------------------------------------------------------------------
// Spectrum traces

struct SpectrumRow {
    double coupling = 0.0;  // effective g
    double g1 = 0.0;
    double g2 = 0.0;
    std::size_t level = 0;
    double energy = 0.0;
    int parity = 1;
    std::optional<int> secondary;
    int j = 0;
};

struct SpectrumTrace {
    std::vector<SpectrumRow> rows;
};

struct SpectrumOptions {
    int n_max = 24;
    unsigned workers = 0;
};

// k lowest levels at every path point. With labeling, H1 rows carry
// (Rabi parity, n_b, j) and H2 rows (parity, n_d, j); without it, rows carry
// the total parity and the order j inside that parity sector.
inline SpectrumTrace spectrum_trace(ModelKind model, const ModelParams& tmpl,
                                    const std::vector<std::pair<double, double>>& path, std::size_t k, bool labeling,
                                    const SpectrumOptions& opts = {}) {
    tmpl.validate();
    if (model != ModelKind::H1 && model != ModelKind::H2 && model != ModelKind::Rabi)
        throw InvalidArgument("spectrum traces support the rabi, h1 and h2 models");
    if (labeling && !tmpl.resonant_fields()) throw InvalidArgument("labeling requires omega1 == omega2");
    if (labeling && model == ModelKind::H2)
        for (const auto& [g1, g2] : path)
            if (std::abs(g1 - g2) > 1e-12 * std::max(1.0, g1))
                throw InvalidArgument("H2 labeling requires g1 == g2 along the whole path");
    if (k == 0) throw InvalidArgument("k must be >= 1");

    std::vector<std::vector<SpectrumRow>> per_point(path.size());
    parallel_for(path.size(), opts.workers ? opts.workers : default_workers(), [&](std::size_t pi) {
        ModelParams p = tmpl;
        p.g1 = path[pi].first;
        p.g2 = path[pi].second;
        EigenSystem sys;
        if (labeling && model == ModelKind::H1) {
            sys = label_spectrum_h1(p, make_space(opts.n_max, std::max<int>(1, int(k))), k);
        } else if (labeling && model == ModelKind::H2) {
            sys = label_spectrum_h2_equal(p, make_space(opts.n_max, opts.n_max), k);
        } else if (model == ModelKind::Rabi) {
            const std::vector<RabiLevel> levels = rabi_spectrum(p.omega0, p.omega1, p.g1, opts.n_max);
            if (k > levels.size()) throw InvalidArgument("k exceeds the Rabi dimension");
            for (std::size_t i = 0; i < k; ++i) {
                sys.energies.push_back(levels[i].energy);
                sys.labels.push_back(SectorLabel{levels[i].parity, std::nullopt, levels[i].j});
            }
        } else {
            sys = eigensolve_parity(build_hamiltonian(model, p, make_space(opts.n_max, opts.n_max)), k);
            std::map<int, int> counter;
            for (std::size_t i = 0; i < sys.size(); ++i) {
                const int parity = int(std::lround(sys.sector_values[i][0]));
                sys.labels[i] = SectorLabel{parity, std::nullopt, counter[parity]++};
            }
        }
        for (std::size_t i = 0; i < sys.energies.size(); ++i) {
            const SectorLabel& l = *sys.labels[i];
            per_point[pi].push_back({p.g(), p.g1, p.g2, i, sys.energies[i], l.parity, l.secondary, l.j});
        }
    });
    SpectrumTrace trace;
    for (auto& rows : per_point)
        for (auto& r : rows) trace.rows.push_back(r);
    return trace;
}

struct Crossing {
    std::size_t point = 0;  // crossing lies between path points point and point + 1
    SectorLabel a;
    SectorLabel b;
    bool same_sector = false;  // same (parity, secondary)
};

// Branches are followed by label, not by energy order. A crossing is a strict
// sign change of E_a - E_b between consecutive path points; differences below
// `zero_band` count as zero and never produce a sign.
inline std::vector<Crossing> detect_crossings(const SpectrumTrace& trace, double zero_band = 1e-12) {
    std::vector<std::vector<const SpectrumRow*>> points;
    for (const SpectrumRow& r : trace.rows) {
        if (points.empty() || r.level == 0) points.emplace_back();
        points.back().push_back(&r);
    }
    auto sign = [&](double d) { return std::abs(d) < zero_band ? 0 : (d > 0 ? 1 : -1); };
    auto key = [](const SpectrumRow* r) { return SectorLabel{r->parity, r->secondary, r->j}; };
    auto find = [&](const std::vector<const SpectrumRow*>& pt, const SectorLabel& l) -> const SpectrumRow* {
        for (const SpectrumRow* r : pt)
            if (key(r) == l) return r;
        return nullptr;
    };
    std::vector<Crossing> out;
    for (std::size_t p = 0; p + 1 < points.size(); ++p) {
        const auto& here = points[p];
        for (std::size_t x = 0; x < here.size(); ++x)
            for (std::size_t y = x + 1; y < here.size(); ++y) {
                const SectorLabel la = key(here[x]), lb = key(here[y]);
                const SpectrumRow* na = find(points[p + 1], la);
                const SpectrumRow* nb = find(points[p + 1], lb);
                if (!na || !nb) continue;
                const int s0 = sign(here[x]->energy - here[y]->energy);
                const int s1 = sign(na->energy - nb->energy);
                if (s0 * s1 < 0)
                    out.push_back({p, la, lb, la.parity == lb.parity && la.secondary == lb.secondary});
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time evolution

struct EvolutionRow {
    double t = 0.0;
    double sz = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    std::optional<double> fidelity;
    double norm = 1.0;
    double energy = 0.0;  // <H>(t), evaluated with the sparse H
    double parity = 0.0;  // <Pi>(t)
    double leakage = 0.0; // population in the top leakage_levels Fock levels of either mode
};

struct EvolutionTrace {
    std::vector<EvolutionRow> rows;
    double max_leakage = 0.0;
    bool leakage_flag = false;
};

struct WeakReference {
    BeamSplitterModel model;
    ModelParams params;
};

struct EvolveOptions {
    std::optional<WeakReference> reference;  // fidelity column source
    int leakage_levels = 2;
    double leakage_tol = 1e-6;
};

inline QuantumState propagate(const DenseEigen& eig, const Eigen::VectorXcd& coeffs, const HilbertSpace& space,
                              double t) {
    const Eigen::VectorXcd phases = (-kI * t * eig.values.cast<cplx>()).array().exp();
    return QuantumState(space, eig.vectors * phases.cwiseProduct(coeffs));
}

// psi(t) = sum_k exp(-i E_k t) <k|psi0> |k> from one full eigendecomposition.
inline EvolutionTrace evolve(const Operator& h, const QuantumState& psi0, const std::vector<double>& times,
                             const EvolveOptions& opts = {}) {
    require_same_space(h.space(), psi0.space());
    detail::check_hermitian_input(h);
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw InvalidArgument("evolution times must be strictly increasing");
    const HilbertSpace& sp = h.space();
    const DenseEigen eig = hermitian_eigen(h.dense());
    const Eigen::VectorXcd coeffs = eig.vectors.adjoint() * psi0.amplitudes();
    const Operator parity = parity_operator(sp);

    std::vector<std::size_t> top;  // basis states in the leakage window
    for (std::size_t i = 0; i < sp.dim(); ++i) {
        const BasisState b = sp.state(i);
        if (b.n1 > sp.n_max1() - opts.leakage_levels || b.n2 > sp.n_max2() - opts.leakage_levels) top.push_back(i);
    }

    EvolutionTrace trace;
    for (double t : times) {
        const QuantumState psi = propagate(eig, coeffs, sp, t);
        const OrderParameters op = order_parameters(psi);
        EvolutionRow row;
        row.t = t;
        row.sz = op.sz;
        row.n1 = op.n1;
        row.n2 = op.n2;
        row.norm = psi.norm();
        row.energy = expectation(h, psi).real();
        row.parity = expectation(parity, psi).real();
        for (std::size_t i : top) row.leakage += std::norm(psi.amplitudes()(Eigen::Index(i)));
        if (opts.reference) {
            const QuantumState mapped = free_phase_map(psi, opts.reference->params, t);
            row.fidelity = fidelity(weak_coupling_state(opts.reference->model, opts.reference->params, t, sp), mapped);
        }
        trace.max_leakage = std::max(trace.max_leakage, row.leakage);
        trace.rows.push_back(row);
    }
    trace.leakage_flag = trace.max_leakage >= opts.leakage_tol;
    return trace;
}

// Beam-splitter run: H1 or H2 from |e,0,0> with the matching weak-coupling
// reference state for the fidelity column.
inline EvolutionTrace beam_splitter_run(BeamSplitterModel model, const ModelParams& p, int n_max,
                                        const std::vector<double>& times) {
    detail::require_full_resonance(p);
    const HilbertSpace sp = make_space(n_max, n_max);
    EvolveOptions opts;
    opts.reference = WeakReference{model, p};
    return evolve(build_hamiltonian(lab_kind(model), p, sp), QuantumState::basis(sp, Level::e, 0, 0), times, opts);
}

// Index of the first local minimum of sz along the trace (the first
// transfer time), or the global minimum when sz is monotone.
inline std::size_t first_transfer_index(const EvolutionTrace& trace) {
    const auto& r = trace.rows;
    for (std::size_t i = 1; i + 1 < r.size(); ++i)
        if (r[i].sz < r[i - 1].sz && r[i].sz <= r[i + 1].sz) return i;
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.size(); ++i)
        if (r[i].sz < r[best].sz) best = i;
    return best;
}

// ---------------------------------------------------------------------------
// Critical coupling

struct CriticalOptions {
    double eps = 0.1;     // photon-number threshold
    double step = 0.01;   // coupling step along the ray
    double g_max = 2.0;   // last coupling tried
    ConvergenceSpec convergence{1e-10, 4, 2, 40};
};

struct CriticalEstimate {
    double g_star = 0.0;
    double g_below = 0.0;
    double g_above = 0.0;
    double photons_below = 0.0;
    double photons_above = 0.0;
    int n_max = 0;
    std::size_t evaluations = 0;
};

// Coupling magnitude along the unit ray (u1, u2) at which the ground-state
// photon number n1 + n2 first exceeds eps, linearly interpolated between the
// bracketing grid points.
inline CriticalEstimate critical_coupling_estimate(BeamSplitterModel model, const ModelParams& tmpl, double u1,
                                                   double u2, const CriticalOptions& opts = {}) {
    tmpl.validate();
    detail::require_full_resonance(tmpl);
    const double len = std::hypot(u1, u2);
    if (!(len > 0.0) || u1 < 0.0 || u2 < 0.0) throw InvalidArgument("direction must be a non-zero, non-negative vector");
    if (!(opts.eps > 0.0) || !(opts.step > 0.0) || !(opts.g_max > 0.0)) throw InvalidArgument("invalid estimator options");
    u1 /= len;
    u2 /= len;
    ScanOptions scan;
    scan.convergence = opts.convergence;
    CriticalEstimate est;
    double prev_g = 0.0, prev_n = 0.0;
    int guess = scan.convergence.n_start;
    const std::size_t steps = std::size_t(std::floor(opts.g_max / opts.step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
        const double g = double(i) * opts.step;
        ModelParams p = tmpl;
        p.g1 = g * u1;
        p.g2 = g * u2;
        const ConvergenceResult r = detail::ground_point(lab_kind(model), p, scan, guess);
        if (!r.converged) throw ConvergenceError("ground state did not converge at g = " + std::to_string(g));
        guess = r.n_max;
        ++est.evaluations;
        const OrderParameters op = order_parameters(r.system.states.front());
        const double photons = op.n1 + op.n2;
        if (photons > opts.eps) {
            if (i == 0) throw ConvergenceError("threshold already exceeded at g = 0");
            est.g_below = prev_g;
            est.g_above = g;
            est.photons_below = prev_n;
            est.photons_above = photons;
            est.g_star = prev_g + (opts.eps - prev_n) / (photons - prev_n) * (g - prev_g);
            est.n_max = r.n_max;
            return est;
        }
        prev_g = g;
        prev_n = photons;
    }
    throw ConvergenceError("photon number never exceeds eps = " + std::to_string(opts.eps) + " up to g = " +
                           std::to_string(opts.g_max));
}

}  // namespace tworabi
