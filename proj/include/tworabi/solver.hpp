// Hermitian eigensolution with symmetry-sector blocking, sector-labeled
// spectra of the resonant-field models, and truncation convergence control.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tworabi/hilbert.hpp"
#include "tworabi/linalg.hpp"
#include "tworabi/models.hpp"

namespace tworabi {

struct SectorLabel {
    int parity = 1;                  // +1 or -1
    std::optional<int> secondary;    // n_b (H1) or n_d (H2 at g1 = g2)
    int j = 0;                       // ordering inside (parity, secondary)
    friend bool operator==(const SectorLabel&, const SectorLabel&) = default;
};

enum class Frame { lab, displaced };

struct EigenSystem {
    std::vector<double> energies;  // ascending
    std::vector<QuantumState> states;
    std::vector<std::optional<SectorLabel>> labels;
    // Eigenvalues of the blocking symmetries, one entry per state (empty
    // inner vectors when no symmetries were used).
    std::vector<std::vector<double>> sector_values;
    Frame frame = Frame::lab;

    std::size_t size() const { return energies.size(); }
};

struct EigenOptions {
    // Number of lowest eigenpairs to keep; all when empty.
    std::optional<std::size_t> k;
    // Operators diagonal in the Fock basis that commute with H. The matrix is
    // split into their joint eigenspaces before diagonalization.
    std::vector<Operator> symmetries;
    // Neighbouring eigenvalues closer than degeneracy_tol * max(1, |E|) form
    // one cluster.
    double degeneracy_tol = 1e-9;
};

// Sector eigenvalues are binned to the nearest half integer.
inline double bin_half_integer(double v, double tol = 1e-6) {
    const double r = std::round(2.0 * v) / 2.0;
    if (std::abs(r - v) > tol)
        throw InvalidArgument("sector eigenvalue " + std::to_string(v) + " is not on the half-integer grid");
    return r;
}

namespace detail {

inline bool is_diagonal(const SparseMatrix& m) {
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            if (it.row() != it.col() && it.value() != cplx(0.0)) return false;
    return true;
}

inline void check_hermitian_input(const Operator& h) {
    const double scale = std::max(1.0, max_norm(h));
    if (hermiticity_defect(h) > 1e-10 * scale) throw InvalidArgument("eigensolve requires a Hermitian operator");
}

inline void check_conserved(const Operator& h, const Operator& s, double tol) {
    const double defect = max_norm(commutator(h, s));
    if (defect >= tol)
        throw NotConserved("operator does not commute with H (max |[H,S]| = " + std::to_string(defect) + ")");
}

// Fixes the basis of a degenerate eigenspace: project basis vectors e_i in
// ascending index order, Gram-Schmidt them, keep the first m independent ones.
inline Eigen::MatrixXcd canonical_basis(const Eigen::MatrixXcd& v) {
    const Eigen::Index m = v.cols();
    if (m == 1) return v;
    Eigen::MatrixXcd out(v.rows(), m);
    Eigen::Index found = 0;
    for (Eigen::Index i = 0; i < v.rows() && found < m; ++i) {
        Eigen::VectorXcd w = v * v.row(i).adjoint();
        for (Eigen::Index c = 0; c < found; ++c) w -= out.col(c) * out.col(c).dot(w);
        const double n = w.norm();
        if (n > 1e-6) out.col(found++) = w / n;
    }
    if (found < m) return v;
    return out;
}

// Makes the first amplitude above `tol` real and positive.
inline void fix_phase(Eigen::Ref<Eigen::VectorXcd> v, double tol = 1e-8) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > tol) {
            v *= std::conj(v(i)) / a;
            return;
        }
    }
}

inline void canonicalize(DenseEigen& eig, double rel_tol) {
    const Eigen::Index n = eig.values.size();
    if (n == 0) return;
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && eig.values(stop) - eig.values(stop - 1) < rel_tol * std::max(1.0, std::abs(eig.values(stop))))
            ++stop;
        if (stop - start > 1)
            eig.vectors.middleCols(start, stop - start) = canonical_basis(eig.vectors.middleCols(start, stop - start));
        start = stop;
    }
    for (Eigen::Index c = 0; c < n; ++c) fix_phase(eig.vectors.col(c));
}

}  // namespace detail

// Eigenpairs of a Hermitian operator in ascending energy. Ties inside a
// degenerate cluster are ordered by ascending sector values, then by the
// canonical in-block order, so the output is deterministic.
inline EigenSystem eigensolve(const Operator& h, const EigenOptions& opts = {}) {
    detail::check_hermitian_input(h);
    const std::size_t dim = h.dim();
    if (opts.k && *opts.k > dim)
        throw InvalidArgument("requested " + std::to_string(*opts.k) + " eigenpairs from dimension " +
                              std::to_string(dim));

    // Joint sector key per basis index.
    std::map<std::vector<double>, std::vector<std::size_t>> sectors;
    {
        std::vector<std::vector<double>> keys(dim);
        for (const Operator& s : opts.symmetries) {
            require_same_space(h.space(), s.space());
            if (!detail::is_diagonal(s.data()))
                throw InvalidArgument("blocking symmetries must be diagonal in the Fock basis");
            detail::check_conserved(h, s, 1e-8);
            for (std::size_t i = 0; i < dim; ++i) keys[i].push_back(bin_half_integer(s(i, i).real()));
        }
        for (std::size_t i = 0; i < dim; ++i) sectors[keys[i]].push_back(i);
    }

    struct Pair {
        double energy;
        std::vector<double> key;
        std::size_t order;
        Eigen::VectorXcd vec;
    };
    std::vector<Pair> pairs;
    pairs.reserve(dim);
    const Eigen::MatrixXcd full = sectors.size() == 1 ? h.dense() : Eigen::MatrixXcd();
    for (const auto& [key, idx] : sectors) {
        DenseEigen eig = hermitian_eigen(sectors.size() == 1 ? full : detail::submatrix(h.data(), idx));
        detail::canonicalize(eig, opts.degeneracy_tol);
        for (Eigen::Index c = 0; c < eig.values.size(); ++c) {
            Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(dim));
            for (std::size_t r = 0; r < idx.size(); ++r) v(Eigen::Index(idx[r])) = eig.vectors(Eigen::Index(r), c);
            pairs.push_back({eig.values(c), key, std::size_t(c), std::move(v)});
        }
    }

    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.energy < b.energy; });
    for (std::size_t start = 0; start < pairs.size();) {
        std::size_t stop = start + 1;
        while (stop < pairs.size() && pairs[stop].energy - pairs[stop - 1].energy <
                                          opts.degeneracy_tol * std::max(1.0, std::abs(pairs[stop].energy)))
            ++stop;
        std::sort(pairs.begin() + long(start), pairs.begin() + long(stop), [](const Pair& a, const Pair& b) {
            return a.key != b.key ? a.key < b.key : a.order < b.order;
        });
        start = stop;
    }

    const std::size_t keep = opts.k.value_or(dim);
    EigenSystem out;
    out.energies.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        out.energies.push_back(pairs[i].energy);
        out.states.emplace_back(h.space(), std::move(pairs[i].vec));
        out.labels.emplace_back(std::nullopt);
        out.sector_values.push_back(pairs[i].key);
    }
    return out;
}

inline EigenSystem eigensolve(const Operator& h, std::size_t k) {
    EigenOptions opts;
    opts.k = k;
    return eigensolve(h, opts);
}

// Lab-frame eigensolve split by parity, the symmetry every model here has.
inline EigenSystem eigensolve_parity(const Operator& h, std::optional<std::size_t> k = std::nullopt) {
    EigenOptions opts;
    opts.k = k;
    opts.symmetries.push_back(parity_operator(h.space()));
    return eigensolve(h, opts);
}

struct SectorBlock {
    double value;                // binned eigenvalue of S
    Eigen::MatrixXcd block;      // E^dagger H E
    Eigen::MatrixXcd embedding;  // dim x m isometry into the full space
};

// Splits H into the eigenspaces of a conserved Hermitian S, in ascending
// order of the sector value.
inline std::vector<SectorBlock> sector_split(const Operator& h, const Operator& s) {
    require_same_space(h.space(), s.space());
    if (!is_hermitian(s, 1e-10)) throw InvalidArgument("sector operator must be Hermitian");
    detail::check_conserved(h, s, 1e-8);
    const Eigen::Index dim = Eigen::Index(h.dim());

    std::map<double, std::vector<Eigen::VectorXcd>> columns;
    if (detail::is_diagonal(s.data())) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
            e(i) = 1.0;
            columns[bin_half_integer(s(std::size_t(i), std::size_t(i)).real())].push_back(std::move(e));
        }
    } else {
        const DenseEigen eig = hermitian_eigen(s.dense());
        for (Eigen::Index c = 0; c < dim; ++c) columns[bin_half_integer(eig.values(c))].push_back(eig.vectors.col(c));
    }

    const Eigen::MatrixXcd full = h.dense();
    std::vector<SectorBlock> out;
    for (auto& [value, cols] : columns) {
        Eigen::MatrixXcd e(dim, Eigen::Index(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) e.col(Eigen::Index(c)) = cols[c];
        out.push_back({value, e.adjoint() * full * e, e});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Labeled spectra

// One eigenpair of the single-mode Rabi problem on the (qubit, mode) space of
// dimension 2 (n_max + 1), basis index s * (n_max + 1) + n.
struct RabiLevel {
    double energy;
    int parity;  // (-1)^n for |g,n>, -(-1)^n for |e,n>
    int j;
    Eigen::VectorXcd state;
};

// Rabi spectrum w0/2 sz + w a^dag a + g (a + a^dag) sx, solved per parity.
inline std::vector<RabiLevel> rabi_spectrum(double omega0, double omega, double g, int n_max) {
    if (n_max < 1) throw InvalidArgument("Rabi cutoff must be >= 1");
    const int levels = n_max + 1;
    std::vector<RabiLevel> out;
    for (int parity : {1, -1}) {
        std::vector<int> idx;  // full Rabi indices in this parity
        for (int s = 0; s < 2; ++s)
            for (int n = 0; n < levels; ++n) {
                const int p = ((n % 2 == 0) ? 1 : -1) * (s == 0 ? 1 : -1);
                if (p == parity) idx.push_back(s * levels + n);
            }
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index(idx.size()), Eigen::Index(idx.size()));
        auto pos = [&](int full) {
            return Eigen::Index(std::find(idx.begin(), idx.end(), full) - idx.begin());
        };
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const int s = idx[r] / levels, n = idx[r] % levels;
            m(Eigen::Index(r), Eigen::Index(r)) = (s == 1 ? 0.5 : -0.5) * omega0 + omega * n;
            // g (a + a^dag) flips the qubit and moves n by one
            if (n + 1 < levels) {
                const Eigen::Index c = pos((1 - s) * levels + n + 1);
                m(Eigen::Index(r), c) = m(c, Eigen::Index(r)) = g * std::sqrt(double(n + 1));
            }
        }
        DenseEigen eig = hermitian_eigen(m.cast<cplx>());
        detail::canonicalize(eig, 1e-9);
        for (Eigen::Index c = 0; c < eig.values.size(); ++c) {
            Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * levels);
            for (std::size_t r = 0; r < idx.size(); ++r) v(idx[r]) = eig.vectors(Eigen::Index(r), c);
            out.push_back({eig.values(c), parity, int(c), std::move(v)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const RabiLevel& a, const RabiLevel& b) { return a.energy < b.energy; });
    return out;
}

// Spectrum of H1 at resonant fields labeled by (Rabi parity, n_b, j), where
// n_b is the displaced-frame photon number of mode 2. Energies are
// w n_b + E_Rabi(parity, j) with the Rabi problem truncated at n_max1 and
// n_b <= n_max2. States are mapped back to the lab frame with D^dagger(xi).
inline EigenSystem label_spectrum_h1(const ModelParams& p, const HilbertSpace& space, std::size_t k) {
    p.validate();
    if (!p.resonant_fields()) throw InvalidArgument("H1 labeling requires omega1 == omega2");
    if (k > space.dim()) throw InvalidArgument("requested more levels than the space holds");
    const double omega = p.omega1;
    const std::vector<RabiLevel> rabi = rabi_spectrum(p.omega0, omega, p.g(), space.n_max1());

    struct Candidate {
        double energy;
        int n_b;
        const RabiLevel* level;
    };
    std::vector<Candidate> cands;
    for (int nb = 0; nb <= space.n_max2(); ++nb)
        for (const RabiLevel& r : rabi) cands.push_back({omega * nb + r.energy, nb, &r});
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.energy < b.energy;
    });
    for (std::size_t start = 0; start < cands.size();) {
        std::size_t stop = start + 1;
        while (stop < cands.size() &&
               cands[stop].energy - cands[stop - 1].energy < 1e-9 * std::max(1.0, std::abs(cands[stop].energy)))
            ++stop;
        std::sort(cands.begin() + long(start), cands.begin() + long(stop), [](const Candidate& a, const Candidate& b) {
            if (a.n_b != b.n_b) return a.n_b < b.n_b;
            if (a.level->parity != b.level->parity) return a.level->parity > b.level->parity;
            return a.level->j < b.level->j;
        });
        start = stop;
    }

    const Operator d_dag = adjoint(displacement_d(space, p.xi()));
    const int levels = space.n_max1() + 1;
    EigenSystem out;
    out.frame = Frame::lab;
    for (std::size_t i = 0; i < k; ++i) {
        const Candidate& c = cands[i];
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(space.dim()));
        for (int s = 0; s < 2; ++s)
            for (int n = 0; n < levels; ++n)
                v(Eigen::Index(space.index(static_cast<Level>(s), n, c.n_b))) = c.level->state(s * levels + n);
        out.energies.push_back(c.energy);
        out.states.push_back(apply(d_dag, QuantumState(space, std::move(v))));
        out.labels.push_back(SectorLabel{c.level->parity, c.n_b, c.level->j});
        const int total_parity = c.level->parity * (c.n_b % 2 == 0 ? 1 : -1);
        out.sector_values.push_back({double(total_parity)});
    }
    return out;
}

// Spectrum of H2 at resonant fields and equal couplings, labeled by
// (parity, n_d, j) with n_d the eigenvalue of the script-N operator. The
// Hamiltonian diagonalized is H2RF, so states live in the displaced frame.
inline EigenSystem label_spectrum_h2_equal(const ModelParams& p, const HilbertSpace& space, std::size_t k) {
    p.validate();
    if (!p.resonant_fields()) throw InvalidArgument("H2 labeling requires omega1 == omega2");
    if (!p.equal_couplings()) throw InvalidArgument("H2 labeling requires g1 == g2");
    const ConservedOps ops = conserved_ops(space);
    EigenOptions opts;
    opts.symmetries = {ops.n_script, ops.parity};
    EigenSystem sys = eigensolve(build_hamiltonian(ModelKind::H2RF, p, space), opts);
    std::map<std::pair<int, int>, int> counter;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const int n_d = int(std::lround(sys.sector_values[i][0]));
        const int parity = int(std::lround(sys.sector_values[i][1]));
        sys.labels[i] = SectorLabel{parity, n_d, counter[{parity, n_d}]++};
    }
    if (k > sys.size()) throw InvalidArgument("requested more levels than the space holds");
    sys.energies.resize(k);
    sys.states.erase(sys.states.begin() + long(k), sys.states.end());
    sys.labels.resize(k);
    sys.sector_values.resize(k);
    sys.frame = Frame::displaced;
    return sys;
}

// ---------------------------------------------------------------------------
// Truncation convergence

struct ConvergenceResult {
    int n_max = 0;
    double value = 0.0;
    bool converged = false;
    EigenSystem system;  // solution at n_max
};

struct ConvergenceSpec {
    double tol = 1e-6;
    int n_start = 4;
    int n_step = 2;
    int n_cap = 40;
};

using SystemBuilder = std::function<EigenSystem(int n_max)>;
using Observable = std::function<double(const EigenSystem&)>;

// Smallest tested n_max with |value(n) - value(n - step)| < tol. Returns the
// last evaluated point with converged = false when the cap is reached;
// converge_truncation_or_throw turns that into a ConvergenceError.
inline ConvergenceResult converge_truncation_solve(const SystemBuilder& solve, const Observable& observable,
                                                   const ConvergenceSpec& spec) {
    if (!(spec.tol > 0.0)) throw InvalidArgument("convergence tolerance must be > 0");
    if (spec.n_step < 1 || spec.n_start < 1 || spec.n_cap < spec.n_start)
        throw InvalidArgument("invalid truncation schedule");
    ConvergenceResult res;
    int n = spec.n_start;
    res.system = solve(n);
    res.value = observable(res.system);
    res.n_max = n;
    while (n + spec.n_step <= spec.n_cap) {
        n += spec.n_step;
        EigenSystem sys = solve(n);
        const double v = observable(sys);
        const bool done = std::abs(v - res.value) < spec.tol;
        res = {n, v, done, std::move(sys)};
        if (done) return res;
    }
    return res;
}

// Operator-builder form: solves every builder(n) with a parity-blocked full
// eigensolve.
inline ConvergenceResult converge_truncation(const std::function<Operator(int)>& builder,
                                             const Observable& observable, const ConvergenceSpec& spec) {
    return converge_truncation_solve([&](int n) { return eigensolve_parity(builder(n)); }, observable, spec);
}

inline ConvergenceResult converge_truncation_or_throw(const std::function<Operator(int)>& builder,
                                                      const Observable& observable, const ConvergenceSpec& spec) {
    ConvergenceResult r = converge_truncation(builder, observable, spec);
    if (!r.converged)
        throw ConvergenceError("truncation did not converge below n_max = " + std::to_string(spec.n_cap) +
                               " (last value " + std::to_string(r.value) + ")");
    return r;
}

inline double ground_energy(const EigenSystem& sys) { return sys.energies.front(); }

}  // namespace tworabi
