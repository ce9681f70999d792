// Truncated Fock space of one qubit and two boson modes, with the sparse
// operator algebra used by every Hamiltonian in the library.
//
// Basis ordering is qubit-major:
//   index = s * (n_max1 + 1) * (n_max2 + 1) + n1 * (n_max2 + 1) + n2
// with s = 0 for the ground level |g> and s = 1 for the excited level |e>.
// sigma_z |e> = +|e>, sigma_z |g> = -|g>, sigma_+ |g> = |e>.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tworabi/error.hpp"

namespace tworabi {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

inline constexpr cplx kI{0.0, 1.0};

enum class Level : int { g = 0, e = 1 };

struct BasisState {
    Level s = Level::g;
    int n1 = 0;
    int n2 = 0;
    friend bool operator==(const BasisState&, const BasisState&) = default;
};

class HilbertSpace {
public:
    // Largest dimension make_space() accepts unless told otherwise.
    static constexpr std::size_t kDefaultDimLimit = 20000;

    HilbertSpace(int n_max1, int n_max2) : n_max1_(n_max1), n_max2_(n_max2) {
        if (n_max1 < 1 || n_max2 < 1)
            throw InvalidArgument("photon cutoffs must be >= 1, got (" + std::to_string(n_max1) +
                                  ", " + std::to_string(n_max2) + ")");
    }

    int n_max1() const { return n_max1_; }
    int n_max2() const { return n_max2_; }
    int n_max(int mode) const {
        if (mode == 1) return n_max1_;
        if (mode == 2) return n_max2_;
        throw InvalidArgument("mode index must be 1 or 2, got " + std::to_string(mode));
    }
    std::size_t mode_block() const { return std::size_t(n_max1_ + 1) * std::size_t(n_max2_ + 1); }
    std::size_t dim() const { return 2 * mode_block(); }

    bool contains(int n1, int n2) const {
        return n1 >= 0 && n2 >= 0 && n1 <= n_max1_ && n2 <= n_max2_;
    }

    std::size_t index(Level s, int n1, int n2) const {
        if (!contains(n1, n2))
            throw InvalidArgument("Fock numbers (" + std::to_string(n1) + ", " + std::to_string(n2) +
                                  ") outside the truncated space");
        return std::size_t(static_cast<int>(s)) * mode_block() + std::size_t(n1) * std::size_t(n_max2_ + 1) +
               std::size_t(n2);
    }
    std::size_t index(const BasisState& b) const { return index(b.s, b.n1, b.n2); }

    BasisState state(std::size_t i) const {
        if (i >= dim()) throw InvalidArgument("basis index out of range");
        const std::size_t block = mode_block();
        const auto s = static_cast<Level>(i / block);
        const std::size_t rest = i % block;
        return {s, int(rest / std::size_t(n_max2_ + 1)), int(rest % std::size_t(n_max2_ + 1))};
    }

    friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

private:
    int n_max1_;
    int n_max2_;
};

inline HilbertSpace make_space(int n_max1, int n_max2,
                               std::size_t dim_limit = HilbertSpace::kDefaultDimLimit) {
    HilbertSpace space(n_max1, n_max2);
    if (space.dim() > dim_limit)
        throw ResourceLimit("dimension " + std::to_string(space.dim()) + " exceeds the limit " +
                            std::to_string(dim_limit));
    return space;
}

inline void require_same_space(const HilbertSpace& a, const HilbertSpace& b) {
    if (!(a == b)) throw SpaceMismatch("operands are bound to different Hilbert spaces");
}

class Operator {
public:
    Operator(HilbertSpace space, SparseMatrix data, bool hermitian_hint = false)
        : space_(space), data_(std::move(data)), hermitian_hint_(hermitian_hint) {
        if (std::size_t(data_.rows()) != space_.dim() || std::size_t(data_.cols()) != space_.dim())
            throw InvalidArgument("operator matrix does not match the space dimension");
        data_.makeCompressed();
    }

    const HilbertSpace& space() const { return space_; }
    const SparseMatrix& data() const { return data_; }
    std::size_t dim() const { return space_.dim(); }
    bool hermitian_hint() const { return hermitian_hint_; }

    cplx operator()(std::size_t row, std::size_t col) const {
        return data_.coeff(Eigen::Index(row), Eigen::Index(col));
    }

    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(data_); }

    Operator with_hint(bool hermitian) const { return Operator(space_, data_, hermitian); }

    friend Operator operator+(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_);
        return Operator(a.space_, a.data_ + b.data_, a.hermitian_hint_ && b.hermitian_hint_);
    }
    friend Operator operator-(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_);
        return Operator(a.space_, a.data_ - b.data_, a.hermitian_hint_ && b.hermitian_hint_);
    }
    friend Operator operator*(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_);
        SparseMatrix prod = (a.data_ * b.data_).pruned();
        return Operator(a.space_, std::move(prod), false);
    }
    friend Operator operator*(double c, const Operator& a) {
        return Operator(a.space_, SparseMatrix(a.data_ * cplx(c, 0.0)), a.hermitian_hint_);
    }
    friend Operator operator*(cplx c, const Operator& a) {
        return Operator(a.space_, SparseMatrix(a.data_ * c), a.hermitian_hint_ && c.imag() == 0.0);
    }

private:
    HilbertSpace space_;
    SparseMatrix data_;
    bool hermitian_hint_;
};

// Largest absolute matrix entry.
inline double max_norm(const SparseMatrix& m) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
    return best;
}
inline double max_norm(const Operator& a) { return max_norm(a.data()); }

inline Operator adjoint(const Operator& a) {
    return Operator(a.space(), SparseMatrix(a.data().adjoint()), a.hermitian_hint());
}

inline Operator multiply(const Operator& a, const Operator& b) { return a * b; }

inline Operator commutator(const Operator& a, const Operator& b) {
    require_same_space(a.space(), b.space());
    return Operator(a.space(), SparseMatrix((a.data() * b.data() - b.data() * a.data()).pruned()), false);
}

inline double hermiticity_defect(const Operator& a) {
    return max_norm(SparseMatrix(a.data() - SparseMatrix(a.data().adjoint())));
}

inline bool is_hermitian(const Operator& a, double tol = 1e-12) { return hermiticity_defect(a) < tol; }

// Linear combination sum_k c_k A_k. The Hermitian hint survives when every
// term is hinted and every coefficient is real.
inline Operator combine(const std::vector<std::pair<cplx, Operator>>& terms) {
    if (terms.empty()) throw InvalidArgument("combine needs at least one term");
    const HilbertSpace& space = terms.front().second.space();
    SparseMatrix acc(Eigen::Index(space.dim()), Eigen::Index(space.dim()));
    bool hermitian = true;
    for (const auto& [c, op] : terms) {
        require_same_space(space, op.space());
        acc += op.data() * c;
        hermitian = hermitian && op.hermitian_hint() && c.imag() == 0.0;
    }
    return Operator(space, acc.pruned(), hermitian);
}

namespace detail {

// Builds an operator from its action on basis states: action(b) yields the
// (coefficient, image) pairs of A|b>. Images outside the box are dropped.
template <class Action>
Operator from_action(const HilbertSpace& space, Action&& action, bool hermitian) {
    std::vector<Eigen::Triplet<cplx>> triplets;
    triplets.reserve(space.dim() * 2);
    for (std::size_t col = 0; col < space.dim(); ++col) {
        const BasisState b = space.state(col);
        action(b, [&](cplx c, const BasisState& image) {
            if (c == cplx(0.0) || !space.contains(image.n1, image.n2)) return;
            triplets.emplace_back(Eigen::Index(space.index(image)), Eigen::Index(col), c);
        });
    }
    SparseMatrix m(Eigen::Index(space.dim()), Eigen::Index(space.dim()));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return Operator(space, std::move(m), hermitian);
}

inline int& mode_count(BasisState& b, int mode) { return mode == 1 ? b.n1 : b.n2; }

inline void check_mode(int mode) {
    if (mode != 1 && mode != 2) throw InvalidArgument("mode index must be 1 or 2, got " + std::to_string(mode));
}

}  // namespace detail

inline Operator zero_operator(const HilbertSpace& space) {
    return Operator(space, SparseMatrix(Eigen::Index(space.dim()), Eigen::Index(space.dim())), true);
}

inline Operator identity(const HilbertSpace& space) {
    SparseMatrix m(Eigen::Index(space.dim()), Eigen::Index(space.dim()));
    m.setIdentity();
    return Operator(space, std::move(m), true);
}

// a_mode: <n-1|a|n> = sqrt(n).
inline Operator annihilation(const HilbertSpace& space, int mode) {
    detail::check_mode(mode);
    return detail::from_action(
        space,
        [mode](const BasisState& b, auto&& emit) {
            BasisState image = b;
            int& n = detail::mode_count(image, mode);
            if (n == 0) return;
            const double amp = std::sqrt(double(n));
            --n;
            emit(cplx(amp), image);
        },
        false);
}

inline Operator creation(const HilbertSpace& space, int mode) { return adjoint(annihilation(space, mode)); }

inline Operator number(const HilbertSpace& space, int mode) {
    detail::check_mode(mode);
    return detail::from_action(
        space,
        [mode](const BasisState& b, auto&& emit) {
            BasisState image = b;
            emit(cplx(double(detail::mode_count(image, mode))), image);
        },
        true);
}

enum class Axis { x, y, z, plus, minus };

inline Axis parse_axis(std::string_view tag) {
    if (tag == "x") return Axis::x;
    if (tag == "y") return Axis::y;
    if (tag == "z") return Axis::z;
    if (tag == "+" || tag == "plus") return Axis::plus;
    if (tag == "-" || tag == "minus") return Axis::minus;
    throw InvalidArgument("unknown Pauli axis '" + std::string(tag) + "'");
}

inline Operator pauli(const HilbertSpace& space, Axis axis) {
    return detail::from_action(
        space,
        [axis](const BasisState& b, auto&& emit) {
            BasisState flipped = b;
            flipped.s = b.s == Level::g ? Level::e : Level::g;
            const bool excited = b.s == Level::e;
            switch (axis) {
                case Axis::x: emit(cplx(1.0), flipped); break;
                // sigma_y |g> = -i |e>, sigma_y |e> = i |g>
                case Axis::y: emit(excited ? kI : -kI, flipped); break;
                case Axis::z: emit(cplx(excited ? 1.0 : -1.0), b); break;
                case Axis::plus:
                    if (!excited) emit(cplx(1.0), flipped);
                    break;
                case Axis::minus:
                    if (excited) emit(cplx(1.0), flipped);
                    break;
            }
        },
        axis == Axis::x || axis == Axis::y || axis == Axis::z);
}

inline Operator pauli(const HilbertSpace& space, std::string_view tag) { return pauli(space, parse_axis(tag)); }

// Basis indices whose total photon number sits at least `margin` levels
// below the smaller cutoff. Operators that conserve n1 + n2 (the SU(2)
// rotations) are exact on these states.
inline std::vector<std::size_t> interior_indices(const HilbertSpace& space, int margin) {
    if (margin < 0) throw InvalidArgument("interior margin must be >= 0");
    const int limit = std::min(space.n_max1(), space.n_max2()) - margin;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisState b = space.state(i);
        if (b.n1 + b.n2 <= limit) out.push_back(i);
    }
    return out;
}

// Max-abs entry of A restricted to rows and columns in `indices`.
inline double max_norm_on(const Operator& a, const std::vector<std::size_t>& indices) {
    std::vector<char> keep(a.dim(), 0);
    for (std::size_t i : indices) keep[i] = 1;
    double best = 0.0;
    const SparseMatrix& m = a.data();
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        if (!keep[std::size_t(k)]) continue;
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            if (keep[std::size_t(it.row())]) best = std::max(best, std::abs(it.value()));
    }
    return best;
}

class QuantumState {
public:
    // Raw amplitudes, no normalization. Used for A|psi> results.
    QuantumState(HilbertSpace space, Eigen::VectorXcd amplitudes)
        : space_(space), amplitudes_(std::move(amplitudes)) {
        if (std::size_t(amplitudes_.size()) != space_.dim())
            throw InvalidArgument("amplitude vector does not match the space dimension");
    }

    static QuantumState normalized(HilbertSpace space, Eigen::VectorXcd amplitudes) {
        const double n = amplitudes.norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite state");
        amplitudes /= n;
        return QuantumState(space, std::move(amplitudes));
    }

    static QuantumState basis(const HilbertSpace& space, Level s, int n1, int n2) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(space.dim()));
        v(Eigen::Index(space.index(s, n1, n2))) = 1.0;
        return QuantumState(space, std::move(v));
    }

    const HilbertSpace& space() const { return space_; }
    const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
    cplx amplitude(Level s, int n1, int n2) const { return amplitudes_(Eigen::Index(space_.index(s, n1, n2))); }
    double norm() const { return amplitudes_.norm(); }
    QuantumState normalized() const { return normalized(space_, amplitudes_); }

private:
    HilbertSpace space_;
    Eigen::VectorXcd amplitudes_;
};

inline QuantumState apply(const Operator& a, const QuantumState& psi) {
    require_same_space(a.space(), psi.space());
    return QuantumState(a.space(), a.data() * psi.amplitudes());
}

inline cplx inner(const QuantumState& psi, const QuantumState& phi) {
    require_same_space(psi.space(), phi.space());
    return psi.amplitudes().dot(phi.amplitudes());  // conjugates the left operand
}

inline cplx expectation(const Operator& a, const QuantumState& psi) {
    require_same_space(a.space(), psi.space());
    return psi.amplitudes().dot(a.data() * psi.amplitudes());
}

}  // namespace tworabi
