#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "tworabi/hilbert.hpp"

using namespace tworabi;

namespace {

QuantumState random_state(const HilbertSpace& sp, std::mt19937& rng, int below_cutoff_margin = 0) {
    std::normal_distribution<double> dist;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(sp.dim()));
    for (std::size_t i = 0; i < sp.dim(); ++i) {
        const BasisState b = sp.state(i);
        if (b.n1 > sp.n_max1() - below_cutoff_margin || b.n2 > sp.n_max2() - below_cutoff_margin) continue;
        v(Eigen::Index(i)) = cplx(dist(rng), dist(rng));
    }
    return QuantumState::normalized(sp, v);
}

}  // namespace

TEST(HilbertSpace, Dimensions) {
    EXPECT_EQ(make_space(1, 1).dim(), 8u);
    EXPECT_EQ(make_space(20, 20).dim(), 882u);
    EXPECT_EQ(make_space(3, 5).dim(), 2u * 4u * 6u);
}

TEST(HilbertSpace, RejectsBadCutoffs) {
    EXPECT_THROW(make_space(0, 3), InvalidArgument);
    EXPECT_THROW(make_space(3, -1), InvalidArgument);
    EXPECT_THROW(make_space(200, 200), ResourceLimit);
    EXPECT_THROW(make_space(10, 10, 100), ResourceLimit);
}

TEST(HilbertSpace, EnumeratesEveryTupleOnce) {
    const HilbertSpace sp = make_space(2, 1);
    std::set<std::tuple<int, int, int>> seen;
    for (std::size_t i = 0; i < sp.dim(); ++i) {
        const BasisState b = sp.state(i);
        seen.insert({static_cast<int>(b.s), b.n1, b.n2});
        EXPECT_EQ(sp.index(b), i);
    }
    EXPECT_EQ(seen.size(), 12u);
}

TEST(HilbertSpace, QubitMajorOrdering) {
    const HilbertSpace sp = make_space(3, 4);
    EXPECT_EQ(sp.index(Level::g, 0, 0), 0u);
    EXPECT_EQ(sp.index(Level::g, 0, 1), 1u);
    EXPECT_EQ(sp.index(Level::g, 1, 0), 5u);
    EXPECT_EQ(sp.index(Level::e, 0, 0), 20u);
    EXPECT_THROW(sp.index(Level::g, 4, 0), InvalidArgument);
}

TEST(Ladder, MatrixElements) {
    const HilbertSpace sp = make_space(3, 2);
    const Operator a1 = annihilation(sp, 1);
    EXPECT_DOUBLE_EQ(a1(sp.index(Level::g, 0, 0), sp.index(Level::g, 1, 0)).real(), 1.0);
    EXPECT_NEAR(a1(sp.index(Level::e, 1, 2), sp.index(Level::e, 2, 2)).real(), 1.41421356, 1e-8);
    const Operator ad2 = creation(sp, 2);
    EXPECT_NEAR(ad2(sp.index(Level::g, 3, 2), sp.index(Level::g, 3, 1)).real(), std::sqrt(2.0), 1e-15);
    EXPECT_THROW(annihilation(sp, 3), InvalidArgument);
}

// Oracle: [a, a^dag] on a cutoff-3 mode is diag(1, 1, 1, -3) = 1 - 4 P_top,
// written out by hand.
TEST(Ladder, TruncatedCommutatorDefect) {
    const HilbertSpace sp = make_space(3, 3);
    const Operator c = commutator(annihilation(sp, 1), creation(sp, 1));
    const double expected_diag[4] = {1.0, 1.0, 1.0, -3.0};
    double off_diag = 0.0;
    for (std::size_t r = 0; r < sp.dim(); ++r)
        for (std::size_t col = 0; col < sp.dim(); ++col) {
            if (r == col) {
                EXPECT_NEAR(c(r, col).real(), expected_diag[sp.state(r).n1], 1e-14);
            } else {
                off_diag = std::max(off_diag, std::abs(c(r, col)));
            }
        }
    EXPECT_EQ(off_diag, 0.0);

    // Interior levels (n <= n_max - 1) see the exact identity.
    const Operator defect = c - identity(sp);
    EXPECT_LT(max_norm_on(defect, interior_indices(sp, 1)), 1e-12);
}

TEST(Pauli, Algebra) {
    const HilbertSpace sp = make_space(2, 2);
    const Operator sx = pauli(sp, Axis::x), sy = pauli(sp, Axis::y), sz = pauli(sp, Axis::z);
    EXPECT_LT(max_norm(sx * sx - identity(sp)), 1e-15);
    EXPECT_LT(max_norm(commutator(sz, sx) - cplx(0, 2) * sy), 1e-15);
    const Operator sp_from_xy = combine({{0.5, sx}, {cplx(0, 0.5), sy}});
    EXPECT_LT(max_norm(sp_from_xy - pauli(sp, Axis::plus)), 1e-15);
    EXPECT_LT(max_norm(combine({{0.5, sx}, {cplx(0, -0.5), sy}}) - pauli(sp, "-")), 1e-15);
    EXPECT_THROW(pauli(sp, "w"), InvalidArgument);
}

TEST(Pauli, ActionOnBasis) {
    const HilbertSpace sp = make_space(1, 1);
    const auto e00 = QuantumState::basis(sp, Level::e, 0, 0);
    const auto g00 = QuantumState::basis(sp, Level::g, 0, 0);
    EXPECT_NEAR(expectation(pauli(sp, Axis::z), e00).real(), 1.0, 1e-15);
    EXPECT_NEAR(expectation(pauli(sp, Axis::z), g00).real(), -1.0, 1e-15);
    const QuantumState raised = apply(pauli(sp, Axis::plus), g00);
    EXPECT_NEAR(std::abs(inner(e00, raised) - cplx(1.0)), 0.0, 1e-15);
}

TEST(Algebra, AdjointAndHermiticity) {
    const HilbertSpace sp = make_space(3, 3);
    const Operator a1 = annihilation(sp, 1), a2 = annihilation(sp, 2);
    const Operator ad1 = adjoint(a1);
    EXPECT_NEAR(ad1(sp.index(Level::g, 2, 0), sp.index(Level::g, 1, 0)).real(), std::sqrt(2.0), 1e-15);
    const Operator hop = combine({{1.0, ad1 * a2}, {1.0, a1 * adjoint(a2)}});
    EXPECT_TRUE(is_hermitian(hop));
    for (const Operator& op : {number(sp, 1), number(sp, 2), pauli(sp, Axis::x), pauli(sp, Axis::y),
                               pauli(sp, Axis::z), identity(sp)}) {
        EXPECT_TRUE(op.hermitian_hint());
        EXPECT_LT(hermiticity_defect(op), 1e-12);
    }
}

TEST(Algebra, SpaceMismatchIsRejected) {
    const HilbertSpace a = make_space(2, 2), b = make_space(2, 3);
    EXPECT_THROW(number(a, 1) + number(b, 1), SpaceMismatch);
    EXPECT_THROW(commutator(number(a, 1), number(b, 1)), SpaceMismatch);
    EXPECT_THROW(expectation(number(a, 1), QuantumState::basis(b, Level::g, 0, 0)), SpaceMismatch);
    EXPECT_THROW(inner(QuantumState::basis(a, Level::g, 0, 0), QuantumState::basis(b, Level::g, 0, 0)),
                 SpaceMismatch);
}

TEST(States, Expectations) {
    const HilbertSpace sp = make_space(3, 3);
    EXPECT_NEAR(expectation(pauli(sp, Axis::z), QuantumState::basis(sp, Level::g, 0, 0)).real(), -1.0, 1e-15);
    EXPECT_NEAR(expectation(number(sp, 1), QuantumState::basis(sp, Level::g, 1, 0)).real(), 1.0, 1e-15);
    std::mt19937 rng(7);
    const QuantumState psi = random_state(sp, rng);
    EXPECT_NEAR(inner(psi, psi).real(), 1.0, 1e-12);
    EXPECT_THROW(QuantumState::normalized(sp, Eigen::VectorXcd::Zero(Eigen::Index(sp.dim()))), InvalidArgument);
}

// Property: below the cutoff, n_j |psi> is the number-weighted amplitude vector.
TEST(States, NumberOperatorWeightsAmplitudes) {
    const HilbertSpace sp = make_space(5, 4);
    std::mt19937 rng(11);
    const Operator n1 = creation(sp, 1) * annihilation(sp, 1);
    const Operator n2 = creation(sp, 2) * annihilation(sp, 2);
    for (int trial = 0; trial < 20; ++trial) {
        const QuantumState psi = random_state(sp, rng, 1);
        const QuantumState r1 = apply(n1, psi), r2 = apply(n2, psi);
        for (std::size_t i = 0; i < sp.dim(); ++i) {
            const BasisState b = sp.state(i);
            const cplx a = psi.amplitudes()(Eigen::Index(i));
            // sqrt(n) * sqrt(n) rounds, so compare to machine precision
            EXPECT_LT(std::abs(r1.amplitudes()(Eigen::Index(i)) - double(b.n1) * a), 1e-14);
            EXPECT_LT(std::abs(r2.amplitudes()(Eigen::Index(i)) - double(b.n2) * a), 1e-14);
        }
    }
}

TEST(Interior, IndicesRespectTotalNumber) {
    const HilbertSpace sp = make_space(6, 8);
    const auto idx = interior_indices(sp, 2);
    for (std::size_t i : idx) {
        const BasisState b = sp.state(i);
        EXPECT_LE(b.n1 + b.n2, 4);
    }
    // 15 (n1, n2) pairs with n1 + n2 <= 4, times two qubit levels
    EXPECT_EQ(idx.size(), 30u);
    EXPECT_THROW(interior_indices(sp, -1), InvalidArgument);
}
