#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tworabi/linalg.hpp"
#include "tworabi/models.hpp"

using namespace tworabi;

namespace {

std::vector<double> spectrum(const Operator& h) {
    const DenseEigen eig = hermitian_eigen(h.dense());
    return {eig.values.data(), eig.values.data() + eig.values.size()};
}

ModelParams params(double w0, double w1, double w2, double g1, double g2) { return {w0, w1, w2, g1, g2}; }

ModelParams random_params(std::mt19937& rng) {
    std::uniform_real_distribution<double> freq(0.5, 2.0), coup(0.0, 2.0);
    return {freq(rng), freq(rng), freq(rng), coup(rng), coup(rng)};
}

}  // namespace

TEST(ModelParams, DerivedQuantities) {
    const ModelParams p = params(1.0, 1.0, 2.0, 0.3, 0.4);
    EXPECT_DOUBLE_EQ(p.g(), 0.5);
    EXPECT_NEAR(std::tan(p.xi()), 0.4 / 0.3, 1e-14);
    EXPECT_NEAR(p.big_omega1(), (1.0 * 0.09 + 2.0 * 0.16) / 0.25, 1e-14);
    EXPECT_NEAR(p.big_omega2(), (1.0 * 0.16 + 2.0 * 0.09) / 0.25, 1e-14);
    EXPECT_NEAR(p.lambda(), 1.0 * 0.3 * 0.4 / 0.25, 1e-14);
    EXPECT_NEAR(p.beta1() * p.beta1() + p.beta2() * p.beta2(), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(params(1, 1, 1, 0.0, 0.7).xi(), std::numbers::pi / 2);
    EXPECT_THROW(params(0.0, 1, 1, 0, 0).validate(), InvalidArgument);
    EXPECT_THROW(params(1, 1, 1, -0.1, 0).validate(), InvalidArgument);
}

TEST(Hamiltonians, AllKindsHermitian) {
    const HilbertSpace sp = make_space(5, 4);
    const ModelParams p = params(1.1, 0.9, 0.9, 0.7, 0.3);
    for (ModelKind k : {ModelKind::Rabi, ModelKind::H1, ModelKind::H2, ModelKind::H1D, ModelKind::H2D,
                        ModelKind::H1RF, ModelKind::H2RF}) {
        const Operator h = build_hamiltonian(k, p, sp);
        EXPECT_TRUE(h.hermitian_hint());
        EXPECT_LT(hermiticity_defect(h), 1e-12) << to_string(k);
    }
}

TEST(Hamiltonians, ResonantKindsRejectDetunedFields) {
    const HilbertSpace sp = make_space(3, 3);
    EXPECT_THROW(build_hamiltonian(ModelKind::H1RF, params(1, 1, 1.2, 0.1, 0.1), sp), InvalidArgument);
    EXPECT_THROW(build_hamiltonian(ModelKind::H2RF, params(1, 1, 1.2, 0.1, 0.1), sp), InvalidArgument);
    EXPECT_THROW(parse_model_kind("h3"), InvalidArgument);
}

// Oracle: enumerate {+-w0/2 + w1 n1 + w2 n2} directly.
TEST(Hamiltonians, DecoupledSpectrum) {
    const HilbertSpace sp = make_space(4, 3);
    const ModelParams p = params(0.8, 1.0, 1.3, 0.0, 0.0);
    std::vector<double> expected;
    for (double s : {-0.5, 0.5})
        for (int n1 = 0; n1 <= 4; ++n1)
            for (int n2 = 0; n2 <= 3; ++n2) expected.push_back(s * p.omega0 + p.omega1 * n1 + p.omega2 * n2);
    std::sort(expected.begin(), expected.end());
    for (ModelKind k : {ModelKind::H1, ModelKind::H2}) {
        const std::vector<double> got = spectrum(build_hamiltonian(k, p, sp));
        ASSERT_EQ(got.size(), expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-12);
        EXPECT_NEAR(got.front(), -0.4, 1e-12);
    }
}

TEST(Hamiltonians, H2ReducesToH1WithoutSecondCoupling) {
    const HilbertSpace sp = make_space(6, 5);
    const ModelParams p = params(1.0, 1.0, 1.5, 0.8, 0.0);
    EXPECT_EQ(max_norm(build_hamiltonian(ModelKind::H1, p, sp) - build_hamiltonian(ModelKind::H2, p, sp)), 0.0);
}

// H2 is real symmetric in the Fock basis: i sigma_y and (a^dag - a) are both
// real antisymmetric.
TEST(Hamiltonians, H2IsReal) {
    const Operator h = build_hamiltonian(ModelKind::H2, params(1, 1, 1, 0.6, 0.9), make_space(4, 4));
    EXPECT_EQ(max_norm(SparseMatrix(h.data().imag().cast<cplx>())), 0.0);
}

// Oracle: H1RF = w n2 + H_Rabi(g). The Rabi spectrum is computed from the
// Rabi kind on a separate space with mode 2 left out of the Hamiltonian; each
// value then appears (n_max2 + 1) times, once per mode-2 level.
TEST(Hamiltonians, ResonantH1IsRabiPlusFreeMode) {
    const int n = 20;
    const ModelParams p = params(1.0, 1.0, 1.0, 0.3, 0.4);
    const std::vector<double> rf = spectrum(build_hamiltonian(ModelKind::H1RF, p, make_space(n, n)));

    const std::vector<double> rabi_rep = spectrum(build_hamiltonian(ModelKind::Rabi, params(1, 1, 1, 0.5, 0.0),
                                                                    make_space(n, 1)));
    std::vector<double> rabi;
    for (std::size_t i = 0; i < rabi_rep.size(); i += 2) rabi.push_back(rabi_rep[i]);
    std::vector<double> expected;
    for (int nb = 0; nb <= n; ++nb)
        for (double e : rabi) expected.push_back(nb * 1.0 + e);
    std::sort(expected.begin(), expected.end());
    ASSERT_EQ(expected.size(), rf.size());
    for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(rf[i], expected[i], 1e-10) << i;
}

TEST(Unitaries, IdentityAtZeroAngle) {
    const HilbertSpace sp = make_space(4, 4);
    EXPECT_LT(max_norm(rotation_u(sp, 0.0) - identity(sp)), 1e-14);
    EXPECT_LT(max_norm(displacement_d(sp, 0.0) - identity(sp)), 1e-14);
}

TEST(Unitaries, AreUnitaryAndDisplacementIsReal) {
    const HilbertSpace sp = make_space(6, 5);
    const Operator u = rotation_u(sp, 0.37);
    const Operator d = displacement_d(sp, 0.81);
    EXPECT_LT(max_norm(u * adjoint(u) - identity(sp)), 1e-12);
    EXPECT_LT(max_norm(d * adjoint(d) - identity(sp)), 1e-12);
    EXPECT_EQ(max_norm(SparseMatrix(d.data().imag().cast<cplx>())), 0.0);
}

TEST(Unitaries, FullRotationLeavesModelsInvariant) {
    const HilbertSpace sp = make_space(12, 12);
    const auto interior = interior_indices(sp, 4);
    const Operator u = rotation_u(sp, 2.0 * std::numbers::pi);
    for (ModelKind k : {ModelKind::H1, ModelKind::H2}) {
        const Operator h = build_hamiltonian(k, params(1.0, 0.8, 1.3, 0.7, 0.4), sp);
        EXPECT_LT(max_norm_on(conjugate(u, h) - h, interior), 1e-8) << to_string(k);
    }
}

TEST(Unitaries, EqualCouplingH2InvariantUnderAnyRotation) {
    const HilbertSpace sp = make_space(12, 12);
    const auto interior = interior_indices(sp, 4);
    const Operator h = build_hamiltonian(ModelKind::H2, params(1.0, 1.0, 1.0, 0.6, 0.6), sp);
    for (double theta : {0.7, 1.9}) EXPECT_LT(max_norm_on(conjugate(rotation_u(sp, theta), h) - h, interior), 1e-8);
    // not a symmetry once the couplings differ
    const Operator h_uneq = build_hamiltonian(ModelKind::H2, params(1.0, 1.0, 1.0, 0.6, 0.3), sp);
    EXPECT_GT(max_norm_on(conjugate(rotation_u(sp, 0.7), h_uneq) - h_uneq, interior), 1e-3);
}

TEST(Unitaries, DisplacementProducesEffectiveHamiltonians) {
    const HilbertSpace sp = make_space(16, 16);
    const auto interior = interior_indices(sp, 4);
    for (const ModelParams& p : {params(1.0, 1.0, 1.0, 0.3, 0.4), params(0.7, 1.0, 1.6, 0.9, 0.2),
                                 params(1.3, 1.2, 0.8, 0.5, 1.1)}) {
        const Operator d = displacement_d(sp, p.xi());
        EXPECT_LT(max_norm_on(conjugate(d, build_hamiltonian(ModelKind::H1, p, sp)) -
                                  build_hamiltonian(ModelKind::H1D, p, sp),
                              interior),
                  1e-10);
        EXPECT_LT(max_norm_on(conjugate(d, build_hamiltonian(ModelKind::H2, p, sp)) -
                                  build_hamiltonian(ModelKind::H2D, p, sp),
                              interior),
                  1e-10);
    }
}

// tan xi = -g1/g2 moves the qubit coupling onto mode 2. Expected form, derived
// from D a1 D^dag = c a1 - s a2, D a2 D^dag = c a2 + s a1 with c = g2/g,
// s = -g1/g:
//   w0/2 sz + Omega2 n1 + Omega1 n2 - lambda (a1^dag a2 + h.c.) + g (a2 + a2^dag) sx
TEST(Unitaries, AlternateDisplacementSwapsModes) {
    const HilbertSpace sp = make_space(14, 14);
    const ModelParams p = params(0.9, 1.0, 1.4, 0.6, 0.35);
    const double xi_swap = std::atan2(-p.g1, p.g2);
    const Operator swapped = conjugate(displacement_d(sp, xi_swap), build_hamiltonian(ModelKind::H1, p, sp));
    const Operator a1 = annihilation(sp, 1), a2 = annihilation(sp, 2);
    const Operator expected = combine({{0.5 * p.omega0, pauli(sp, Axis::z)},
                                       {p.big_omega2(), number(sp, 1)},
                                       {p.big_omega1(), number(sp, 2)},
                                       {-p.lambda(), adjoint(a1) * a2 + a1 * adjoint(a2)},
                                       {p.g(), (a2 + adjoint(a2)) * pauli(sp, Axis::x)}});
    EXPECT_LT(max_norm_on(swapped - expected, interior_indices(sp, 4)), 1e-10);
}

TEST(Conserved, ParityOnBasisStates) {
    const HilbertSpace sp = make_space(3, 3);
    const ConservedOps ops = conserved_ops(sp);
    EXPECT_DOUBLE_EQ(expectation(ops.parity, QuantumState::basis(sp, Level::g, 0, 0)).real(), 1.0);
    EXPECT_DOUBLE_EQ(expectation(ops.parity, QuantumState::basis(sp, Level::e, 0, 0)).real(), -1.0);
    EXPECT_DOUBLE_EQ(expectation(ops.n_total, QuantumState::basis(sp, Level::g, 0, 0)).real(), 0.0);
    EXPECT_DOUBLE_EQ(expectation(ops.n_total, QuantumState::basis(sp, Level::e, 0, 0)).real(), 1.0);
    for (const Operator* op : {&ops.n_total, &ops.n_script, &ops.jx, &ops.chi}) EXPECT_TRUE(is_hermitian(*op));
}

// Second route: Pi = exp(-i pi N) through the matrix exponential.
TEST(Conserved, ParityMatchesExponentialOfExcitationNumber) {
    const HilbertSpace sp = make_space(4, 3);
    const ConservedOps ops = conserved_ops(sp);
    EXPECT_LT(max_norm(unitary_exp(ops.n_total, -std::numbers::pi) - ops.parity), 1e-12);
}

TEST(Conserved, ModelsCommuteWithParity) {
    const HilbertSpace sp = make_space(10, 10);
    const Operator parity = parity_operator(sp);
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        const ModelParams p = random_params(rng);
        EXPECT_LT(max_norm(commutator(build_hamiltonian(ModelKind::H1, p, sp), parity)), 1e-10);
        EXPECT_LT(max_norm(commutator(build_hamiltonian(ModelKind::H2, p, sp), parity)), 1e-10);
    }
}

TEST(Conserved, ScriptNConservedOnlyForEqualCouplings) {
    const HilbertSpace sp = make_space(8, 8);
    const Operator n_script = conserved_ops(sp).n_script;
    EXPECT_LT(max_norm(commutator(build_hamiltonian(ModelKind::H2RF, params(1, 1, 1, 0.7, 0.7), sp), n_script)),
              1e-10);
    EXPECT_GT(max_norm(commutator(build_hamiltonian(ModelKind::H2RF, params(1, 1, 1, 0.8, 0.4), sp), n_script)),
              1e-3);
}

TEST(Conserved, ChiDecomposesIntoNumbersAndHopping) {
    const HilbertSpace sp = make_space(5, 5);
    const ConservedOps ops = conserved_ops(sp);
    const Operator rhs = combine({{1.0, number(sp, 1)}, {1.0, number(sp, 2)}, {2.0, ops.jx}});
    EXPECT_LT(max_norm(ops.chi - rhs), 1e-14);
}

// The paper's equal-coupling expression writes the hopping coefficient as
// (w2 - w1); the displacement gives lambda = (w2 - w1)/2 at g1 = g2. Compared
// at detuned fields so that the coefficient matters.
TEST(EffectiveForms, EqualCouplingH2DIsJaynesCummingsPlusAntiJaynesCummings) {
    const HilbertSpace sp = make_space(6, 6);
    for (const ModelParams& p : {params(1, 1, 1, 0.5, 0.5), params(0.8, 0.9, 1.3, 0.7, 0.7)}) {
        EXPECT_LT(max_norm(build_hamiltonian(ModelKind::H2D, p, sp) - h2d_equal_coupling_form(p, sp)), 1e-14);
    }
    EXPECT_THROW(h2d_equal_coupling_form(params(1, 1, 1, 0.5, 0.4), sp), InvalidArgument);
}

TEST(EffectiveForms, H1AndDisplacedH1ShareLowSpectrum) {
    const ModelParams p = params(1.0, 0.9, 1.2, 0.5, 0.35);
    double prev_err = 1e9;
    for (int n : {6, 10, 14}) {
        const HilbertSpace sp = make_space(n, n);
        const std::vector<double> a = spectrum(build_hamiltonian(ModelKind::H1, p, sp));
        const std::vector<double> b = spectrum(build_hamiltonian(ModelKind::H1D, p, sp));
        double err = 0.0;
        for (std::size_t i = 0; i < 10; ++i) err = std::max(err, std::abs(a[i] - b[i]));
        EXPECT_LT(err, prev_err);
        prev_err = err;
    }
    EXPECT_LT(prev_err, 1e-6);
}

// Loose tracking bound for the single-mode approximation of H2D.
TEST(EffectiveForms, SingleModeApproximationOfH2D) {
    const HilbertSpace sp = make_space(14, 14);
    const ModelParams p = params(1.0, 1.0, 1.0, 1.0, 0.1);
    const std::vector<double> exact = spectrum(build_hamiltonian(ModelKind::H2D, p, sp));
    const std::vector<double> approx = spectrum(approximate_h2d(p, sp));
    for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(std::abs(exact[i] - approx[i]), 2.0 * p.g2) << i;
}
