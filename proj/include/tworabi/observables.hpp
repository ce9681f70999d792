// Ground-state order parameters, reference states and fidelity.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "tworabi/hilbert.hpp"
#include "tworabi/models.hpp"

namespace tworabi {

struct OrderParameters {
    double sz = 0.0;   // <sigma_z>, bare (|g,0,0> gives -1)
    double n1 = 0.0;   // <a1^dag a1>
    double n2 = 0.0;   // <a2^dag a2>
    double jx = 0.0;   // <(a1^dag a2 + a1 a2^dag)/2>
    double chi = 0.0;  // <(a1^dag + a2^dag)(a1 + a2)>
};

// Computed straight from the amplitudes. chi is evaluated as |(a1 + a2) psi|^2,
// independently of n1, n2 and jx.
inline OrderParameters order_parameters(const QuantumState& psi) {
    const HilbertSpace& sp = psi.space();
    const Eigen::VectorXcd& a = psi.amplitudes();
    OrderParameters op;
    cplx hop{0.0};      // <a1^dag a2>
    cplx hop_rev{0.0};  // <a1 a2^dag>
    Eigen::VectorXcd lowered = Eigen::VectorXcd::Zero(a.size());  // (a1 + a2) psi
    for (std::size_t i = 0; i < sp.dim(); ++i) {
        const BasisState b = sp.state(i);
        const cplx amp = a(Eigen::Index(i));
        const double w = std::norm(amp);
        op.sz += (b.s == Level::e ? 1.0 : -1.0) * w;
        op.n1 += b.n1 * w;
        op.n2 += b.n2 * w;
        if (b.n2 > 0 && b.n1 < sp.n_max1()) {
            const std::size_t t = sp.index(b.s, b.n1 + 1, b.n2 - 1);
            hop += std::conj(a(Eigen::Index(t))) * std::sqrt(double(b.n1 + 1) * b.n2) * amp;
        }
        if (b.n1 > 0 && b.n2 < sp.n_max2()) {
            const std::size_t t = sp.index(b.s, b.n1 - 1, b.n2 + 1);
            hop_rev += std::conj(a(Eigen::Index(t))) * std::sqrt(double(b.n1) * (b.n2 + 1)) * amp;
        }
        if (b.n1 > 0) lowered(Eigen::Index(sp.index(b.s, b.n1 - 1, b.n2))) += std::sqrt(double(b.n1)) * amp;
        if (b.n2 > 0) lowered(Eigen::Index(sp.index(b.s, b.n1, b.n2 - 1))) += std::sqrt(double(b.n2)) * amp;
    }
    const cplx jx = 0.5 * (hop + hop_rev);
    if (std::abs(jx.imag()) > 1e-10) throw ConvergenceError("<J_x> acquired an imaginary part");
    op.jx = jx.real();
    op.chi = lowered.squaredNorm();
    return op;
}

// Truncated coherent amplitudes beta^n / sqrt(n!) for n = 0..n_max, normalized.
inline Eigen::VectorXcd coherent_amplitudes(int n_max, cplx beta) {
    if (std::norm(beta) > n_max / 4.0)
        throw InvalidArgument("coherent amplitude |beta|^2 = " + std::to_string(std::norm(beta)) +
                              " exceeds the truncation-safety bound n_max/4 = " + std::to_string(n_max / 4.0));
    Eigen::VectorXcd c(n_max + 1);
    c(0) = 1.0;
    for (int n = 1; n <= n_max; ++n) c(n) = c(n - 1) * beta / std::sqrt(double(n));
    return c / c.norm();
}

// |q> (x) |f1> (x) |f2> with q = (c_g, c_e).
inline QuantumState product_state(const HilbertSpace& space, cplx c_g, cplx c_e, const Eigen::VectorXcd& f1,
                                  const Eigen::VectorXcd& f2) {
    if (f1.size() != space.n_max1() + 1 || f2.size() != space.n_max2() + 1)
        throw InvalidArgument("mode amplitudes do not match the cutoffs");
    Eigen::VectorXcd v(Eigen::Index(space.dim()));
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisState b = space.state(i);
        v(Eigen::Index(i)) = (b.s == Level::g ? c_g : c_e) * f1(b.n1) * f2(b.n2);
    }
    return QuantumState::normalized(space, std::move(v));
}

inline Eigen::VectorXcd fock_amplitudes(int n_max, int n) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_max + 1);
    v(n) = 1.0;
    return v;
}

// Coherent state on one mode, vacuum on the other, qubit in |g>.
inline QuantumState coherent_state(const HilbertSpace& space, int mode, cplx beta) {
    detail::check_mode(mode);
    const Eigen::VectorXcd coh = coherent_amplitudes(space.n_max(mode), beta);
    return mode == 1 ? product_state(space, 1.0, 0.0, coh, fock_amplitudes(space.n_max2(), 0))
                     : product_state(space, 1.0, 0.0, fock_amplitudes(space.n_max1(), 0), coh);
}

// Lab-frame field amplitudes of the deep-strong ground state of H1:
// alpha_j = g_j / omega_j, i.e. the unit direction beta_j = g_j / g scaled
// by the displacement g / omega of the equivalent Rabi model.
inline double deep_strong_alpha(const ModelParams& p, int mode) {
    detail::check_mode(mode);
    return mode == 1 ? p.g1 / p.omega1 : p.g2 / p.omega2;
}

// (-+|e> + |g>)/sqrt(2) |+-alpha1> |+-alpha2>; branch = +1 picks the upper signs.
inline QuantumState deep_strong_ansatz(const ModelParams& p, const HilbertSpace& space, int branch) {
    p.validate();
    if (branch != 1 && branch != -1) throw InvalidArgument("ansatz branch must be +1 or -1");
    const double s = double(branch);
    const Eigen::VectorXcd f1 = coherent_amplitudes(space.n_max1(), s * deep_strong_alpha(p, 1));
    const Eigen::VectorXcd f2 = coherent_amplitudes(space.n_max2(), s * deep_strong_alpha(p, 2));
    return product_state(space, 1.0 / std::sqrt(2.0), -s / std::sqrt(2.0), f1, f2);
}

// Parity eigenstate built from the two ansatz branches: normalize(A + p Pi A)
// for A = ansatz(+1) and requested parity p.
inline QuantumState parity_symmetrized_ansatz(const ModelParams& p, const HilbertSpace& space, int parity) {
    if (parity != 1 && parity != -1) throw InvalidArgument("parity must be +1 or -1");
    const QuantumState a = deep_strong_ansatz(p, space, 1);
    const QuantumState pa = apply(parity_operator(space), a);
    return QuantumState::normalized(space, a.amplitudes() + double(parity) * pa.amplitudes());
}

enum class BeamSplitterModel { H1, H2 };

// Weak-coupling single-excitation state at resonance, interaction picture:
//   cos(gt)|e,0,0> - i sin(gt)|g>[cos xi |1,0> +- sin xi |0,1>]
// with + for H1 and - for H2.
inline QuantumState weak_coupling_state(BeamSplitterModel model, const ModelParams& p, double t,
                                        const HilbertSpace& space) {
    p.validate();
    if (!p.fully_resonant()) throw InvalidArgument("weak-coupling state requires omega0 == omega1 == omega2");
    const double g = p.g();
    const double xi = p.xi();
    const double sign = model == BeamSplitterModel::H1 ? 1.0 : -1.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(space.dim()));
    v(Eigen::Index(space.index(Level::e, 0, 0))) = std::cos(g * t);
    v(Eigen::Index(space.index(Level::g, 1, 0))) = -kI * std::sin(g * t) * std::cos(xi);
    v(Eigen::Index(space.index(Level::g, 0, 1))) = -kI * std::sin(g * t) * sign * std::sin(xi);
    return QuantumState(space, std::move(v));
}

// Removes free evolution: multiplies each amplitude by
// exp(+i (w0 sz/2 + w1 n1 + w2 n2) t).
inline QuantumState free_phase_map(const QuantumState& psi, const ModelParams& p, double t) {
    const HilbertSpace& sp = psi.space();
    Eigen::VectorXcd v = psi.amplitudes();
    for (std::size_t i = 0; i < sp.dim(); ++i) {
        const BasisState b = sp.state(i);
        const double e = 0.5 * p.omega0 * (b.s == Level::e ? 1.0 : -1.0) + p.omega1 * b.n1 + p.omega2 * b.n2;
        v(Eigen::Index(i)) *= std::exp(kI * e * t);
    }
    return QuantumState(sp, std::move(v));
}

// |<psi|phi>|^2, clamped to [0, 1].
inline double fidelity(const QuantumState& psi, const QuantumState& phi) {
    return std::clamp(std::norm(inner(psi, phi)), 0.0, 1.0);
}

}  // namespace tworabi
