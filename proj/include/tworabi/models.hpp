// Hamiltonians of the two-mode Rabi family, the SU(2) rotation and
// displacement unitaries, and the operators they conserve.
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "tworabi/hilbert.hpp"
#include "tworabi/linalg.hpp"

namespace tworabi {

// Frequencies and couplings, all in units of a common reference frequency.
struct ModelParams {
    double omega0 = 1.0;
    double omega1 = 1.0;
    double omega2 = 1.0;
    double g1 = 0.0;
    double g2 = 0.0;

    void validate() const {
        if (!(omega0 > 0.0) || !(omega1 > 0.0) || !(omega2 > 0.0))
            throw InvalidArgument("frequencies must be > 0");
        if (!(g1 >= 0.0) || !(g2 >= 0.0)) throw InvalidArgument("couplings must be >= 0");
        if (!std::isfinite(omega0 + omega1 + omega2 + g1 + g2)) throw InvalidArgument("parameters must be finite");
    }

    // Effective coupling g = sqrt(g1^2 + g2^2).
    double g() const { return std::hypot(g1, g2); }
    // tan xi = g2 / g1; pi/2 when g1 = 0, and 0 for the uncoupled model.
    double xi() const { return g() == 0.0 ? 0.0 : std::atan2(g2, g1); }
    double beta1() const { return g() == 0.0 ? 1.0 : g1 / g(); }
    double beta2() const { return g() == 0.0 ? 0.0 : g2 / g(); }
    // Effective field frequencies and field-field hopping in the displaced frame.
    double big_omega1() const { return g() == 0.0 ? omega1 : (omega1 * g1 * g1 + omega2 * g2 * g2) / (g() * g()); }
    double big_omega2() const { return g() == 0.0 ? omega2 : (omega1 * g2 * g2 + omega2 * g1 * g1) / (g() * g()); }
    double lambda() const { return g() == 0.0 ? 0.0 : (omega2 - omega1) * g1 * g2 / (g() * g()); }

    bool resonant_fields(double tol = 1e-12) const {
        return std::abs(omega1 - omega2) <= tol * std::max(1.0, std::abs(omega1));
    }
    bool fully_resonant(double tol = 1e-12) const {
        return resonant_fields(tol) && std::abs(omega0 - omega1) <= tol * std::max(1.0, std::abs(omega1));
    }
    bool equal_couplings(double tol = 1e-12) const { return std::abs(g1 - g2) <= tol * std::max(1.0, g1); }
};

enum class ModelKind { Rabi, H1, H2, H1D, H2D, H1RF, H2RF };

inline ModelKind parse_model_kind(std::string_view tag) {
    if (tag == "rabi") return ModelKind::Rabi;
    if (tag == "h1") return ModelKind::H1;
    if (tag == "h2") return ModelKind::H2;
    if (tag == "h1d") return ModelKind::H1D;
    if (tag == "h2d") return ModelKind::H2D;
    if (tag == "h1rf") return ModelKind::H1RF;
    if (tag == "h2rf") return ModelKind::H2RF;
    throw InvalidArgument("unknown model '" + std::string(tag) + "'");
}

inline std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Rabi: return "rabi";
        case ModelKind::H1: return "h1";
        case ModelKind::H2: return "h2";
        case ModelKind::H1D: return "h1d";
        case ModelKind::H2D: return "h2d";
        case ModelKind::H1RF: return "h1rf";
        case ModelKind::H2RF: return "h2rf";
    }
    return "?";
}

namespace detail {

struct Ladder {
    Operator a1, a2, ad1, ad2, n1, n2, sz, sx, sp, sm, isy;
    explicit Ladder(const HilbertSpace& s)
        : a1(annihilation(s, 1)),
          a2(annihilation(s, 2)),
          ad1(creation(s, 1)),
          ad2(creation(s, 2)),
          n1(number(s, 1)),
          n2(number(s, 2)),
          sz(pauli(s, Axis::z)),
          sx(pauli(s, Axis::x)),
          sp(pauli(s, Axis::plus)),
          sm(pauli(s, Axis::minus)),
          isy(sp - sm) {}
};

// w0/2 sz + W1 n1 + W2 n2 + lam (a1^dag a2 + a1 a2^dag)
inline Operator free_part(const Ladder& l, double omega0, double w1, double w2, double lam) {
    Operator h = combine({{0.5 * omega0, l.sz}, {w1, l.n1}, {w2, l.n2}});
    if (lam != 0.0) h = h + lam * (l.ad1 * l.a2 + l.a1 * l.ad2);
    return h;
}

// Displaced-frame H2 coupling:
//   [g a1^dag + (g1^2 - g2^2)/g a1 - 2 g1 g2/g a2] s+ + h.c.
inline Operator h2_displaced_coupling(const Ladder& l, const ModelParams& p) {
    const double g = p.g();
    if (g == 0.0) return zero_operator(l.sz.space());
    const double diff = (p.g1 * p.g1 - p.g2 * p.g2) / g;
    const double cross = 2.0 * p.g1 * p.g2 / g;
    Operator up = combine({{g, l.ad1}, {diff, l.a1}, {-cross, l.a2}}) * l.sp;
    return up + adjoint(up);
}

}  // namespace detail

// Hermitian matrix of the requested model on `space`. The Rabi kind acts on
// the qubit and mode 1 with coupling g1; mode 2 carries no term at all.
inline Operator build_hamiltonian(ModelKind kind, const ModelParams& p, const HilbertSpace& space) {
    p.validate();
    if ((kind == ModelKind::H1RF || kind == ModelKind::H2RF) && !p.resonant_fields())
        throw InvalidArgument("resonant-field Hamiltonians require omega1 == omega2");
    const detail::Ladder l(space);
    Operator h = zero_operator(space);
    switch (kind) {
        case ModelKind::Rabi:
            h = combine({{0.5 * p.omega0, l.sz}, {p.omega1, l.n1}}) + p.g1 * ((l.a1 + l.ad1) * l.sx);
            break;
        case ModelKind::H1:
            h = detail::free_part(l, p.omega0, p.omega1, p.omega2, 0.0) + p.g1 * ((l.a1 + l.ad1) * l.sx) +
                p.g2 * ((l.a2 + l.ad2) * l.sx);
            break;
        case ModelKind::H2:
            // i g2 (a2^dag - a2) sigma_y = g2 (a2^dag - a2)(s+ - s-)
            h = detail::free_part(l, p.omega0, p.omega1, p.omega2, 0.0) + p.g1 * ((l.a1 + l.ad1) * l.sx) +
                p.g2 * ((l.ad2 - l.a2) * l.isy);
            break;
        case ModelKind::H1D:
        case ModelKind::H1RF:
            h = detail::free_part(l, p.omega0, p.big_omega1(), p.big_omega2(), p.lambda()) +
                p.g() * ((l.a1 + l.ad1) * l.sx);
            break;
        case ModelKind::H2D:
        case ModelKind::H2RF:
            h = detail::free_part(l, p.omega0, p.big_omega1(), p.big_omega2(), p.lambda()) +
                detail::h2_displaced_coupling(l, p);
            break;
    }
    return h.with_hint(true);
}

// The H1D-shaped approximation of H2D valid for g1 >> 2 g2: the qubit couples
// to mode 1 alone with strength g1.
inline Operator approximate_h2d(const ModelParams& p, const HilbertSpace& space) {
    p.validate();
    const detail::Ladder l(space);
    return (detail::free_part(l, p.omega0, p.big_omega1(), p.big_omega2(), p.lambda()) +
            p.g1 * ((l.a1 + l.ad1) * l.sx))
        .with_hint(true);
}

// H2D at g1 = g2 written as one Jaynes-Cummings and one anti-Jaynes-Cummings
// coupling:
//   w0/2 sz + (w1+w2)/2 (n1+n2) + (w2-w1)/2 (a1^dag a2 + h.c.)
//   + sqrt(2) g1 [(a1^dag - a2) s+ + (a1 - a2^dag) s-]
inline Operator h2d_equal_coupling_form(const ModelParams& p, const HilbertSpace& space) {
    p.validate();
    if (!p.equal_couplings()) throw InvalidArgument("equal-coupling form requires g1 == g2");
    const detail::Ladder l(space);
    const double mean = 0.5 * (p.omega1 + p.omega2);
    Operator h = detail::free_part(l, p.omega0, mean, mean, 0.5 * (p.omega2 - p.omega1));
    h = h + std::sqrt(2.0) * p.g1 * ((l.ad1 - l.a2) * l.sp + (l.a1 - l.ad2) * l.sm);
    return h.with_hint(true);
}

// Generator of U(theta): a1^dag a2 + a1 a2^dag - sz/2.
inline Operator rotation_generator(const HilbertSpace& space) {
    const detail::Ladder l(space);
    return (l.ad1 * l.a2 + l.a1 * l.ad2 - 0.5 * l.sz).with_hint(true);
}

// U(theta) = exp[i theta (a1^dag a2 + a1 a2^dag - sz/2)]
inline Operator rotation_u(const HilbertSpace& space, double theta) {
    return unitary_exp(rotation_generator(space), theta);
}

// D(xi) = exp[xi (a1^dag a2 - a1 a2^dag)]. The generator is real, so the
// result is real orthogonal; round-off imaginary parts are dropped.
inline Operator displacement_d(const HilbertSpace& space, double xi) {
    const detail::Ladder l(space);
    const Operator k = (-kI * (l.ad1 * l.a2 - l.a1 * l.ad2)).with_hint(true);
    const Operator u = unitary_exp(k, xi);
    SparseMatrix real = u.data().real().cast<cplx>();
    if (max_norm(SparseMatrix(u.data().imag().cast<cplx>())) > 1e-10)
        throw ConvergenceError("displacement operator lost its real form");
    return Operator(space, real.pruned(1.0, 1e-15), false);
}

// Additive constant of the script-N operator -n1 + n2 + sz/2 + c. With
// c = 1/2 the sector labels of the vacuum |g,0,0> and of |e,0,0> are 0 and 1.
inline constexpr double kNScriptOffset = 0.5;

struct ConservedOps {
    Operator parity;    // exp(-i pi N), diagonal +-1
    Operator n_total;   // N = sz/2 + n1 + n2 + 1/2
    Operator n_script;  // -n1 + n2 + sz/2 + kNScriptOffset
    Operator jx;        // (a1^dag a2 + a1 a2^dag)/2
    Operator chi;       // (a1^dag + a2^dag)(a1 + a2)
};

inline Operator parity_operator(const HilbertSpace& space) {
    return detail::from_action(
        space,
        [](const BasisState& b, auto&& emit) {
            // N = n1 + n2 for |g>, n1 + n2 + 1 for |e>
            const int n = b.n1 + b.n2 + (b.s == Level::e ? 1 : 0);
            emit(cplx(n % 2 == 0 ? 1.0 : -1.0), b);
        },
        true);
}

inline ConservedOps conserved_ops(const HilbertSpace& space) {
    const detail::Ladder l(space);
    const Operator id = identity(space);
    return ConservedOps{
        parity_operator(space),
        combine({{0.5, l.sz}, {1.0, l.n1}, {1.0, l.n2}, {0.5, id}}),
        combine({{-1.0, l.n1}, {1.0, l.n2}, {0.5, l.sz}, {kNScriptOffset, id}}),
        (0.5 * (l.ad1 * l.a2 + l.a1 * l.ad2)).with_hint(true),
        ((l.ad1 + l.ad2) * (l.a1 + l.a2)).with_hint(true),
    };
}

}  // namespace tworabi
