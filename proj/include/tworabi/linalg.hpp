#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <vector>

#include "tworabi/hilbert.hpp"

namespace tworabi {

struct DenseEigen {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXcd vectors;  // columns
};

// Full eigendecomposition of a Hermitian matrix. Matrices with an identically
// zero imaginary part go through the real symmetric solver.
inline DenseEigen hermitian_eigen(const Eigen::MatrixXcd& m) {
    DenseEigen out;
    if (m.size() == 0) return out;
    if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.real());
        if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
        out.values = solver.eigenvalues();
        out.vectors = solver.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
        if (solver.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver failed");
        out.values = solver.eigenvalues();
        out.vectors = solver.eigenvectors();
    }
    return out;
}

namespace detail {

// Connected components of the sparsity graph of m. Returns, per component,
// the ascending list of basis indices.
inline std::vector<std::vector<std::size_t>> coupled_blocks(const SparseMatrix& m) {
    const std::size_t n = std::size_t(m.rows());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            if (it.value() == cplx(0.0)) continue;
            std::size_t a = find(std::size_t(it.row())), b = find(std::size_t(it.col()));
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<long> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (slot[r] < 0) {
            slot[r] = long(blocks.size());
            blocks.emplace_back();
        }
        blocks[std::size_t(slot[r])].push_back(i);
    }
    return blocks;
}

inline Eigen::MatrixXcd submatrix(const SparseMatrix& m, const std::vector<std::size_t>& idx) {
    const Eigen::Index k = Eigen::Index(idx.size());
    Eigen::MatrixXcd out(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c) out(r, c) = m.coeff(Eigen::Index(idx[r]), Eigen::Index(idx[c]));
    return out;
}

}  // namespace detail

// exp(i t K) for Hermitian K, computed block by block from the
// eigendecomposition of each coupled component of K.
inline Operator unitary_exp(const Operator& generator, double t) {
    if (!is_hermitian(generator, 1e-12)) throw InvalidArgument("unitary_exp needs a Hermitian generator");
    std::vector<Eigen::Triplet<cplx>> triplets;
    for (const auto& block : detail::coupled_blocks(generator.data())) {
        const DenseEigen eig = hermitian_eigen(detail::submatrix(generator.data(), block));
        const Eigen::VectorXcd phases = (kI * t * eig.values.cast<cplx>()).array().exp();
        const Eigen::MatrixXcd u = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
        for (Eigen::Index r = 0; r < u.rows(); ++r)
            for (Eigen::Index c = 0; c < u.cols(); ++c)
                if (std::abs(u(r, c)) > 1e-15)
                    triplets.emplace_back(Eigen::Index(block[r]), Eigen::Index(block[c]), u(r, c));
    }
    SparseMatrix m(Eigen::Index(generator.dim()), Eigen::Index(generator.dim()));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return Operator(generator.space(), std::move(m), false);
}

// U A U^dagger
inline Operator conjugate(const Operator& u, const Operator& a) {
    require_same_space(u.space(), a.space());
    SparseMatrix m = (u.data() * a.data() * SparseMatrix(u.data().adjoint())).pruned(1.0, 1e-14);
    return Operator(a.space(), std::move(m), a.hermitian_hint());
}

}  // namespace tworabi
