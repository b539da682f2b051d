#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tlmodes/errors.hpp"

namespace tlmodes::detail {

struct LanczosResult {
    Eigen::VectorXd values;   // lowest nev, ascending
    Eigen::MatrixXd vectors;  // dim x nev
    int iterations = 0;
};

/// Lanczos with full reorthogonalization for the lowest eigenpairs of a
/// symmetric operator. Deterministic: fixed start vector, fixed iteration
/// schedule. `post` is applied to every new Krylov vector (used to confine
/// the iteration to an invariant subspace, e.g. a symmetry sector).
inline LanczosResult lanczos_lowest(
    Eigen::Index dim, const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    int nev, const Eigen::VectorXd& start, int max_iter = 600, double tol = 1e-12,
    const std::function<void(Eigen::VectorXd&)>& post = {}) {
    max_iter = std::min<Eigen::Index>(max_iter, dim);
    Eigen::MatrixXd V(dim, max_iter + 1);
    std::vector<double> alpha, beta;

    Eigen::VectorXd v = start;
    if (post) post(v);
    const double n0 = v.norm();
    if (!(n0 > 0)) throw SolverError("lanczos: start vector vanishes (or lies outside the sector)");
    V.col(0) = v / n0;

    Eigen::VectorXd w(dim);
    LanczosResult out;
    int j = 0;
    auto ritz_converged = [&](int k) -> bool {
        if (k < nev + 2) return false;
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            T(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const double scale = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(k - 1)));
        const double beta_k = beta.size() >= static_cast<std::size_t>(k) ? beta[static_cast<std::size_t>(k - 1)] : 0.0;
        for (int i = 0; i < nev; ++i) {
            const double resid = std::abs(beta_k * es.eigenvectors()(k - 1, i));
            if (resid > tol * scale) return false;
        }
        out.values = es.eigenvalues().head(nev);
        out.vectors = V.leftCols(k) * es.eigenvectors().leftCols(nev);
        return true;
    };

    for (j = 0; j < max_iter; ++j) {
        apply(V.col(j), w);
        if (post) post(w);
        const double a = V.col(j).dot(w);
        alpha.push_back(a);
        w -= a * V.col(j);
        if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * V.col(j - 1);
        // full reorthogonalization, two classical Gram-Schmidt passes
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        const double b = w.norm();
        beta.push_back(b);
        if (b < 1e-300) {  // invariant subspace exhausted
            if (j + 1 >= nev) break;
            throw SolverError("lanczos: subspace breakdown before requested eigenpairs");
        }
        V.col(j + 1) = w / b;
        if ((j + 1) % 10 == 0 && ritz_converged(j + 1)) {
            out.iterations = j + 1;
            return out;
        }
    }
    const int k = std::min<int>(j + 1, max_iter);
    if (!ritz_converged(k)) throw NonConvergenceError("lanczos failed to converge");
    out.iterations = k;
    return out;
}

}  // namespace tlmodes::detail
