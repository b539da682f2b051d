#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "tlmodes/constants.hpp"
#include "tlmodes/errors.hpp"
#include "tlmodes/lumped.hpp"
#include "tlmodes/resonator.hpp"

// Brute-force reference solvers used for validation. They consume the same
// parsed inputs as the main solvers but assemble and diagonalize everything
// themselves: a finite-difference eigensolve of the full line + circuit, and
// an exact Fock-space diagonalization of the quartic junction term.

namespace tlmodes::oracle {

struct DiscretizedSolution {
    std::vector<double> omegas;        // rad/s, ascending, gauge/DC mode removed
    Eigen::MatrixXd vectors;           // node fluxes, one column per mode
    std::vector<double> x_of_node;     // line-node positions (first n_line entries)
    Eigen::Index splice_left = 0;      // line node at x_c-
    Eigen::Index splice_right = 0;     // line node at x_c+ (port_out side)
    Eigen::Index n_line = 0;           // number of line nodes
    double dx_left = 0.0, dx_right = 0.0;
};

namespace detail_ {

/// Generalized shift-invert Lanczos for L psi = w^2 C psi with C positive
/// definite: iterates Op = (L + sigma C)^-1 C in the C-inner product.
inline std::pair<std::vector<double>, Eigen::MatrixXd> lowest_generalized(
    const Eigen::SparseMatrix<double>& L, const Eigen::SparseMatrix<double>& C, double sigma,
    int nev, int max_iter = 260) {
    const Eigen::Index dim = L.rows();
    Eigen::SparseMatrix<double> A = L + sigma * C;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success)
        throw SolverError("oracle: factorization of shifted stiffness matrix failed");

    Eigen::MatrixXd V(dim, max_iter + 1);
    Eigen::MatrixXd CV(dim, max_iter + 1);  // cached C * v columns
    std::vector<double> alpha, beta;

    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = 1.0 + 0.3 * std::sin(1.234 * double(i + 1));
    Eigen::VectorXd cv = C * v;
    double bn = std::sqrt(v.dot(cv));
    V.col(0) = v / bn;
    CV.col(0) = cv / bn;

    auto ritz = [&](int k) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            T(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T);
    };

    int k = 0;
    for (int j = 0; j < max_iter; ++j) {
        Eigen::VectorXd w = solver.solve(CV.col(j));
        const double a = w.dot(CV.col(j));
        alpha.push_back(a);
        w -= a * V.col(j);
        if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * V.col(j - 1);
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(j + 1) * (CV.leftCols(j + 1).transpose() * w);
        Eigen::VectorXd cw = C * w;
        const double b = std::sqrt(std::max(0.0, w.dot(cw)));
        beta.push_back(b);
        k = j + 1;
        if (b < 1e-280) break;
        V.col(j + 1) = w / b;
        CV.col(j + 1) = cw / b;
        if (k >= nev + 4 && k % 10 == 0) {
            auto es = ritz(k);
            const double scale = std::abs(es.eigenvalues()(k - 1));
            bool done = true;
            // largest Ritz values of Op correspond to the lowest frequencies
            for (int i = 0; i < nev; ++i) {
                const double resid = std::abs(b * es.eigenvectors()(k - 1, k - 1 - i));
                if (resid > 1e-12 * scale) done = false;
            }
            if (done) break;
        }
    }
    auto es = ritz(k);
    std::vector<double> mus;
    Eigen::MatrixXd vecs(dim, nev);
    for (int i = 0; i < nev; ++i) {
        mus.push_back(es.eigenvalues()(k - 1 - i));
        vecs.col(i) = V.leftCols(k) * es.eigenvectors().col(k - 1 - i);
    }
    return {mus, vecs};
}

}  // namespace detail_

/// Finite-difference eigensolve of the line (series L0 dx, shunt C0 dx cells)
/// spliced with the inner circuit at x_c. Converges to the matching-system
/// roots as O(dx^2).
inline DiscretizedSolution discretize_and_solve(const TransmissionLine& tl,
                                                const LinearizedCircuit& lin, int cells,
                                                int nev = 6) {
    if (cells < 100) throw SolverError("oracle: need at least 100 cells");
    const int n_l = std::max(2, static_cast<int>(std::lround(cells * tl.x_c / tl.length)));
    const int n_r = std::max(2, cells - n_l);
    const double dxl = tl.x_c / n_l;
    const double dxr = (tl.length - tl.x_c) / n_r;

    DiscretizedSolution sol;
    sol.dx_left = dxl;
    sol.dx_right = dxr;
    // line nodes: 0..n_l (left), n_l+1..n_l+1+n_r (right)
    const Eigen::Index n_line = n_l + n_r + 2;
    sol.n_line = n_line;
    sol.splice_left = n_l;
    sol.splice_right = n_l + 1;
    for (int i = 0; i <= n_l; ++i) sol.x_of_node.push_back(i * dxl);
    for (int i = 0; i <= n_r; ++i) sol.x_of_node.push_back(tl.x_c + i * dxr);

    // inner-circuit nodes: ports map onto the splice nodes, ground is dropped
    const auto& net = lin.base;
    std::vector<Eigen::Index> inner_index(net.nodes.size(), -1);
    Eigen::Index next = n_line;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        const auto& name = net.nodes[i];
        if (name == net.ground) inner_index[i] = -1;
        else if (name == net.port_in) inner_index[i] = sol.splice_left;
        else if (name == net.port_out) inner_index[i] = sol.splice_right;
        else inner_index[i] = next++;
    }
    const Eigen::Index dim = next;

    std::vector<Eigen::Triplet<double>> lt, ct;
    auto stamp = [](std::vector<Eigen::Triplet<double>>& t, Eigen::Index a, Eigen::Index b, double v) {
        if (a >= 0) t.emplace_back(a, a, v);
        if (b >= 0) t.emplace_back(b, b, v);
        if (a >= 0 && b >= 0) {
            t.emplace_back(a, b, -v);
            t.emplace_back(b, a, -v);
        }
    };
    // line cells
    for (int i = 0; i < n_l; ++i) stamp(lt, i, i + 1, 1.0 / (tl.l0 * dxl));
    for (int i = 0; i < n_r; ++i) stamp(lt, n_l + 1 + i, n_l + 2 + i, 1.0 / (tl.l0 * dxr));
    for (int i = 0; i <= n_l; ++i) {
        const double w = (i == 0 || i == n_l) ? 0.5 : 1.0;
        ct.emplace_back(i, i, w * tl.c0 * dxl);
    }
    for (int i = 0; i <= n_r; ++i) {
        const double w = (i == 0 || i == n_r) ? 0.5 : 1.0;
        ct.emplace_back(n_l + 1 + i, n_l + 1 + i, w * tl.c0 * dxr);
    }
    // inner circuit branches
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const Eigen::Index p = inner_index[net.node_index(net.branches[b].node_plus)];
        const Eigen::Index m = inner_index[net.node_index(net.branches[b].node_minus)];
        if (lin.branch_l[b] != 0.0) stamp(lt, p, m, lin.branch_l[b]);
        if (lin.branch_c[b] != 0.0) stamp(ct, p, m, lin.branch_c[b]);
    }
    Eigen::SparseMatrix<double> L(dim, dim), C(dim, dim);
    L.setFromTriplets(lt.begin(), lt.end());
    C.setFromTriplets(ct.begin(), ct.end());

    const double w_scale = pi * tl.velocity() / tl.length;
    const double sigma = 0.09 * w_scale * w_scale;
    auto [mus, vecs] = detail_::lowest_generalized(L, C, sigma, nev + 1);

    for (std::size_t i = 0; i < mus.size(); ++i) {
        const double w2 = 1.0 / mus[i] - sigma;
        const double w = w2 > 0 ? std::sqrt(w2) : 0.0;
        if (w < 1e-6 * w_scale) continue;  // constant-flux gauge mode
        sol.omegas.push_back(w);
        sol.vectors.conservativeResize(dim, static_cast<Eigen::Index>(sol.omegas.size()));
        sol.vectors.col(static_cast<Eigen::Index>(sol.omegas.size()) - 1) = vecs.col(static_cast<Eigen::Index>(i));
    }
    return sol;
}

/// Exact ladder of hbar w n + quartic junction correction on a truncated Fock
/// space, no rotating-wave truncation:
///   H = hbar w a^dag a - (2 pi^4 / 3 Phi_0^4) E_J (lambda (a + a^dag))^4,
/// lambda = sqrt(hbar / 2 c_sigma w) * delta_u. Energies in joule, ascending.
inline std::vector<double> quartic_fock_diagonalize(double omega, double ej_joule, double delta_u,
                                                    double c_sigma, int cutoff = 40) {
    if (cutoff < 30) throw SolverError("oracle: quartic diagonalization needs cutoff >= 30");
    const Eigen::Index n = cutoff + 1;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) x(i, i + 1) = x(i + 1, i) = std::sqrt(double(i + 1));
    const double lambda = std::sqrt(hbar / (2.0 * c_sigma * omega)) * delta_u;
    Eigen::MatrixXd x2 = x * x;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) h(i, i) = hbar * omega * double(i);
    h -= (2.0 * std::pow(pi, 4) / (3.0 * std::pow(flux_quantum, 4))) * ej_joule *
         std::pow(lambda, 4) * (x2 * x2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return out;
}

}  // namespace tlmodes::oracle
