#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tlmodes/errors.hpp"

namespace tlmodes {

// ---------------------------------------------------------------------------
// Coupled mode + two-qubit Hamiltonian
// ---------------------------------------------------------------------------

/// Parameters of H3 (all rad/s):
///   H3/hbar = w3 a+a + (k33/2) a+a a+a + (w10_i/2) sz_i + g3_i sx_i (a+ + a)
///             - g12 sx_1 sx_2
/// g12 carries its geometric sign (a twisted shared inductor makes it
/// negative).
struct CoupledSpec {
    double omega3 = 0.0;
    double k33 = 0.0;
    double omega10_1 = 0.0;
    double omega10_2 = 0.0;
    double g3_1 = 0.0;
    double g3_2 = 0.0;
    double g12 = 0.0;
    int fock_cutoff = 12;
};

/// Basis |n> x |q1> x |q2>, index n*4 + q1*2 + q2 with q = 0 the qubit ground
/// (sz = diag(-1, +1)). Entries in rad/s.
inline Eigen::MatrixXd build_h3(const CoupledSpec& spec, int cutoff = -1) {
    const int nc = cutoff < 0 ? spec.fock_cutoff : cutoff;
    if (nc < 6) throw SolverError("fock cutoff must be at least 6");
    const Eigen::Index dim = 4 * static_cast<Eigen::Index>(nc + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    auto idx = [&](int n, int q1, int q2) { return static_cast<Eigen::Index>(n * 4 + q1 * 2 + q2); };
    for (int n = 0; n <= nc; ++n)
        for (int q1 = 0; q1 < 2; ++q1)
            for (int q2 = 0; q2 < 2; ++q2) {
                const auto i = idx(n, q1, q2);
                h(i, i) = spec.omega3 * n + 0.5 * spec.k33 * double(n) * double(n) +
                          0.5 * spec.omega10_1 * (q1 ? 1.0 : -1.0) +
                          0.5 * spec.omega10_2 * (q2 ? 1.0 : -1.0);
                // sx_1 (a+ + a)
                if (n + 1 <= nc) {
                    h(idx(n + 1, 1 - q1, q2), i) += spec.g3_1 * std::sqrt(double(n + 1));
                    h(idx(n + 1, q1, 1 - q2), i) += spec.g3_2 * std::sqrt(double(n + 1));
                }
                if (n > 0) {
                    h(idx(n - 1, 1 - q1, q2), i) += spec.g3_1 * std::sqrt(double(n));
                    h(idx(n - 1, q1, 1 - q2), i) += spec.g3_2 * std::sqrt(double(n));
                }
                h(idx(n, 1 - q1, 1 - q2), i) += -spec.g12;
            }
    return h;
}

struct EffectiveKerr {
    double k_tilde = 0.0;       // (E2~ - 2 E1~ + E0~)/hbar, rad/s
    double omega_tilde = 0.0;   // dressed one-photon spacing, rad/s
    std::array<double, 3> overlaps{};
    double k_tilde_next = 0.0;  // (E3~ - 2 E2~ + E1~)/hbar, diagnostic
};

namespace detail {

struct DressedLadder {
    std::array<double, 4> energies{};
    std::array<double, 4> overlaps{};
};

inline DressedLadder dressed_ladder(const CoupledSpec& spec, int cutoff) {
    const Eigen::MatrixXd h = build_h3(spec, cutoff);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw SolverError("coupled Hamiltonian diagonalization failed");
    DressedLadder lad;
    std::array<Eigen::Index, 4> which{};
    for (int n = 0; n < 4; ++n) {
        const Eigen::Index basis = static_cast<Eigen::Index>(n * 4);  // |n, g, g>
        Eigen::Index best = 0;
        double best_ov = -1.0;
        for (Eigen::Index j = 0; j < h.rows(); ++j) {
            const double ov = es.eigenvectors()(basis, j) * es.eigenvectors()(basis, j);
            if (ov > best_ov) best_ov = ov, best = j;
        }
        lad.energies[static_cast<std::size_t>(n)] = es.eigenvalues()(best);
        lad.overlaps[static_cast<std::size_t>(n)] = best_ov;
        which[static_cast<std::size_t>(n)] = best;
    }
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            if (which[static_cast<std::size_t>(a)] == which[static_cast<std::size_t>(b)])
                throw IdentificationFailureError("two dressed photon labels map to one eigenstate");
    for (int n = 0; n < 3; ++n)
        if (lad.overlaps[static_cast<std::size_t>(n)] <= 0.5)
            throw IdentificationFailureError("dressed state overlap " +
                                             std::to_string(lad.overlaps[static_cast<std::size_t>(n)]) +
                                             " below 0.5 for n=" + std::to_string(n));
    return lad;
}

}  // namespace detail

/// Diagonalizes H3, identifies the dressed photon ladder by maximal overlap
/// with |n> x |g,g>, and extracts the effective Kerr constant as the ladder's
/// second difference. Convergence is certified by repeating at cutoff + 4.
inline EffectiveKerr effective_kerr(const CoupledSpec& spec) {
    const auto lad = detail::dressed_ladder(spec, spec.fock_cutoff);
    const auto check = detail::dressed_ladder(spec, spec.fock_cutoff + 4);
    EffectiveKerr out;
    out.k_tilde = lad.energies[2] - 2.0 * lad.energies[1] + lad.energies[0];
    out.omega_tilde = lad.energies[1] - lad.energies[0];
    out.k_tilde_next = lad.energies[3] - 2.0 * lad.energies[2] + lad.energies[1];
    for (int i = 0; i < 3; ++i) out.overlaps[static_cast<std::size_t>(i)] = lad.overlaps[static_cast<std::size_t>(i)];
    const double k_check = check.energies[2] - 2.0 * check.energies[1] + check.energies[0];
    const double scale = std::max(std::abs(out.k_tilde), 1e-9 * spec.omega3);
    if (std::abs(k_check - out.k_tilde) > 1e-3 * scale)
        throw NonConvergenceError("effective Kerr not converged in the Fock cutoff");
    return out;
}

/// Rescales the qubit-qubit coupling g12 -> eta g12 point by point.
inline std::vector<std::pair<double, EffectiveKerr>> sweep_eta(const CoupledSpec& spec,
                                                               const std::vector<double>& etas) {
    std::vector<std::pair<double, EffectiveKerr>> out;
    out.reserve(etas.size());
    for (double eta : etas) {
        if (eta < 0) throw SolverError("eta must be non-negative");
        CoupledSpec s = spec;
        s.g12 = eta * spec.g12;
        out.emplace_back(eta, effective_kerr(s));
    }
    return out;
}

}  // namespace tlmodes
