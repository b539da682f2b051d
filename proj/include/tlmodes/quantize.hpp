#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "tlmodes/constants.hpp"
#include "tlmodes/errors.hpp"
#include "tlmodes/resonator.hpp"

namespace tlmodes {

struct QuantizedMode {
    double omega = 0.0;            // rad/s
    double zero_point_flux = 0.0;  // sqrt(hbar / 2 C_sigma omega), Wb
    std::vector<double> delta_u;   // per junction
};

inline QuantizedMode quantize_mode(const NormalMode& mode) {
    QuantizedMode q;
    q.omega = mode.omega;
    q.zero_point_flux = std::sqrt(hbar / (2.0 * mode.c_sigma * mode.omega));
    q.delta_u = mode.delta_u;
    return q;
}

/// Self-Kerr of one mode from the quartic junction terms:
///   K_mm = -sum_i 2 pi^4 hbar / Phi_0^4 * E_J,i / (C_sigma^2 omega^2) * du_i^4
/// The coefficient matches the quartic expansion of the cosine energy
/// (verified against full Fock-space diagonalization of the quartic term).
/// junctions: (E_J in joule, mode-function drop) pairs.
inline double kerr_self(const NormalMode& mode,
                        const std::vector<std::pair<double, double>>& junctions) {
    const double phi0_4 = std::pow(flux_quantum, 4);
    double sum = 0.0;
    for (const auto& [ej, du] : junctions) sum += ej * std::pow(du, 4);
    return -2.0 * std::pow(pi, 4) * hbar / phi0_4 * sum /
           (mode.c_sigma * mode.c_sigma * mode.omega * mode.omega);
}

/// Convenience overload pulling junction energies from the node matrices.
inline double kerr_self(const NormalMode& mode, const NodeMatrices& nm) {
    std::vector<std::pair<double, double>> junctions;
    for (std::size_t i = 0; i < nm.junction_rows.size(); ++i)
        junctions.emplace_back(planck * nm.junction_ej_hz[i], mode.delta_u[i]);
    return kerr_self(mode, junctions);
}

/// Cross-Kerr between two modes, K_mn = -2 sqrt(K_mm K_nn).
inline double kerr_cross(double k_mm, double k_nn) {
    if (k_mm > 0.0 || k_nn > 0.0)
        throw SolverError("kerr_cross requires non-positive self-Kerr inputs");
    return -2.0 * std::sqrt(k_mm * k_nn);
}

struct KerrMatrix {
    Eigen::MatrixXd k;  // rad/s, symmetric; k(m,m) = self-Kerr
};

inline KerrMatrix kerr_matrix(const std::vector<NormalMode>& modes, const NodeMatrices& nm) {
    const Eigen::Index n = static_cast<Eigen::Index>(modes.size());
    KerrMatrix km;
    km.k = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index m = 0; m < n; ++m) km.k(m, m) = kerr_self(modes[static_cast<std::size_t>(m)], nm);
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index p = m + 1; p < n; ++p)
            km.k(m, p) = km.k(p, m) = kerr_cross(km.k(m, m), km.k(p, p));
    return km;
}

/// Frequency shift of mode m carried by the number-operator part of the kept
/// Kerr terms: K_mm + sum_{n != m} K_mn / 2. Reported as a diagnostic only.
inline double kerr_lamb_shift(const KerrMatrix& km, Eigen::Index m) {
    double shift = km.k(m, m);
    for (Eigen::Index n = 0; n < km.k.rows(); ++n)
        if (n != m) shift += 0.5 * km.k(m, n);
    return shift;
}

/// Perturbative-validity ratio |K_mm| <n^2> / omega_m; the Kerr treatment is
/// trustworthy only while this stays well below one.
inline double kerr_validity_ratio(double k_mm, double omega, double n_mean_square) {
    return std::abs(k_mm) * n_mean_square / omega;
}

}  // namespace tlmodes
