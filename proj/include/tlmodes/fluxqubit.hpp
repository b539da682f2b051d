#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "tlmodes/constants.hpp"
#include "tlmodes/detail/lanczos.hpp"
#include "tlmodes/errors.hpp"
#include "tlmodes/netlist.hpp"
#include "tlmodes/quantize.hpp"

namespace tlmodes {

// ---------------------------------------------------------------------------
// Three-junction flux qubit
// ---------------------------------------------------------------------------

struct FluxQubitSpec {
    double ej = 0.0;        // joule, the two identical side junctions
    double cj = 0.0;        // F
    double alpha = 0.0;     // center junction scale, < 1
    double cs_minus = 0.0;  // F, effective shunt of the minus mode
    double cs_plus = 0.0;   // F
    double phi_ext = 0.5;   // external flux in Phi_0 units

    [[nodiscard]] double ec_minus() const {
        return elementary_charge * elementary_charge / (2.0 * ((4.0 + 4.0 * alpha) * cj + cs_minus));
    }
    [[nodiscard]] double ec_plus() const {
        return elementary_charge * elementary_charge / (2.0 * (4.0 * cj + cs_plus));
    }

    /// Extracts qubit parameters from a flux-loop declaration: the outer
    /// branches are the identical junctions, the middle one the alpha
    /// junction.
    static FluxQubitSpec from_loop(const CircuitNetlist& net, const FluxLoopDecl& loop) {
        const auto& b1 = std::get<Junction>(net.branch(loop.branch_ids[0]).kind);
        const auto& ba = std::get<Junction>(net.branch(loop.branch_ids[1]).kind);
        const auto& b3 = std::get<Junction>(net.branch(loop.branch_ids[2]).kind);
        if (std::abs(b1.ej_hz - b3.ej_hz) > 1e-9 * b1.ej_hz)
            throw SolverError("fluxloop '" + loop.id + "': outer junctions differ");
        FluxQubitSpec spec;
        spec.ej = planck * b1.ej_hz;
        spec.cj = b1.cj_farad;
        spec.alpha = ba.ej_hz / b1.ej_hz;
        spec.cs_minus = loop.shunt_cap_minus;
        spec.cs_plus = loop.shunt_cap_plus;
        spec.phi_ext = loop.phi_ext;
        return spec;
    }
};

struct PhaseGrid {
    int n = 64;  // points per axis, power of two, >= 32
};

// ---------------------------------------------------------------------------
// Grid Hamiltonian
// ---------------------------------------------------------------------------

/// H = 4 E_C+ n_+^2 + 4 E_C- n_-^2
///     - E_J [ 2 cos(phi_+) cos(phi_-) + alpha cos(2 pi Phi/Phi_0 + 2 phi_-) ]
/// on the periodic grid phi_± in [-pi, pi). The kinetic term is exact in the
/// discrete Fourier (integer-charge) basis and realized as a dense symmetric
/// circulant along each axis; the potential is diagonal.
///
/// Note the (phi_+, phi_-) torus double-covers the junction-phase torus:
/// physical charge pairs have even sum, equivalently physical wavefunctions
/// are invariant under the half-period translation (phi_+, phi_-) ->
/// (phi_+ + pi, phi_- + pi). Solvers must restrict to that sector.
class PhaseGridHamiltonian {
public:
    PhaseGridHamiltonian(const FluxQubitSpec& spec, const PhaseGrid& grid)
        : n_(grid.n), spec_(spec) {
        if (n_ < 32 || (n_ & (n_ - 1)) != 0) throw SolverError("phase grid must be a power of two >= 32");
        kinetic1d_ = Eigen::MatrixXd(n_, n_);
        std::vector<double> profile(static_cast<std::size_t>(n_));
        for (int d = 0; d < n_; ++d) {
            double s = 0.0;
            for (int j = 0; j < n_; ++j) {
                const int kj = j <= n_ / 2 ? j : j - n_;
                s += double(kj) * double(kj) * std::cos(two_pi * kj * d / double(n_));
            }
            profile[static_cast<std::size_t>(d)] = s / n_;
        }
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b)
                kinetic1d_(a, b) = profile[static_cast<std::size_t>((a - b + n_) % n_)];

        potential_ = Eigen::MatrixXd(n_, n_);  // (minus, plus)
        for (int im = 0; im < n_; ++im) {
            const double pm = phase(im);
            for (int ip = 0; ip < n_; ++ip) {
                const double pp = phase(ip);
                potential_(im, ip) =
                    -spec.ej * (2.0 * std::cos(pp) * std::cos(pm) +
                                spec.alpha * std::cos(two_pi * spec.phi_ext + 2.0 * pm));
            }
        }
    }

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] Eigen::Index dim() const { return static_cast<Eigen::Index>(n_) * n_; }
    [[nodiscard]] double phase(int i) const { return -pi + two_pi * i / double(n_); }
    [[nodiscard]] const FluxQubitSpec& spec() const { return spec_; }

    /// y = H x; vectors indexed (i_minus + n * i_plus).
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        Eigen::Map<const Eigen::MatrixXd> X(x.data(), n_, n_);
        Eigen::Map<Eigen::MatrixXd> Y(y.data(), n_, n_);
        Y = 4.0 * spec_.ec_minus() * (kinetic1d_ * X) + 4.0 * spec_.ec_plus() * (X * kinetic1d_) +
            potential_.cwiseProduct(X);
    }

    /// Projects onto the physical translation-even sector.
    void project_physical(Eigen::VectorXd& x) const {
        Eigen::Map<Eigen::MatrixXd> X(x.data(), n_, n_);
        const int h = n_ / 2;
        Eigen::MatrixXd T(n_, n_);
        for (int im = 0; im < n_; ++im)
            for (int ip = 0; ip < n_; ++ip) T(im, ip) = X((im + h) % n_, (ip + h) % n_);
        X = 0.5 * (X + T);
    }

    /// Dense matrix, for small grids and structural tests.
    [[nodiscard]] Eigen::MatrixXd dense() const {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), dim());
        for (int ip = 0; ip < n_; ++ip)
            for (int im = 0; im < n_; ++im) {
                const Eigen::Index col = im + static_cast<Eigen::Index>(n_) * ip;
                for (int jm = 0; jm < n_; ++jm)
                    h(jm + static_cast<Eigen::Index>(n_) * ip, col) += 4.0 * spec_.ec_minus() * kinetic1d_(jm, im);
                for (int jp = 0; jp < n_; ++jp)
                    h(im + static_cast<Eigen::Index>(n_) * jp, col) += 4.0 * spec_.ec_plus() * kinetic1d_(jp, ip);
                h(col, col) += potential_(im, ip);
            }
        return h;
    }

private:
    int n_;
    FluxQubitSpec spec_;
    Eigen::MatrixXd kinetic1d_;
    Eigen::MatrixXd potential_;
};

inline PhaseGridHamiltonian build_hamiltonian(const FluxQubitSpec& spec, const PhaseGrid& grid) {
    return PhaseGridHamiltonian(spec, grid);
}

// ---------------------------------------------------------------------------
// Qubit solution
// ---------------------------------------------------------------------------

struct QubitSolution {
    std::array<double, 4> energies{};  // joule, lowest physical levels
    double omega10 = 0.0;              // rad/s
    double s01 = 0.0;                  // <0| sin(2 phi_- + 2 pi Phi/Phi_0) |1>
    double p01 = 0.0;                  // <0| phi_- |1>
};

namespace detail {

inline LanczosResult solve_states(const FluxQubitSpec& spec, const PhaseGrid& grid, int nev) {
    const PhaseGridHamiltonian h(spec, grid);
    const Eigen::Index dim = h.dim();
    Eigen::VectorXd start(dim);
    for (Eigen::Index i = 0; i < dim; ++i) start(i) = std::sin(1.0 + 0.7919 * double(i));
    return lanczos_lowest(
        dim, [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { h.apply(x, y); }, nev, start,
        /*max_iter=*/900, /*tol=*/1e-12,
        [&](Eigen::VectorXd& x) { h.project_physical(x); });
}

}  // namespace detail

inline QubitSolution solve(const FluxQubitSpec& spec, const PhaseGrid& grid) {
    const PhaseGridHamiltonian h(spec, grid);
    auto result = detail::solve_states(spec, grid, 4);

    QubitSolution sol;
    for (int i = 0; i < 4; ++i) sol.energies[static_cast<std::size_t>(i)] = result.values(i);
    sol.omega10 = (result.values(1) - result.values(0)) / hbar;

    Eigen::VectorXd v0 = result.vectors.col(0), v1 = result.vectors.col(1);
    // gauge: first significant component positive
    auto fix_gauge = [&](Eigen::VectorXd& v) {
        const double scale = v.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (std::abs(v(i)) > 1e-8 * scale) {
                if (v(i) < 0) v = -v;
                return;
            }
        }
    };
    fix_gauge(v0);
    fix_gauge(v1);

    const int n = h.n();
    // sin(2 phi_- + ...) is invariant under the half-period translation and
    // sums over the whole grid. phi_- is not: each grid point is mapped to
    // its representative on the junction-phase torus |phi_+| + |phi_-| <= pi,
    // whose phi_- coordinate is the physical phase difference; the 2 pi
    // branch cut of that coordinate lies on the torus boundary, where the
    // states must carry negligible weight for p01 to mean anything.
    double cut_weight = 0.0, s01 = 0.0, p01 = 0.0;
    const double ring = 1.5 * two_pi / n;
    for (int ip = 0; ip < n; ++ip)
        for (int im = 0; im < n; ++im) {
            const Eigen::Index idx = im + static_cast<Eigen::Index>(n) * ip;
            const double pm = h.phase(im);
            const double pp = h.phase(ip);
            s01 += v0(idx) * std::sin(2.0 * pm + two_pi * spec.phi_ext) * v1(idx);
            double pm_canon = pm;
            if (std::abs(pm) + std::abs(pp) > pi) pm_canon = pm > 0 ? pm - pi : pm + pi;
            if (std::abs(std::abs(pm) + std::abs(pp) - pi) <= ring)
                cut_weight += v0(idx) * v0(idx) + v1(idx) * v1(idx);
            p01 += v0(idx) * pm_canon * v1(idx);
        }
    if (cut_weight > 1e-6)
        throw BranchCutContaminationError("qubit states reach the phi_- branch cut (weight " +
                                          std::to_string(cut_weight) + ")");
    sol.s01 = s01;
    sol.p01 = p01;
    return sol;
}

/// Root-finds the common scale of (cs_minus, cs_plus) so the splitting hits
/// target_omega10 (rad/s) to 1e-6 relative. omega10 decreases with C_S.
/// Only the energies are needed here, so no matrix elements are evaluated.
inline double calibrate_shunt(const FluxQubitSpec& spec, const PhaseGrid& grid,
                              double target_omega10) {
    auto omega_of = [&](double scale) {
        FluxQubitSpec s = spec;
        s.cs_minus *= scale;
        s.cs_plus *= scale;
        const auto states = detail::solve_states(s, grid, 2);
        return (states.values(1) - states.values(0)) / hbar;
    };
    double lo = 0.125, hi = 8.0;
    double wlo = omega_of(lo), whi = omega_of(hi);
    if (!(wlo > whi) || target_omega10 > wlo || target_omega10 < whi)
        throw TargetUnreachableError("qubit frequency target outside the shunt calibration range");
    // bracketed secant with bisection fallback
    double a = lo, b = hi, fa = wlo - target_omega10, fb = whi - target_omega10;
    for (int it = 0; it < 80; ++it) {
        double m = (fb - fa) != 0.0 ? a - fa * (b - a) / (fb - fa) : 0.5 * (a + b);
        if (!(m > a && m < b)) m = 0.5 * (a + b);
        const double fm = omega_of(m) - target_omega10;
        if (std::abs(fm) <= 1e-6 * target_omega10) return spec.cs_minus * m;
        if ((fa < 0) == (fm < 0)) a = m, fa = fm;
        else b = m, fb = fm;
    }
    throw NonConvergenceError("shunt calibration did not converge");
}

// ---------------------------------------------------------------------------
// Couplings
// ---------------------------------------------------------------------------

/// Qubit-resonator coupling, Rabi form:
///   hbar g = alpha E_J sqrt(hbar / 2 C_sigma w_m) (2 pi du_m / Phi_0) s01.
inline double coupling_g(const QuantizedMode& mode, const FluxQubitSpec& spec,
                         const QubitSolution& qsol, double delta_u) {
    return spec.alpha * spec.ej * mode.zero_point_flux * (two_pi * delta_u / flux_quantum) *
           qsol.s01 / hbar;
}

/// Fraction of the loop flux dropped across a small shared inductor:
/// phi_C / Phi_Sigma = sqrt((2 L_J + L_a + L_C) / (2 L_J + L_a)) - 1.
inline double coupling_flux_fraction(double l_j, double l_alpha, double l_c) {
    const double base = 2.0 * l_j + l_alpha;
    return std::sqrt((base + l_c) / base) - 1.0;
}

/// Inductive qubit-qubit coupling through a shared inductor (joule):
///   G12 = 8 (Phi_0/2pi)^2 / L_C * [L_C p01_1 / (2L_J+L_a)]_1 [L_C p01_2 / (2L_J+L_a)]_2
/// multiplied by the declared geometric sign (twisted loops give -1).
inline double qubit_qubit_coupling(const FluxQubitSpec& spec1, const QubitSolution& q1,
                                   const FluxQubitSpec& spec2, const QubitSolution& q2, double l_c,
                                   int sign) {
    if (l_c <= 0.0) return 0.0;
    auto bracket = [&](const FluxQubitSpec& s, const QubitSolution& q) {
        const double lj = flux_quantum * flux_quantum / (4.0 * pi * pi * s.ej);
        const double la = lj / s.alpha;
        return l_c * q.p01 / (2.0 * lj + la);
    };
    const double phi0_over_2pi = flux_quantum / two_pi;
    return sign * 8.0 * phi0_over_2pi * phi0_over_2pi / l_c * bracket(spec1, q1) * bracket(spec2, q2);
}

}  // namespace tlmodes
