#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tlmodes/errors.hpp"
#include "tlmodes/lumped.hpp"

namespace tlmodes {

// ---------------------------------------------------------------------------
// Transmission line with a zero-width insertion
// ---------------------------------------------------------------------------

struct TransmissionLine {
    double l0;      // inductance per length, H/m
    double c0;      // capacitance per length, F/m
    double length;  // m
    double x_c;     // insertion position, 0 < x_c < length

    [[nodiscard]] double velocity() const { return 1.0 / std::sqrt(l0 * c0); }
    [[nodiscard]] double impedance() const { return std::sqrt(l0 / c0); }
};

struct ModeSearchConfig {
    double omega_min;      // rad/s
    double omega_max;      // rad/s
    int grid_points = 0;   // 0: 2000 points per decade of frequency
    double root_tol = 1e-12;
    double pole_guard = 1e-9;  // relative half-width excluded around inner resonances
};

/// A normal mode of the combined line + circuit system. The continuous part
/// is A cos(kx) left of the insertion and B cos(k(x-l)) right of it (open
/// ends built into the ansatz); node_flux holds the discrete part in the
/// incidence-matrix column order. All amplitudes are dimensionless after
/// normalization; the physical flux scale enters through the quantized
/// amplitude sqrt(hbar / 2 C_sigma omega).
struct NormalMode {
    double omega = 0.0;       // rad/s
    double k = 0.0;           // 1/m
    double amp_left = 0.0;    // A
    double amp_right = 0.0;   // B
    Eigen::VectorXd node_flux;
    std::vector<double> delta_u;  // per junction, incidence row order of junctions
    double c_sigma = 0.0;     // F
    double l_sigma = 0.0;     // H
};

// ---------------------------------------------------------------------------
// Matching system
// ---------------------------------------------------------------------------

namespace detail {

/// Rows of the homogeneous 2x2 system in the segment amplitudes (A, B).
///
/// Line current is I(x) = -psi'(x)/L0; currents injected into the circuit are
/// +I(x_c-) at port_in and -I(x_c+) at port_out. Sign convention fixed by the
/// requirement that a series inductor lowers the mode frequencies and that
/// D == 0 reproduces the bare spectrum.
///
/// Floating circuit (current conserved, I0 = IN):
///     A sin(k x_c) - B sin(k (x_c - l)) = 0
///     B cos(k(x_c-l)) - A cos(k x_c) + D (k/L0) A sin(k x_c) = 0
/// Grounded circuit (internal shunt paths): the node fluxes at both ports
/// must match the line flux, with the two port currents independent:
///     A c1 - (k/L0) [ R_ii A s1 - R_io B s2 ] = 0
///     B c2 - (k/L0) [ R_oi A s1 - R_oo B s2 ] = 0
struct MatchingSystem {
    double a11, a12, a21, a22;
    [[nodiscard]] double det() const { return a11 * a22 - a12 * a21; }
    [[nodiscard]] double scale() const {
        return std::sqrt((a11 * a11 + a12 * a12) * (a21 * a21 + a22 * a22));
    }
};

inline MatchingSystem build_matching_system(const TransmissionLine& tl, const NodeMatrices* nm,
                                            double omega) {
    const double k = omega / tl.velocity();
    const double s1 = std::sin(k * tl.x_c), c1 = std::cos(k * tl.x_c);
    const double s2 = std::sin(k * (tl.x_c - tl.length)), c2 = std::cos(k * (tl.x_c - tl.length));
    const double kappa = k / tl.l0;
    MatchingSystem m{};
    if (nm == nullptr || nm->floating) {
        const double d = nm ? response(*nm, omega) : 0.0;
        m.a11 = s1;
        m.a12 = -s2;
        m.a21 = -c1 + d * kappa * s1;
        m.a22 = c2;
    } else {
        const PortResponse r = port_response(*nm, omega);
        m.a11 = c1 - kappa * r.in_in * s1;
        m.a12 = kappa * r.in_out * s2;
        m.a21 = -kappa * r.out_in * s1;
        m.a22 = c2 + kappa * r.out_out * s2;
    }
    return m;
}

}  // namespace detail

/// Determinant of the 2x2 matching system; its zeros are the eigenfrequencies.
/// Pass nm == nullptr for a bare (uninterrupted) line.
inline double matching_determinant(const TransmissionLine& tl, const NodeMatrices* nm, double omega) {
    return detail::build_matching_system(tl, nm, omega).det();
}

/// Residual |det| normalized by the row norms; used to certify roots.
inline double matching_residual(const TransmissionLine& tl, const NodeMatrices* nm, double omega) {
    const auto m = detail::build_matching_system(tl, nm, omega);
    const double s = m.scale();
    return s > 0.0 ? std::abs(m.det()) / s : 0.0;
}

// ---------------------------------------------------------------------------
// Root search and mode construction
// ---------------------------------------------------------------------------

namespace detail {

template <class F>
double bisect(F&& f, double a, double b, double fa, double rel_tol) {
    for (int it = 0; it < 200 && (b - a) > rel_tol * b; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fa < 0) != (fm < 0)) b = m;
        else a = m, fa = fm;
    }
    return 0.5 * (a + b);
}

/// Reconstructs the (unnormalized) mode at a matching root.
inline NormalMode reconstruct_mode(const TransmissionLine& tl, const NodeMatrices* nm, double omega) {
    NormalMode mode;
    mode.omega = omega;
    mode.k = omega / tl.velocity();
    const auto sys = build_matching_system(tl, nm, omega);
    // null vector from the better-conditioned row
    const double n1 = sys.a11 * sys.a11 + sys.a12 * sys.a12;
    const double n2 = sys.a21 * sys.a21 + sys.a22 * sys.a22;
    double A, B;
    if (n1 >= n2) A = sys.a12, B = -sys.a11;
    else A = sys.a22, B = -sys.a21;
    const double norm = std::hypot(A, B);
    if (norm == 0.0) throw ZeroNormError("degenerate matching null vector");
    mode.amp_left = A / norm;
    mode.amp_right = B / norm;

    if (nm == nullptr) {
        mode.node_flux.resize(0);
        return mode;
    }
    const double k = mode.k;
    const double s1 = std::sin(k * tl.x_c), c1 = std::cos(k * tl.x_c);
    const double s2 = std::sin(k * (tl.x_c - tl.length));
    const double inj_in = (mode.amp_left * k / tl.l0) * s1;
    const double inj_out = -(mode.amp_right * k / tl.l0) * s2;

    auto rs = factor_reduced(*nm, omega);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rs.keep.size()));
    if (rs.red_in >= 0) rhs(rs.red_in) += inj_in;
    if (rs.red_out >= 0) rhs(rs.red_out) += inj_out;
    Eigen::VectorXd phi_red = rs.lu.solve(rhs);

    mode.node_flux = Eigen::VectorXd::Zero(nm->size());
    for (std::size_t i = 0; i < rs.keep.size(); ++i) mode.node_flux(rs.keep[i]) = phi_red(i);
    if (nm->floating) {
        // gauge shift so the port_in flux equals the line flux at x_c-
        mode.node_flux.array() += mode.amp_left * c1 - mode.node_flux(nm->idx_in);
    }
    for (auto row : nm->junction_rows)
        mode.delta_u.push_back(nm->incidence.row(row).dot(mode.node_flux));
    return mode;
}

// closed-form segment integrals for products of cos / sin mode shapes
inline double integral_cos_cos(double k1, double s1, double k2, double s2, double x0, double x1) {
    // int cos(k1 x + s1) cos(k2 x + s2) dx
    auto prim = [&](double x) {
        if (std::abs(k1 - k2) < 1e-12 * std::max(std::abs(k1), std::abs(k2)))
            return 0.5 * (x * std::cos(s1 - s2) + std::sin((k1 + k2) * x + s1 + s2) / (k1 + k2));
        return 0.5 * (std::sin((k1 - k2) * x + s1 - s2) / (k1 - k2) +
                      std::sin((k1 + k2) * x + s1 + s2) / (k1 + k2));
    };
    return prim(x1) - prim(x0);
}

inline double integral_sin_sin(double k1, double s1, double k2, double s2, double x0, double x1) {
    auto prim = [&](double x) {
        if (std::abs(k1 - k2) < 1e-12 * std::max(std::abs(k1), std::abs(k2)))
            return 0.5 * (x * std::cos(s1 - s2) - std::sin((k1 + k2) * x + s1 + s2) / (k1 + k2));
        return 0.5 * (std::sin((k1 - k2) * x + s1 - s2) / (k1 - k2) -
                      std::sin((k1 + k2) * x + s1 + s2) / (k1 + k2));
    };
    return prim(x1) - prim(x0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Energy inner products
// ---------------------------------------------------------------------------

/// Capacitive inner product: C0 int psi_a psi_b dx + phi_a^T Ctilde phi_b.
inline double mode_inner_product_c(const NormalMode& a, const NormalMode& b,
                                   const TransmissionLine& tl, const NodeMatrices* nm) {
    double val = tl.c0 * (a.amp_left * b.amp_left *
                              detail::integral_cos_cos(a.k, 0.0, b.k, 0.0, 0.0, tl.x_c) +
                          a.amp_right * b.amp_right *
                              detail::integral_cos_cos(a.k, -a.k * tl.length, b.k, -b.k * tl.length,
                                                       tl.x_c, tl.length));
    if (nm && a.node_flux.size() > 0 && b.node_flux.size() > 0)
        val += a.node_flux.dot(nm->ctilde * b.node_flux);
    return val;
}

/// Inductive inner product: (1/L0) int psi_a' psi_b' dx + phi_a^T Ltilde phi_b.
inline double mode_inner_product_l(const NormalMode& a, const NormalMode& b,
                                   const TransmissionLine& tl, const NodeMatrices* nm) {
    double val = (1.0 / tl.l0) *
                 (a.amp_left * b.amp_left * a.k * b.k *
                      detail::integral_sin_sin(a.k, 0.0, b.k, 0.0, 0.0, tl.x_c) +
                  a.amp_right * b.amp_right * a.k * b.k *
                      detail::integral_sin_sin(a.k, -a.k * tl.length, b.k, -b.k * tl.length,
                                               tl.x_c, tl.length));
    if (nm && a.node_flux.size() > 0 && b.node_flux.size() > 0)
        val += a.node_flux.dot(nm->ltilde * b.node_flux);
    return val;
}

/// Rescales the mode so its capacitive self-norm equals c_sigma_target
/// (default C0 * length, one common C_sigma for every mode), computes l_sigma
/// from the inductive norm, and checks omega = 1/sqrt(c_sigma l_sigma).
inline NormalMode normalize_mode(NormalMode mode, const TransmissionLine& tl, const NodeMatrices* nm,
                                 double c_sigma_target = 0.0) {
    if (c_sigma_target <= 0.0) c_sigma_target = tl.c0 * tl.length;
    const double norm_c = mode_inner_product_c(mode, mode, tl, nm);
    if (!(norm_c > 0.0)) throw ZeroNormError("mode has vanishing capacitive norm");
    const double r = std::sqrt(c_sigma_target / norm_c);
    mode.amp_left *= r;
    mode.amp_right *= r;
    if (mode.node_flux.size() > 0) mode.node_flux *= r;
    for (auto& du : mode.delta_u) du *= r;
    mode.c_sigma = c_sigma_target;
    const double norm_l = mode_inner_product_l(mode, mode, tl, nm);
    if (!(norm_l > 0.0)) throw ZeroNormError("mode has vanishing inductive norm");
    mode.l_sigma = 1.0 / norm_l;
    const double w_check = 1.0 / std::sqrt(mode.c_sigma * mode.l_sigma);
    if (std::abs(w_check - mode.omega) > 1e-6 * mode.omega)
        throw SolverError("energy norms inconsistent with eigenfrequency");
    return mode;
}

// ---------------------------------------------------------------------------
// Mode search
// ---------------------------------------------------------------------------

/// Scans the matching determinant, brackets sign changes away from inner
/// resonances, bisects each bracket, reconstructs and normalizes the modes.
inline std::vector<NormalMode> find_modes(const TransmissionLine& tl, const NodeMatrices* nm,
                                          const ModeSearchConfig& cfg) {
    if (!(cfg.omega_min > 0.0) || !(cfg.omega_max > cfg.omega_min))
        throw SolverError("invalid mode search range");
    int npts = cfg.grid_points;
    if (npts <= 0)
        npts = std::max(100, static_cast<int>(2000 * std::log10(cfg.omega_max / cfg.omega_min)) + 2);

    std::vector<double> poles;
    if (nm) {
        for (double w : inner_spectrum(*nm))
            if (w > 0 && w >= cfg.omega_min * 0.5 && w <= cfg.omega_max * 2.0) poles.push_back(w);
    }
    const double guard = std::max(cfg.pole_guard, 1e-12);

    // scan grid, with points straddling each pole so no bracket crosses one
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(npts) + 2 * poles.size());
    for (int i = 0; i < npts; ++i)
        grid.push_back(cfg.omega_min + (cfg.omega_max - cfg.omega_min) * i / double(npts - 1));
    for (double p : poles) {
        if (p * (1 - 10 * guard) > cfg.omega_min) grid.push_back(p * (1 - 10 * guard));
        if (p * (1 + 10 * guard) < cfg.omega_max) grid.push_back(p * (1 + 10 * guard));
    }
    std::sort(grid.begin(), grid.end());

    auto inside_guard = [&](double w) {
        for (double p : poles)
            if (std::abs(w - p) <= 10 * guard * p) return true;
        return false;
    };
    auto crosses_pole = [&](double a, double b) {
        for (double p : poles)
            if (a < p && p < b) return true;
        return false;
    };
    auto f = [&](double w) { return matching_determinant(tl, nm, w); };

    std::vector<NormalMode> modes;
    double prev_w = grid[0];
    double prev_v = f(prev_w);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double w = grid[i];
        if (w <= prev_w) continue;
        const double v = f(w);
        const bool bracket = (prev_v == 0.0) || ((prev_v < 0) != (v < 0));
        if (bracket && !crosses_pole(prev_w, w)) {
            double root = prev_v == 0.0 ? prev_w : detail::bisect(f, prev_w, w, prev_v, cfg.root_tol);
            if (!inside_guard(root)) {
                NormalMode m = detail::reconstruct_mode(tl, nm, root);
                modes.push_back(normalize_mode(std::move(m), tl, nm));
            }
            // a root rejected inside a guard band is a RootAtPole: skipped
        }
        prev_w = w;
        prev_v = v;
    }
    if (modes.empty()) throw NoRootsInRangeError("no normal modes found in the search range");
    std::sort(modes.begin(), modes.end(),
              [](const NormalMode& a, const NormalMode& b) { return a.omega < b.omega; });
    return modes;
}

/// Lowest mode of a given line; scans a wide window around the bare
/// fundamental, which bounds the loaded one for any passive insertion.
inline double first_mode_frequency(const TransmissionLine& tl, const NodeMatrices* nm) {
    const double bare = pi * tl.velocity() / tl.length;
    ModeSearchConfig cfg;
    cfg.omega_min = 0.3 * bare;
    cfg.omega_max = 1.9 * bare;
    cfg.grid_points = 2500;
    return find_modes(tl, nm, cfg).front().omega;
}

/// Adjusts the line length so the fundamental lands on target_omega1,
/// keeping the insertion at the same fractional position.
inline TransmissionLine calibrate_length(double l0, double c0, double xc_frac, double target_omega1,
                                         const NodeMatrices* nm) {
    const double v = 1.0 / std::sqrt(l0 * c0);
    const double bare = pi * v / target_omega1;
    auto omega1_of = [&](double length) {
        TransmissionLine tl{l0, c0, length, xc_frac * length};
        return first_mode_frequency(tl, nm);
    };
    double lo = 0.5 * bare, hi = 1.5 * bare;
    double flo = omega1_of(lo) - target_omega1;
    double fhi = omega1_of(hi) - target_omega1;
    if ((flo < 0) == (fhi < 0))
        throw TargetUnreachableError("fundamental-mode target not bracketed by length search");
    // omega1 decreases with length: plain bisection, deterministic
    const double length =
        detail::bisect([&](double l) { return omega1_of(l) - target_omega1; }, lo, hi, flo, 1e-12);
    return TransmissionLine{l0, c0, length, xc_frac * length};
}

}  // namespace tlmodes
