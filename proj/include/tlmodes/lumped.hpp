#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tlmodes/constants.hpp"
#include "tlmodes/errors.hpp"
#include "tlmodes/netlist.hpp"

namespace tlmodes {

// ---------------------------------------------------------------------------
// Linearization
// ---------------------------------------------------------------------------

struct LinearizedCircuit {
    CircuitNetlist base;
    std::vector<double> branch_l;              // inverse inductance 1/L_i, 0 for capacitors
    std::vector<double> branch_c;              // capacitance
    std::vector<std::size_t> junction_index;   // branch indices that are junctions
};

/// Junctions linearize to L_J = (Phi_0/2pi)^2 / E_J in parallel with cj;
/// pure capacitors carry zero inverse inductance.
inline LinearizedCircuit linearize(const CircuitNetlist& net) {
    LinearizedCircuit lin;
    lin.base = net;
    lin.branch_l.reserve(net.branches.size());
    lin.branch_c.reserve(net.branches.size());
    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        const auto& b = net.branches[i];
        if (const auto* c = std::get_if<Capacitor>(&b.kind)) {
            lin.branch_l.push_back(0.0);
            lin.branch_c.push_back(c->farad);
        } else if (const auto* l = std::get_if<Inductor>(&b.kind)) {
            lin.branch_l.push_back(1.0 / l->henry);
            lin.branch_c.push_back(0.0);
        } else {
            const auto& j = std::get<Junction>(b.kind);
            lin.branch_l.push_back(josephson_inverse_inductance(j.ej_hz));
            lin.branch_c.push_back(j.cj_farad);
            lin.junction_index.push_back(i);
        }
    }
    return lin;
}

// ---------------------------------------------------------------------------
// Node matrices
// ---------------------------------------------------------------------------

struct NodeMatrices {
    Eigen::MatrixXd ctilde;   // K^T diag(c) K
    Eigen::MatrixXd ltilde;   // K^T diag(1/l) K
    Eigen::MatrixXd incidence;
    std::vector<std::string> node_order;    // columns
    std::vector<std::string> branch_order;  // rows of incidence
    std::vector<Eigen::Index> junction_rows;
    std::vector<double> junction_ej_hz;
    Eigen::Index idx_in = -1;
    Eigen::Index idx_out = -1;
    bool floating = false;  // no branch incident on ground: gauge-fix port_in

    [[nodiscard]] Eigen::Index size() const { return ctilde.rows(); }

    /// Indices kept in the reduced (invertible) system.
    [[nodiscard]] std::vector<Eigen::Index> reduced_indices() const {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < size(); ++i)
            if (!(floating && i == idx_in)) keep.push_back(i);
        return keep;
    }
};

inline NodeMatrices build_node_matrices(const LinearizedCircuit& lin, const IncidenceMatrix& k) {
    NodeMatrices nm;
    const auto& K = k.entries;
    Eigen::VectorXd c(K.rows()), l(K.rows());
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        c(i) = lin.branch_c[static_cast<std::size_t>(i)];
        l(i) = lin.branch_l[static_cast<std::size_t>(i)];
    }
    nm.ctilde = K.transpose() * c.asDiagonal() * K;
    nm.ltilde = K.transpose() * l.asDiagonal() * K;
    // enforce exact symmetry against rounding in the triple product
    nm.ctilde = ((nm.ctilde + nm.ctilde.transpose()) * 0.5).eval();
    nm.ltilde = ((nm.ltilde + nm.ltilde.transpose()) * 0.5).eval();
    nm.incidence = K;
    nm.node_order = k.col_order;
    nm.branch_order = k.row_order;
    for (auto bi : lin.junction_index) {
        nm.junction_rows.push_back(static_cast<Eigen::Index>(bi));
        nm.junction_ej_hz.push_back(std::get<Junction>(lin.base.branches[bi].kind).ej_hz);
    }
    auto col_of = [&](const std::string& n) -> Eigen::Index {
        for (std::size_t i = 0; i < k.col_order.size(); ++i)
            if (k.col_order[i] == n) return static_cast<Eigen::Index>(i);
        return -1;
    };
    nm.idx_in = col_of(lin.base.port_in);   // -1 when the port is the ground node
    nm.idx_out = col_of(lin.base.port_out);
    nm.floating = lin.base.floating();
    return nm;
}

// ---------------------------------------------------------------------------
// Inner spectrum and port response
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
    return out;
}

}  // namespace detail

/// Angular eigenfrequencies of the isolated inner circuit: the generalized
/// problem ltilde v = w^2 ctilde v on the reduced system, restricted to the
/// subspace where ctilde is positive definite. Massless flux directions
/// (null space of ctilde, including capacitance-free nodes) are eliminated by
/// static condensation of ltilde; a massless direction without inductive
/// restoring cannot be eliminated and is an error.
inline std::vector<double> inner_spectrum(const NodeMatrices& nm) {
    const auto keep = nm.reduced_indices();
    if (keep.empty()) return {};
    const Eigen::MatrixXd C = detail::submatrix(nm.ctilde, keep);
    const Eigen::MatrixXd L = detail::submatrix(nm.ltilde, keep);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ces(C);
    const double cmax = ces.eigenvalues().cwiseAbs().maxCoeff();
    if (cmax == 0.0) return {};  // purely inductive: no finite resonances
    std::vector<Eigen::Index> massive, massless;
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
        if (ces.eigenvalues()(i) > 1e-13 * cmax) massive.push_back(i);
        else massless.push_back(i);
    }
    if (massive.empty()) return {};
    const Eigen::Index na = static_cast<Eigen::Index>(massive.size());
    const Eigen::Index nb = static_cast<Eigen::Index>(massless.size());
    Eigen::MatrixXd Ua(C.rows(), na), Ub(C.rows(), nb);
    Eigen::VectorXd ca(na);
    for (Eigen::Index i = 0; i < na; ++i) {
        Ua.col(i) = ces.eigenvectors().col(massive[static_cast<std::size_t>(i)]);
        ca(i) = ces.eigenvalues()(massive[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index i = 0; i < nb; ++i)
        Ub.col(i) = ces.eigenvectors().col(massless[static_cast<std::size_t>(i)]);

    Eigen::MatrixXd Laa = Ua.transpose() * L * Ua;
    if (nb > 0) {
        Eigen::MatrixXd Lab = Ua.transpose() * L * Ub;
        Eigen::MatrixXd Lbb = Ub.transpose() * L * Ub;
        // drop massless directions that carry no inductance at all (pure gauge)
        std::vector<Eigen::Index> act;
        const double lscale = std::max(L.cwiseAbs().maxCoeff(), 1e-300);
        for (Eigen::Index i = 0; i < nb; ++i)
            if (Lbb(i, i) > 1e-13 * lscale || Lab.col(i).cwiseAbs().maxCoeff() > 1e-13 * lscale)
                act.push_back(i);
        if (!act.empty()) {
            Eigen::MatrixXd Lab2(na, act.size()), Lbb2(act.size(), act.size());
            for (std::size_t i = 0; i < act.size(); ++i) {
                Lab2.col(static_cast<Eigen::Index>(i)) = Lab.col(act[i]);
                for (std::size_t j = 0; j < act.size(); ++j) Lbb2(i, j) = Lbb(act[i], act[j]);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> les(Lbb2);
            if (les.eigenvalues().minCoeff() <= 1e-12 * lscale)
                throw DegenerateCapacitanceError(
                    "massless flux direction with inductive coupling cannot be eliminated");
            Laa -= Lab2 * les.eigenvectors() *
                   les.eigenvalues().cwiseInverse().asDiagonal() *
                   les.eigenvectors().transpose() * Lab2.transpose();
        }
    }
    Eigen::MatrixXd Ca = ca.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        ((Laa + Laa.transpose()) * 0.5).eval(), Ca);
    if (es.info() != Eigen::Success) throw SolverError("generalized eigensolve failed");
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()(i);
        out.push_back(lam > 0 ? std::sqrt(lam) : 0.0);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Entries of inv(ltilde - w^2 ctilde) at the port indices, with gauge-fixed
/// indices contributing zero. These four numbers drive both the scalar
/// response and the two-current matching system.
struct PortResponse {
    double in_in = 0.0, in_out = 0.0, out_in = 0.0, out_out = 0.0;
    /// Flux drop per unit port current under equal in/out currents.
    [[nodiscard]] double scalar() const { return in_in + out_out - in_out - out_in; }
};

namespace detail {

struct ReducedSolve {
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    std::vector<Eigen::Index> keep;
    Eigen::Index red_in = -1, red_out = -1;  // -1 when gauge-fixed / grounded
};

inline ReducedSolve factor_reduced(const NodeMatrices& nm, double omega, double cond_limit = 1e14) {
    ReducedSolve rs;
    rs.keep = nm.reduced_indices();
    const Eigen::MatrixXd L = detail::submatrix(nm.ltilde, rs.keep);
    const Eigen::MatrixXd C = detail::submatrix(nm.ctilde, rs.keep);
    Eigen::MatrixXd M = L - omega * omega * C;
    rs.lu.compute(M);
    // the natural entry scale before cancellations, so near-singularity is
    // detected even for one-node systems
    const double scale = L.cwiseAbs().maxCoeff() + omega * omega * C.cwiseAbs().maxCoeff();
    double minp = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        minp = std::min(minp, std::abs(rs.lu.matrixLU()(i, i)));
    if (!(minp > scale / cond_limit)) {
        double nearest = 0.0;  // reported by the caller when it knows the spectrum
        throw NearPoleError(omega, nearest);
    }
    for (std::size_t i = 0; i < rs.keep.size(); ++i) {
        if (rs.keep[i] == nm.idx_in) rs.red_in = static_cast<Eigen::Index>(i);
        if (rs.keep[i] == nm.idx_out) rs.red_out = static_cast<Eigen::Index>(i);
    }
    return rs;
}

}  // namespace detail

inline PortResponse port_response(const NodeMatrices& nm, double omega) {
    auto rs = detail::factor_reduced(nm, omega);
    PortResponse r;
    const Eigen::Index n = static_cast<Eigen::Index>(rs.keep.size());
    if (rs.red_in >= 0) {
        Eigen::VectorXd x = rs.lu.solve(Eigen::VectorXd::Unit(n, rs.red_in));
        r.in_in = x(rs.red_in);
        if (rs.red_out >= 0) r.out_in = x(rs.red_out);
    }
    if (rs.red_out >= 0) {
        Eigen::VectorXd x = rs.lu.solve(Eigen::VectorXd::Unit(n, rs.red_out));
        r.out_out = x(rs.red_out);
        if (rs.red_in >= 0) r.in_out = x(rs.red_in);
    }
    return r;
}

/// D(omega): flux drop across the circuit per unit line current under equal
/// port currents; units of inductance. Even in omega by construction.
inline double response(const NodeMatrices& nm, double omega) {
    return port_response(nm, omega).scalar();
}

}  // namespace tlmodes
