#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tlmodes/effective.hpp"
#include "tlmodes/fluxqubit.hpp"
#include "tlmodes/netlist.hpp"
#include "tlmodes/oracle.hpp"
#include "tlmodes/quantize.hpp"
#include "tlmodes/resonator.hpp"

namespace tlmodes {

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

/// Line-oriented key=value scenario description (same tokenizer family as the
/// netlist grammar). Keys:
///   netlist=<path>            inner circuit; omit for a bare line
///   l0=<H/m> c0=<F/m>         line parameters (required)
///   length=<m> | target_f1=<Hz>   fixed length or fundamental calibration
///   xc=<m> | xc_frac=<0..1>   insertion position (default 0.5 fraction)
///   fmin=<Hz> fmax=<Hz>       mode search window
///   grid_points=<int> root_tol=<rel> mode_index=<1-based>
///   qubit_targets=<Hz,Hz,...> per-loop splitting calibration targets
///   qubit_grid=<n> fock_cutoff=<n>
///   sweep=eta|flux|shunt sweep_min= sweep_max= sweep_steps=
///   out=<path>                default output path (CLI --out overrides)
struct Scenario {
    std::optional<std::string> netlist_path;
    double l0 = 0.0, c0 = 0.0;
    std::optional<double> length;
    std::optional<double> target_f1;
    std::optional<double> xc;
    double xc_frac = 0.5;
    std::optional<double> fmin, fmax;
    int grid_points = 0;
    double root_tol = 1e-12;
    int mode_index = 3;  // 1-based
    std::vector<double> qubit_targets_hz;
    int qubit_grid = 64;
    int fock_cutoff = 12;
    std::string sweep_kind;  // "", "eta", "flux", "shunt"
    double sweep_min = 0.0, sweep_max = 0.0;
    int sweep_steps = 0;
    std::string out_path;

    static Scenario load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open scenario file '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        Scenario sc = parse(buf.str());
        if (sc.netlist_path && !std::filesystem::path(*sc.netlist_path).is_absolute()) {
            sc.netlist_path =
                (std::filesystem::path(path).parent_path() / *sc.netlist_path).string();
        }
        return sc;
    }

    static Scenario parse(const std::string& text) {
        Scenario sc;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto toks = detail::tokenize(line);
            if (toks.empty()) continue;
            if (toks.size() != 1)
                throw SyntaxError(lineno, "scenario statements are single key=value tokens");
            const auto eq = toks[0].find('=');
            if (eq == std::string::npos) throw SyntaxError(lineno, "expected key=value");
            const std::string key = toks[0].substr(0, eq);
            const std::string val = toks[0].substr(eq + 1);
            auto num = [&] { return detail::parse_number(val, lineno); };
            if (key == "netlist") sc.netlist_path = val;
            else if (key == "l0") sc.l0 = num();
            else if (key == "c0") sc.c0 = num();
            else if (key == "length") sc.length = num();
            else if (key == "target_f1") sc.target_f1 = num();
            else if (key == "xc") sc.xc = num();
            else if (key == "xc_frac") sc.xc_frac = num();
            else if (key == "fmin") sc.fmin = num();
            else if (key == "fmax") sc.fmax = num();
            else if (key == "grid_points") sc.grid_points = static_cast<int>(num());
            else if (key == "root_tol") sc.root_tol = num();
            else if (key == "mode_index") sc.mode_index = static_cast<int>(num());
            else if (key == "qubit_grid") sc.qubit_grid = static_cast<int>(num());
            else if (key == "fock_cutoff") sc.fock_cutoff = static_cast<int>(num());
            else if (key == "sweep") sc.sweep_kind = val;
            else if (key == "sweep_min") sc.sweep_min = num();
            else if (key == "sweep_max") sc.sweep_max = num();
            else if (key == "sweep_steps") sc.sweep_steps = static_cast<int>(num());
            else if (key == "out") sc.out_path = val;
            else if (key == "qubit_targets") {
                for (const auto& v : detail::split_csv(val))
                    sc.qubit_targets_hz.push_back(detail::parse_number(v, lineno));
            } else {
                throw SyntaxError(lineno, "unknown scenario key '" + key + "'");
            }
        }
        if (!(sc.l0 > 0) || !(sc.c0 > 0)) throw ParseError("scenario needs positive l0 and c0");
        if (!sc.length && !sc.target_f1) throw ParseError("scenario needs length or target_f1");
        if (!sc.sweep_kind.empty() && sc.sweep_kind != "eta" && sc.sweep_kind != "flux" &&
            sc.sweep_kind != "shunt")
            throw ParseError("sweep must be eta, flux or shunt");
        return sc;
    }
};

// ---------------------------------------------------------------------------
// Assembled system
// ---------------------------------------------------------------------------

struct QubitBlock {
    FluxLoopDecl decl;
    FluxQubitSpec spec;      // after shunt calibration, if any
    QubitSolution sol;
    double delta_u = 0.0;    // probe-mode drop across the loop span
    double g = 0.0;          // rad/s
    double cs_scale = 1.0;   // calibrated / declared shunt ratio
};

struct SystemModel {
    CircuitNetlist net;
    LinearizedCircuit lin;
    NodeMatrices nm;
    bool has_circuit = false;
    TransmissionLine tl{};
    std::vector<NormalMode> modes;
    std::size_t probe = 0;  // 0-based index of the probed mode
    KerrMatrix kerr;
    std::vector<QubitBlock> qubits;
    double g12 = 0.0;  // rad/s, signed
    PhaseGrid grid;
    int fock_cutoff = 12;

    [[nodiscard]] const NormalMode& probe_mode() const { return modes.at(probe); }
    [[nodiscard]] double k33() const {
        return has_circuit ? kerr.k(static_cast<Eigen::Index>(probe), static_cast<Eigen::Index>(probe)) : 0.0;
    }

    [[nodiscard]] CoupledSpec coupled_spec() const {
        CoupledSpec cs;
        cs.omega3 = probe_mode().omega;
        cs.k33 = k33();
        cs.fock_cutoff = fock_cutoff;
        // an absent qubit is parked far above the mode with zero coupling
        cs.omega10_1 = qubits.size() > 0 ? qubits[0].sol.omega10 : 100.0 * cs.omega3;
        cs.omega10_2 = qubits.size() > 1 ? qubits[1].sol.omega10 : 100.0 * cs.omega3;
        cs.g3_1 = qubits.size() > 0 ? qubits[0].g : 0.0;
        cs.g3_2 = qubits.size() > 1 ? qubits[1].g : 0.0;
        cs.g12 = g12;
        return cs;
    }
};

namespace detail {

/// Chain endpoints (start, end) of a flux loop's junction chain.
inline std::pair<std::string, std::string> loop_span(const CircuitNetlist& net,
                                                     const FluxLoopDecl& d) {
    const Branch& b0 = net.branch(d.branch_ids[0]);
    const Branch& b1 = net.branch(d.branch_ids[1]);
    const Branch& b2 = net.branch(d.branch_ids[2]);
    auto shared = [](const Branch& a, const Branch& b) {
        for (const auto& n : {a.node_plus, a.node_minus})
            if (n == b.node_plus || n == b.node_minus) return n;
        throw SolverError("flux loop branches do not chain");
    };
    const std::string j01 = shared(b0, b1);
    const std::string j12 = shared(b1, b2);
    const std::string start = b0.node_plus == j01 ? b0.node_minus : b0.node_plus;
    const std::string end = b2.node_plus == j12 ? b2.node_minus : b2.node_plus;
    return {start, end};
}

inline double node_flux_at(const NormalMode& mode, const NodeMatrices& nm, const std::string& node) {
    for (std::size_t i = 0; i < nm.node_order.size(); ++i)
        if (nm.node_order[i] == node) return mode.node_flux(static_cast<Eigen::Index>(i));
    return 0.0;  // ground
}

}  // namespace detail

/// Runs the full pipeline described by a scenario: parse, linearize, calibrate
/// the length, locate and normalize the modes, solve and calibrate the
/// qubits, and evaluate the couplings.
inline SystemModel build_system(const Scenario& sc, int grid_override = 0, int cutoff_override = 0) {
    SystemModel sys;
    sys.grid.n = grid_override > 0 ? grid_override : sc.qubit_grid;
    sys.fock_cutoff = cutoff_override > 0 ? cutoff_override : sc.fock_cutoff;

    const NodeMatrices* nm = nullptr;
    if (sc.netlist_path) {
        std::ifstream in(*sc.netlist_path);
        if (!in) throw ParseError("cannot open netlist '" + *sc.netlist_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        sys.net = parse_netlist(buf.str());
        sys.lin = linearize(sys.net);
        sys.nm = build_node_matrices(sys.lin, build_incidence_matrix(sys.net));
        sys.has_circuit = true;
        nm = &sys.nm;
    }

    if (sc.length) {
        const double xc = sc.xc ? *sc.xc : sc.xc_frac * *sc.length;
        sys.tl = TransmissionLine{sc.l0, sc.c0, *sc.length, xc};
    } else {
        if (sc.xc) throw ParseError("xc must be given as xc_frac when calibrating the length");
        sys.tl = calibrate_length(sc.l0, sc.c0, sc.xc_frac, two_pi * *sc.target_f1, nm);
    }

    const double f1_est = sc.target_f1 ? *sc.target_f1
                                       : sys.tl.velocity() / (2.0 * sys.tl.length);
    ModeSearchConfig cfg;
    cfg.omega_min = two_pi * (sc.fmin ? *sc.fmin : 0.2 * f1_est);
    cfg.omega_max = two_pi * (sc.fmax ? *sc.fmax : 3.8 * f1_est);
    cfg.grid_points = sc.grid_points;
    cfg.root_tol = sc.root_tol;
    sys.modes = find_modes(sys.tl, nm, cfg);

    if (sc.mode_index < 1 || static_cast<std::size_t>(sc.mode_index) > sys.modes.size())
        throw SolverError("probe mode index " + std::to_string(sc.mode_index) + " out of range: found " +
                          std::to_string(sys.modes.size()) + " modes");
    sys.probe = static_cast<std::size_t>(sc.mode_index - 1);
    if (sys.has_circuit) sys.kerr = kerr_matrix(sys.modes, sys.nm);

    // qubits
    if (sys.has_circuit && !sys.net.flux_loops.empty()) {
        const QuantizedMode qprobe = quantize_mode(sys.probe_mode());
        for (std::size_t qi = 0; qi < sys.net.flux_loops.size(); ++qi) {
            QubitBlock blk;
            blk.decl = sys.net.flux_loops[qi];
            blk.spec = FluxQubitSpec::from_loop(sys.net, blk.decl);
            if (qi < sc.qubit_targets_hz.size()) {
                const double cs = calibrate_shunt(blk.spec, sys.grid, two_pi * sc.qubit_targets_hz[qi]);
                blk.cs_scale = cs / blk.spec.cs_minus;
                blk.spec.cs_minus *= blk.cs_scale;
                blk.spec.cs_plus *= blk.cs_scale;
            }
            blk.sol = solve(blk.spec, sys.grid);
            const auto [start, end] = detail::loop_span(sys.net, blk.decl);
            blk.delta_u = detail::node_flux_at(sys.probe_mode(), sys.nm, start) -
                          detail::node_flux_at(sys.probe_mode(), sys.nm, end);
            blk.g = coupling_g(qprobe, blk.spec, blk.sol, blk.delta_u);
            sys.qubits.push_back(std::move(blk));
        }
        if (sys.qubits.size() >= 2) {
            const auto& l1 = sys.qubits[0].decl;
            const auto& l2 = sys.qubits[1].decl;
            const double lc = l1.lc > 0 ? l1.lc : l2.lc;
            const int sign = l1.coupling_sign * l2.coupling_sign;
            sys.g12 = qubit_qubit_coupling(sys.qubits[0].spec, sys.qubits[0].sol, sys.qubits[1].spec,
                                           sys.qubits[1].sol, lc, sign) /
                      hbar;
        }
    }
    return sys;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

namespace detail {

template <class F>
auto parallel_map(const std::vector<double>& xs, int threads, F&& f)
    -> std::vector<decltype(f(0.0))> {
    using R = decltype(f(0.0));
    std::vector<R> out(xs.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
        return out;
    }
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < threads; ++t)
        futs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < xs.size(); i = next.fetch_add(1))
                out[i] = f(xs[i]);
        }));
    for (auto& fu : futs) fu.get();
    return out;
}

}  // namespace detail

/// Re-solves the qubits at each external flux (calibrated shunts kept fixed),
/// rebuilds g and g12, and extracts the effective Kerr.
inline std::vector<std::pair<double, EffectiveKerr>> sweep_flux(const SystemModel& sys,
                                                                const std::vector<double>& phi_values,
                                                                int threads = 1) {
    if (sys.qubits.empty()) throw SolverError("flux sweep needs at least one flux loop");
    const QuantizedMode qprobe = quantize_mode(sys.probe_mode());
    auto results = detail::parallel_map(phi_values, threads, [&](double phi) {
        CoupledSpec cs = sys.coupled_spec();
        std::vector<QubitSolution> sols;
        for (std::size_t qi = 0; qi < sys.qubits.size(); ++qi) {
            FluxQubitSpec spec = sys.qubits[qi].spec;
            spec.phi_ext = phi;
            sols.push_back(solve(spec, sys.grid));
            const double g = coupling_g(qprobe, spec, sols.back(), sys.qubits[qi].delta_u);
            if (qi == 0) cs.omega10_1 = sols.back().omega10, cs.g3_1 = g;
            if (qi == 1) cs.omega10_2 = sols.back().omega10, cs.g3_2 = g;
        }
        if (sys.qubits.size() >= 2) {
            const auto& l1 = sys.qubits[0].decl;
            const auto& l2 = sys.qubits[1].decl;
            FluxQubitSpec s1 = sys.qubits[0].spec, s2 = sys.qubits[1].spec;
            s1.phi_ext = s2.phi_ext = phi;
            cs.g12 = qubit_qubit_coupling(s1, sols[0], s2, sols[1], l1.lc > 0 ? l1.lc : l2.lc,
                                          l1.coupling_sign * l2.coupling_sign) /
                     hbar;
        }
        return effective_kerr(cs);
    });
    std::vector<std::pair<double, EffectiveKerr>> out;
    for (std::size_t i = 0; i < phi_values.size(); ++i) out.emplace_back(phi_values[i], results[i]);
    return out;
}

/// Splitting as a function of the common shunt scale, for the calibration curve.
inline std::vector<std::pair<double, double>> sweep_shunt(const SystemModel& sys,
                                                          const std::vector<double>& scales,
                                                          int threads = 1) {
    if (sys.qubits.empty()) throw SolverError("shunt sweep needs at least one flux loop");
    auto results = detail::parallel_map(scales, threads, [&](double scale) {
        FluxQubitSpec spec = sys.qubits[0].spec;
        spec.cs_minus *= scale;
        spec.cs_plus *= scale;
        return solve(spec, sys.grid).omega10;
    });
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < scales.size(); ++i) out.emplace_back(scales[i], results[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Solver-vs-oracle report
// ---------------------------------------------------------------------------

struct OracleCheckRow {
    std::string name;
    double solver = 0.0;
    double reference = 0.0;
    double deviation = 0.0;  // relative
    double tolerance = 0.0;
    bool pass = false;
};

/// Compares matching-system eigenfrequencies against the Richardson-
/// extrapolated finite-difference eigensolve, and the insertion flux jump
/// against the response function.
inline std::vector<OracleCheckRow> oracle_check(const SystemModel& sys, int cells = 6000) {
    std::vector<OracleCheckRow> rows;
    const int n_check = static_cast<int>(std::min<std::size_t>(3, sys.modes.size()));
    const auto coarse = oracle::discretize_and_solve(sys.tl, sys.lin, cells / 2, n_check + 2);
    const auto fine = oracle::discretize_and_solve(sys.tl, sys.lin, cells, n_check + 2);
    for (int m = 0; m < n_check; ++m) {
        OracleCheckRow row;
        row.name = "mode_" + std::to_string(m + 1) + "_frequency";
        row.solver = sys.modes[static_cast<std::size_t>(m)].omega;
        // second-order extrapolation in the cell size
        row.reference = (4.0 * fine.omegas.at(static_cast<std::size_t>(m)) -
                         coarse.omegas.at(static_cast<std::size_t>(m))) / 3.0;
        row.deviation = std::abs(row.solver - row.reference) / row.reference;
        row.tolerance = 1e-4;
        row.pass = row.deviation < row.tolerance;
        rows.push_back(row);
    }
    if (sys.has_circuit) {
        for (int m = 0; m < n_check; ++m) {
            const double w = fine.omegas.at(static_cast<std::size_t>(m));
            const auto v = fine.vectors.col(m);
            const double jump = v(fine.splice_right) - v(fine.splice_left);
            const double i_line =
                -(v(fine.splice_left) - v(fine.splice_left - 1)) / (sys.tl.l0 * fine.dx_left);
            OracleCheckRow row;
            row.name = "mode_" + std::to_string(m + 1) + "_flux_jump";
            row.solver = -response(sys.nm, w) * i_line;
            row.reference = jump;
            const double scale = std::max(std::abs(jump), 1e-12 * v.cwiseAbs().maxCoeff());
            row.deviation = std::abs(row.solver - row.reference) / scale;
            row.tolerance = 1e-2;
            row.pass = row.deviation < row.tolerance;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace tlmodes
