// Command-line driver: computes normal modes, Kerr coefficients, flux-qubit
// spectra and the dressed (effective) Kerr constant of a transmission-line
// resonator with an embedded circuit, from a scenario file. Emits CSV.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tlmodes/tlmodes.hpp"

namespace {

using namespace tlmodes;

struct Options {
    std::string scenario_path;
    std::string out_path;
    int grid = 0;
    int cutoff = 0;
    int threads = 1;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw ParseError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& out() { return file_.is_open() ? file_ : std::cout; }
    void comment(const std::string& s) { out() << "# " << s << "\n"; }
    void row(const std::vector<std::string>& cells) {
        auto& o = out();
        for (std::size_t i = 0; i < cells.size(); ++i) o << (i ? "," : "") << cells[i];
        o << "\n";
    }

private:
    std::ofstream file_;
};

std::string resolve_out(const Options& opt, const Scenario& sc) {
    return !opt.out_path.empty() ? opt.out_path : sc.out_path;
}

int cmd_modes(const Options& opt) {
    const Scenario sc = Scenario::load(opt.scenario_path);
    const SystemModel sys = build_system(sc, opt.grid, opt.cutoff);
    CsvWriter csv(resolve_out(opt, sc));
    csv.comment("length_m=" + fmt(sys.tl.length) + " xc_m=" + fmt(sys.tl.x_c));
    std::vector<std::string> header{"index", "frequency_hz", "c_sigma_f", "l_sigma_h"};
    std::vector<std::string> junction_ids;
    if (sys.has_circuit)
        for (auto row : sys.nm.junction_rows) header.push_back("delta_u_" + sys.nm.branch_order[static_cast<std::size_t>(row)]);
    csv.row(header);
    for (std::size_t m = 0; m < sys.modes.size(); ++m) {
        const auto& mode = sys.modes[m];
        std::vector<std::string> cells{std::to_string(m + 1), fmt(mode.omega / two_pi),
                                       fmt(mode.c_sigma), fmt(mode.l_sigma)};
        for (double du : mode.delta_u) cells.push_back(fmt(du));
        csv.row(cells);
    }
    return 0;
}

int cmd_kerr(const Options& opt) {
    const Scenario sc = Scenario::load(opt.scenario_path);
    const SystemModel sys = build_system(sc, opt.grid, opt.cutoff);
    CsvWriter csv(resolve_out(opt, sc));
    csv.row({"m", "n", "kerr_rad_s", "kerr_over_omega_m"});
    const Eigen::Index nmodes = static_cast<Eigen::Index>(sys.modes.size());
    for (Eigen::Index m = 0; m < nmodes; ++m)
        for (Eigen::Index n = m; n < nmodes; ++n) {
            const double k = sys.has_circuit ? sys.kerr.k(m, n) : 0.0;
            csv.row({std::to_string(m + 1), std::to_string(n + 1), fmt(k),
                     fmt(k / sys.modes[static_cast<std::size_t>(m)].omega)});
        }
    return 0;
}

int cmd_qubit(const Options& opt) {
    const Scenario sc = Scenario::load(opt.scenario_path);
    const SystemModel sys = build_system(sc, opt.grid, opt.cutoff);
    if (sys.qubits.empty()) throw SolverError("scenario netlist declares no flux loops");
    CsvWriter csv(resolve_out(opt, sc));
    csv.row({"loop", "cs_minus_f", "cs_plus_f", "cs_scale", "f10_hz", "s01", "p01", "delta_u", "g_rad_s"});
    for (const auto& q : sys.qubits)
        csv.row({q.decl.id, fmt(q.spec.cs_minus), fmt(q.spec.cs_plus), fmt(q.cs_scale),
                 fmt(q.sol.omega10 / two_pi), fmt(q.sol.s01), fmt(q.sol.p01), fmt(q.delta_u),
                 fmt(q.g)});
    return 0;
}

int cmd_coupled(const Options& opt) {
    const Scenario sc = Scenario::load(opt.scenario_path);
    const SystemModel sys = build_system(sc, opt.grid, opt.cutoff);
    const CoupledSpec cs = sys.coupled_spec();
    const EffectiveKerr ek = effective_kerr(cs);
    CsvWriter csv(resolve_out(opt, sc));
    csv.comment("bare omega3_rad_s=" + fmt(cs.omega3) + " k33_rad_s=" + fmt(cs.k33));
    csv.comment("diagnostic k_tilde_next_rad_s=" + fmt(ek.k_tilde_next));
    csv.row({"omega3_tilde_rad_s", "k33_tilde_rad_s", "k33_tilde_over_omega3", "g3_1_rad_s",
             "g3_2_rad_s", "g12_rad_s", "omega10_1_rad_s", "omega10_2_rad_s"});
    csv.row({fmt(ek.omega_tilde), fmt(ek.k_tilde), fmt(ek.k_tilde / cs.omega3), fmt(cs.g3_1),
             fmt(cs.g3_2), fmt(cs.g12), fmt(cs.omega10_1), fmt(cs.omega10_2)});
    return 0;
}

int cmd_sweep(const Options& opt) {
    const Scenario sc = Scenario::load(opt.scenario_path);
    if (sc.sweep_kind.empty()) throw ParseError("scenario has no sweep declaration");
    if (sc.sweep_steps < 2 || !(sc.sweep_max > sc.sweep_min))
        throw ParseError("sweep range is empty");
    const SystemModel sys = build_system(sc, opt.grid, opt.cutoff);
    std::vector<double> xs;
    for (int i = 0; i < sc.sweep_steps; ++i)
        xs.push_back(sc.sweep_min + (sc.sweep_max - sc.sweep_min) * i / double(sc.sweep_steps - 1));
    CsvWriter csv(resolve_out(opt, sc));
    const double w3 = sys.probe_mode().omega;
    if (sc.sweep_kind == "eta") {
        auto res = sweep_eta(sys.coupled_spec(), xs);
        csv.row({"eta", "k33_tilde_over_omega3"});
        for (auto& [x, ek] : res) csv.row({fmt(x), fmt(ek.k_tilde / w3)});
    } else if (sc.sweep_kind == "flux") {
        auto res = sweep_flux(sys, xs, opt.threads);
        csv.row({"phi_ext_phi0", "k33_tilde_over_omega3"});
        for (auto& [x, ek] : res) csv.row({fmt(x), fmt(ek.k_tilde / w3)});
    } else {
        auto res = sweep_shunt(sys, xs, opt.threads);
        csv.row({"cs_over_cs0", "f10_hz"});
        for (auto& [x, w10] : res) csv.row({fmt(x), fmt(w10 / two_pi)});
    }
    return 0;
}

int cmd_oracle_check(const Options& opt) {
    const Scenario sc = Scenario::load(opt.scenario_path);
    const SystemModel sys = build_system(sc, opt.grid, opt.cutoff);
    const auto rows = oracle_check(sys);
    CsvWriter csv(resolve_out(opt, sc));
    csv.row({"check", "solver", "reference", "relative_deviation", "tolerance", "status"});
    bool all_pass = true;
    for (const auto& r : rows) {
        csv.row({r.name, fmt(r.solver), fmt(r.reference), fmt(r.deviation), fmt(r.tolerance),
                 r.pass ? "pass" : "FAIL"});
        all_pass = all_pass && r.pass;
    }
    if (!all_pass) throw SolverError("oracle check failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Normal modes, Kerr nonlinearities and dressed spectra of a "
                 "transmission-line resonator with an embedded circuit"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--scenario", opt.scenario_path, "scenario file")->required();
    app.add_option("--out", opt.out_path, "output CSV path (default: scenario out= or stdout)");
    app.add_option("--grid", opt.grid, "qubit phase-grid points per axis");
    app.add_option("--cutoff", opt.cutoff, "Fock cutoff for the coupled Hamiltonian");
    app.add_option("--threads", opt.threads, "sweep worker threads");

    auto* s_modes = app.add_subcommand("modes", "normal modes of the loaded resonator");
    auto* s_kerr = app.add_subcommand("kerr", "self- and cross-Kerr coefficients");
    auto* s_qubit = app.add_subcommand("qubit", "flux-qubit spectra and matrix elements");
    auto* s_coupled = app.add_subcommand("coupled", "dressed spectrum and effective Kerr");
    auto* s_sweep = app.add_subcommand("sweep", "parameter sweep declared in the scenario");
    auto* s_oracle = app.add_subcommand("oracle-check", "compare against the brute-force solvers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints usage / error text
        return 2;
    }

    try {
        if (s_modes->parsed()) return cmd_modes(opt);
        if (s_kerr->parsed()) return cmd_kerr(opt);
        if (s_qubit->parsed()) return cmd_qubit(opt);
        if (s_coupled->parsed()) return cmd_coupled(opt);
        if (s_sweep->parsed()) return cmd_sweep(opt);
        if (s_oracle->parsed()) return cmd_oracle_check(opt);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
