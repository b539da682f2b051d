#include <catch2/catch_amalgamated.hpp>

#include "tlmodes/oracle.hpp"

using namespace tlmodes;

namespace {

const TransmissionLine kLine{4.16e-7, 1.66e-10, 0.025, 0.011};

LinearizedCircuit bare_insert() {
    // an electrically invisible insertion: 1 fH series inductor
    return linearize(parse_netlist("ground g\nport_in a\nport_out b\nL ls a b 1e-15\n"));
}

}  // namespace

TEST_CASE("discretized bare line converges to pi v / l", "[oracle]") {
    auto lin = bare_insert();
    auto sol = oracle::discretize_and_solve(kLine, lin, 10000, 4);
    const double w1 = pi * kLine.velocity() / kLine.length;
    REQUIRE(sol.omegas.size() >= 3);
    CHECK(sol.omegas[0] == Catch::Approx(w1).epsilon(1e-4));
    CHECK(sol.omegas[1] == Catch::Approx(2.0 * w1).epsilon(1e-4));
    CHECK_THROWS_AS(oracle::discretize_and_solve(kLine, lin, 50, 3), SolverError);
}

TEST_CASE("discretization error falls as the square of the cell size", "[oracle][convergence]") {
    auto lin = linearize(parse_netlist("ground g\nport_in a\nport_out b\nL ls a b 2e-10\n"));
    auto nm = build_node_matrices(lin, build_incidence_matrix(lin.base));
    const double w1 = first_mode_frequency(kLine, &nm);
    const double e1 = std::abs(oracle::discretize_and_solve(kLine, lin, 600, 2).omegas[0] - w1);
    const double e3 = std::abs(oracle::discretize_and_solve(kLine, lin, 1800, 2).omegas[0] - w1);
    CHECK(e1 / e3 == Catch::Approx(9.0).epsilon(0.2));
}

TEST_CASE("eigenvector exhibits the response flux jump at the splice", "[oracle]") {
    auto lin = linearize(parse_netlist("ground g\nport_in a\nport_out b\nL ls a b 2e-10\n"));
    auto nm = build_node_matrices(lin, build_incidence_matrix(lin.base));
    auto sol = oracle::discretize_and_solve(kLine, lin, 8000, 3);
    for (std::size_t m = 0; m < 2; ++m) {
        const double w = sol.omegas[m];
        const auto v = sol.vectors.col(static_cast<Eigen::Index>(m));
        const double jump = v(sol.splice_right) - v(sol.splice_left);
        // midpoint currents of the last two left cells, extrapolated to x_c
        const double i_half =
            -(v(sol.splice_left) - v(sol.splice_left - 1)) / (kLine.l0 * sol.dx_left);
        const double i_three_half =
            -(v(sol.splice_left - 1) - v(sol.splice_left - 2)) / (kLine.l0 * sol.dx_left);
        const double i_line = 1.5 * i_half - 0.5 * i_three_half;
        CHECK(jump == Catch::Approx(-response(nm, w) * i_line).epsilon(1e-3));
    }
}

TEST_CASE("quartic ladder reduces to the harmonic one without junction energy", "[oracle]") {
    const double w = two_pi * 6e9;
    auto ladder = oracle::quartic_fock_diagonalize(w, 0.0, 0.4, 4e-12, 40);
    for (int n = 0; n < 8; ++n)
        CHECK(ladder[static_cast<std::size_t>(n)] == Catch::Approx(hbar * w * n).margin(hbar * w * 1e-12));
    CHECK_THROWS_AS(oracle::quartic_fock_diagonalize(w, 0.0, 0.4, 4e-12, 10), SolverError);
}
