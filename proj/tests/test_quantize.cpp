#include <catch2/catch_amalgamated.hpp>

#include "tlmodes/oracle.hpp"
#include "tlmodes/quantize.hpp"

using namespace tlmodes;

namespace {

using JunctionTerms = std::vector<std::pair<double, double>>;

NormalMode synthetic_mode(double omega, double c_sigma, std::vector<double> du) {
    NormalMode m;
    m.omega = omega;
    m.c_sigma = c_sigma;
    m.l_sigma = 1.0 / (c_sigma * omega * omega);
    m.delta_u = std::move(du);
    return m;
}

}  // namespace

TEST_CASE("kerr trivia", "[quantize]") {
    auto m = synthetic_mode(two_pi * 7e9, 4e-12, {});
    CHECK(kerr_self(m, JunctionTerms{}) == 0.0);
    CHECK(kerr_cross(0.0, -1e3) == 0.0);
    CHECK(kerr_cross(-2.0, -2.0) == Catch::Approx(-4.0));
    CHECK_THROWS_AS(kerr_cross(1.0, -1.0), SolverError);
}

TEST_CASE("kerr scaling in drop and frequency", "[quantize][property]") {
    const double ej = planck * 60e9;
    auto base = synthetic_mode(two_pi * 5e9, 4e-12, {0.1});
    const double k0 = kerr_self(base, JunctionTerms{{ej, 0.1}});
    CHECK(k0 < 0.0);
    // fourth power of the drop
    CHECK(kerr_self(base, JunctionTerms{{ej, 0.2}}) == Catch::Approx(16.0 * k0).epsilon(1e-12));
    // inverse square of the frequency
    auto twice = synthetic_mode(two_pi * 10e9, 4e-12, {0.1});
    CHECK(kerr_self(twice, JunctionTerms{{ej, 0.1}}) == Catch::Approx(0.25 * k0).epsilon(1e-12));
    // additive over junctions
    CHECK(kerr_self(base, JunctionTerms{{ej, 0.1}, {ej, 0.1}}) == Catch::Approx(2.0 * k0).epsilon(1e-12));
}

TEST_CASE("weak single junction matches the quartic ladder", "[quantize][oracle]") {
    // pick a drop so |K| / omega ~ 3e-6, well inside the perturbative window
    const double omega = two_pi * 6e9;
    const double c_sigma = 4e-12;
    const double ej = planck * 60e9;
    const double du = 0.3;
    auto mode = synthetic_mode(omega, c_sigma, {du});
    const double k = kerr_self(mode, JunctionTerms{{ej, du}});
    REQUIRE(std::abs(k) / omega < 1e-4);
    auto ladder = oracle::quartic_fock_diagonalize(omega, ej, du, c_sigma, 50);
    const double k_ref = (ladder[2] - 2.0 * ladder[1] + ladder[0]) / hbar;
    CHECK(k == Catch::Approx(k_ref).epsilon(0.05));
    // quartic softening lowers every level
    for (int n = 1; n <= 5; ++n)
        CHECK(ladder[static_cast<std::size_t>(n)] < hbar * omega * n);
}

TEST_CASE("cross-Kerr equals the two-mode quartic expansion", "[quantize][oracle]") {
    // expanding (du1 phi1 + du3 phi3)^4 and collecting n1 n3 terms gives
    //   K13 = -16 pi^4 E_J lam1^2 lam3^2 / (hbar Phi0^4),
    // lam_m = sqrt(hbar / 2 C w_m) du_m
    const double w1 = two_pi * 2.4e9, w3 = two_pi * 7.4e9;
    const double c_sigma = 3.7e-12;
    const double ej = planck * 60e9;
    const double du1 = 0.21, du3 = 0.52;
    auto m1 = synthetic_mode(w1, c_sigma, {du1});
    auto m3 = synthetic_mode(w3, c_sigma, {du3});
    const double k11 = kerr_self(m1, JunctionTerms{{ej, du1}});
    const double k33 = kerr_self(m3, JunctionTerms{{ej, du3}});
    const double lam1 = std::sqrt(hbar / (2.0 * c_sigma * w1)) * du1;
    const double lam3 = std::sqrt(hbar / (2.0 * c_sigma * w3)) * du3;
    const double k13_direct =
        -16.0 * std::pow(pi, 4) * ej * lam1 * lam1 * lam3 * lam3 / (hbar * std::pow(flux_quantum, 4));
    CHECK(kerr_cross(k11, k33) == Catch::Approx(k13_direct).epsilon(1e-6));
}

TEST_CASE("kerr matrix and number-operator shift", "[quantize]") {
    const double ej = planck * 60e9;
    CircuitNetlist net = parse_netlist(
        "ground g\nport_in a\nport_out b\nJJ j a b ej=60e9 cj=3e-15\nC c a g 1e-15\n");
    auto nm = build_node_matrices(linearize(net), build_incidence_matrix(net));
    std::vector<NormalMode> modes{synthetic_mode(two_pi * 2.4e9, 4e-12, {0.2}),
                                  synthetic_mode(two_pi * 7.4e9, 4e-12, {0.5})};
    auto km = kerr_matrix(modes, nm);
    CHECK(km.k(0, 0) == Catch::Approx(kerr_self(modes[0], JunctionTerms{{ej, 0.2}})));
    CHECK(km.k(0, 1) == km.k(1, 0));
    CHECK(km.k(0, 1) == Catch::Approx(kerr_cross(km.k(0, 0), km.k(1, 1))).epsilon(1e-12));
    CHECK(kerr_lamb_shift(km, 0) == Catch::Approx(km.k(0, 0) + 0.5 * km.k(0, 1)).epsilon(1e-12));
    // validity ratio flags large photon numbers
    CHECK(kerr_validity_ratio(km.k(1, 1), modes[1].omega, 1.0) <
          kerr_validity_ratio(km.k(1, 1), modes[1].omega, 100.0));
}
