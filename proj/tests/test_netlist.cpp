#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tlmodes/netlist.hpp"

using namespace tlmodes;

namespace {

const std::string fig2_text = R"(
# three nodes, two to ground through the tree, one closure branch
node p1 p2
ground p3
port_in p1
port_out p2
L b1 p1 p3 1e-9
L b2 p2 p3 2e-9
C b3 p2 p1 5e-15
)";

}  // namespace

TEST_CASE("minimal netlist parses", "[netlist]") {
    auto net = parse_netlist("ground g\nport_in a\nport_out a\nC b1 a g 1e-15\n");
    CHECK(net.nodes.size() == 2);
    CHECK(net.branches.size() == 1);
    CHECK(net.ground == "g");
    CHECK(net.port_in == "a");
    CHECK(net.port_out == "a");
    CHECK_FALSE(net.floating());
}

TEST_CASE("three-node loop netlist", "[netlist]") {
    auto net = parse_netlist(fig2_text);
    REQUIRE(net.nodes.size() == 3);
    REQUIRE(net.branches.size() == 3);
    CHECK(net.ground == "p3");
    CHECK(net.branches[0].id == "b1");
    CHECK(net.branches[2].node_plus == "p2");
}

TEST_CASE("netlist rejection cases", "[netlist]") {
    CHECK_THROWS_AS(parse_netlist("ground g\nport_in a\nport_out a\nC b1 a x9 1e-15\n"),
                    UnknownNodeError);
    CHECK_THROWS_AS(parse_netlist("ground g\nport_in a\nport_out a\nC b1 a g 1e-15\nC b1 a g 2e-15\n"),
                    DuplicateIdError);
    CHECK_THROWS_AS(parse_netlist("node b\nport_in a\nport_out a\nC b1 a b 1e-15\n"), MissingDeclError);
    CHECK_THROWS_AS(parse_netlist("ground g\nport_in a\nC b1 a g 1e-15\n"), MissingDeclError);
    CHECK_THROWS_AS(parse_netlist("ground g\nport_in a\nport_out a\nC b1 a g bogus\n"), SyntaxError);
    CHECK_THROWS_AS(parse_netlist("ground g\nport_in a\nport_out a\nnode z\nC b1 a g 1e-15\n"),
                    DisconnectedGraphError);
    CHECK_THROWS_AS(parse_netlist("ground g\nport_in a\nport_out a\nC b1 a g -1e-15\n"), SyntaxError);
    // line numbers are reported
    try {
        parse_netlist("ground g\nport_in a\nport_out a\nC b1 a g oops\n");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 4);
    }
}

TEST_CASE("spanning tree choices", "[netlist]") {
    SECTION("loop: two tree branches, one closure") {
        auto tree = build_spanning_tree(parse_netlist(fig2_text));
        CHECK(tree.tree_branches == std::vector<std::string>{"b1", "b2"});
        CHECK(tree.closure_branches == std::vector<std::string>{"b3"});
    }
    SECTION("single branch") {
        auto tree = build_spanning_tree(
            parse_netlist("ground g\nport_in a\nport_out a\nL b1 a g 1e-9\n"));
        CHECK(tree.tree_branches == std::vector<std::string>{"b1"});
        CHECK(tree.closure_branches.empty());
    }
    SECTION("ring of four") {
        auto net = parse_netlist(
            "node n1 n2 n3\nground g\nport_in n1\nport_out n3\n"
            "L b1 g n1 1e-9\nL b2 n1 n2 1e-9\nL b3 n2 n3 1e-9\nL b4 n3 g 1e-9\n");
        auto tree = build_spanning_tree(net);
        CHECK(tree.tree_branches.size() == 3);
        CHECK(tree.closure_branches.size() == 1);
    }
}

TEST_CASE("incidence matrix entries", "[netlist]") {
    SECTION("single branch to ground") {
        auto k = build_incidence_matrix(
            parse_netlist("ground g\nport_in a\nport_out a\nC b1 a g 1e-15\n"));
        REQUIRE(k.entries.rows() == 1);
        REQUIRE(k.entries.cols() == 1);
        CHECK(k.entries(0, 0) == 1.0);
    }
    SECTION("loop netlist rows") {
        auto k = build_incidence_matrix(parse_netlist(fig2_text));
        REQUIRE(k.col_order == std::vector<std::string>{"p1", "p2"});
        CHECK(k.entries(0, 0) == 1.0);
        CHECK(k.entries(0, 1) == 0.0);
        CHECK(k.entries(1, 0) == 0.0);
        CHECK(k.entries(1, 1) == 1.0);
        CHECK(k.entries(2, 0) == -1.0);
        CHECK(k.entries(2, 1) == 1.0);
        // branches between non-ground nodes have cancelling signs
        CHECK(k.entries.row(2).sum() == 0.0);
    }
}

namespace {

/// Random connected netlist over up to max_nodes nodes plus closure branches.
CircuitNetlist random_netlist(std::mt19937& rng, int max_nodes) {
    std::uniform_int_distribution<int> nn(3, max_nodes);
    const int n = nn(rng);
    std::string text = "ground n0\nport_in n1\nport_out n2\n";
    std::string nodes = "node";
    for (int i = 3; i < n; ++i) nodes += " n" + std::to_string(i);
    if (n > 3) text = nodes + "\n" + text;
    std::uniform_real_distribution<double> val(0.1, 0.9);
    std::uniform_int_distribution<int> coin(0, 1);
    int bid = 0;
    // spanning structure: attach every node to a random earlier one
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> prev(0, i - 1);
        const int j = prev(rng);
        const std::string a = "n" + std::to_string(i), b = "n" + std::to_string(j);
        char num[32];
        std::snprintf(num, sizeof(num), "%.6fe-9", val(rng));
        text += "L b" + std::to_string(bid++) + " " + (coin(rng) ? a : b) + " " +
                (coin(rng) ? b : a) + " " + num + "\n";
    }
    // a few closure branches
    std::uniform_int_distribution<int> extra(0, n);
    const int m = extra(rng);
    for (int e = 0; e < m; ++e) {
        std::uniform_int_distribution<int> pick(0, n - 1);
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        text += "C b" + std::to_string(bid++) + " n" + std::to_string(i) + " n" +
                std::to_string(j) + " 1e-15\n";
    }
    return parse_netlist(text);
}

}  // namespace

TEST_CASE("incidence matrix signs and node-flux reconstruction", "[netlist][property]") {
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 40; ++trial) {
        auto net = random_netlist(rng, 12);
        auto k = build_incidence_matrix(net);
        // each row: +1/-1 pair for internal branches, one entry for ground ones
        for (Eigen::Index r = 0; r < k.entries.rows(); ++r) {
            const auto& b = net.branches[static_cast<std::size_t>(r)];
            std::vector<double> nz;
            for (Eigen::Index c = 0; c < k.entries.cols(); ++c)
                if (k.entries(r, c) != 0.0) nz.push_back(k.entries(r, c));
            if (b.node_plus == net.ground || b.node_minus == net.ground) {
                REQUIRE(nz.size() == 1);
            } else {
                REQUIRE(nz.size() == 2);
                CHECK(nz[0] * nz[1] == -1.0);
            }
        }
        // node fluxes recovered by summing branch fluxes along tree paths
        auto tree = build_spanning_tree(net);
        std::uniform_real_distribution<double> amp(-1.0, 1.0);
        Eigen::VectorXd phi(k.entries.cols());
        for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = amp(rng);
        Eigen::VectorXd delta = k.entries * phi;
        auto branch_row = [&](const std::string& id) {
            for (std::size_t r = 0; r < k.row_order.size(); ++r)
                if (k.row_order[r] == id) return static_cast<Eigen::Index>(r);
            FAIL("missing branch row");
            return Eigen::Index{0};
        };
        for (Eigen::Index c = 0; c < k.entries.cols(); ++c) {
            double sum = 0.0;
            for (const auto& step : tree.path(k.col_order[static_cast<std::size_t>(c)]))
                sum += step.direction * delta(branch_row(step.branch_id));
            CHECK(sum == Catch::Approx(phi(c)).margin(1e-12));
        }
    }
}

TEST_CASE("serialize round trip", "[netlist]") {
    const std::string fig5 = R"(
node n2 n3 n4 n5 t1 t2 t3 t4
ground gnd
port_in n1
port_out n6
JJ j1 n1 n2 ej=3e12 cj=150e-15
JJ j2 n2 t1 ej=60e9 cj=3e-15
JJ j3 t1 t2 ej=30e9 cj=1.5e-15
JJ j4 t2 n3 ej=60e9 cj=3e-15
JJ j5 n2 n3 ej=300e9 cj=15e-15
JJ j6 n3 n4 ej=3e12 cj=150e-15
JJ j7 n4 t3 ej=60e9 cj=3e-15
JJ j8 t3 t4 ej=30e9 cj=1.5e-15
JJ j9 t4 n5 ej=60e9 cj=3e-15
JJ j10 n4 n5 ej=300e9 cj=15e-15
JJ j11 n5 n6 ej=3e12 cj=150e-15
fluxloop q1 branches=j2,j3,j4 ext=0.5 sign=+1 cs_minus=6e-14 cs_plus=6e-14 lc=5.4487e-11
fluxloop q2 branches=j7,j8,j9 ext=0.5 sign=-1 cs_minus=6e-14 cs_plus=6e-14 lc=5.4487e-11
)";
    auto net = parse_netlist(fig5);
    CHECK(net.floating());
    auto net2 = parse_netlist(serialize_netlist(net));
    REQUIRE(net2.nodes == net.nodes);
    REQUIRE(net2.branches.size() == net.branches.size());
    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        CHECK(net2.branches[i].id == net.branches[i].id);
        CHECK(net2.branches[i].node_plus == net.branches[i].node_plus);
        CHECK(net2.branches[i].node_minus == net.branches[i].node_minus);
        if (net.branches[i].is_junction()) {
            CHECK(std::get<Junction>(net2.branches[i].kind).ej_hz ==
                  std::get<Junction>(net.branches[i].kind).ej_hz);
            CHECK(std::get<Junction>(net2.branches[i].kind).cj_farad ==
                  std::get<Junction>(net.branches[i].kind).cj_farad);
        }
    }
    REQUIRE(net2.flux_loops.size() == 2);
    CHECK(net2.flux_loops[1].coupling_sign == -1);
    CHECK(net2.flux_loops[0].branch_ids == net.flux_loops[0].branch_ids);
    // serialization is a fixed point
    CHECK(serialize_netlist(net2) == serialize_netlist(net));
}

TEST_CASE("flux loop validation", "[netlist]") {
    // loop chain must be closed by another branch
    CHECK_THROWS_AS(parse_netlist(
                        "node a b c d\nground g\nport_in a\nport_out d\n"
                        "JJ j1 a b ej=6e10 cj=3e-15\nJJ j2 b c ej=3e10 cj=1.5e-15\n"
                        "JJ j3 c d ej=6e10 cj=3e-15\nC cg a g 1e-15\nC cg2 d g 1e-15\n"
                        "fluxloop q branches=j1,j2,j3 ext=0.5 sign=+1 cs_minus=1e-14 cs_plus=1e-14 lc=0\n"),
                    SyntaxError);
    // non-junction branch in a loop
    CHECK_THROWS_AS(parse_netlist(
                        "node a b c d\nground g\nport_in a\nport_out d\n"
                        "L j1 a b 1e-9\nJJ j2 b c ej=3e10 cj=1.5e-15\n"
                        "JJ j3 c d ej=6e10 cj=3e-15\nJJ j5 a d ej=3e11 cj=1.5e-14\nC cg a g 1e-15\n"
                        "fluxloop q branches=j1,j2,j3 ext=0.5 sign=+1 cs_minus=1e-14 cs_plus=1e-14 lc=0\n"),
                    SyntaxError);
}
