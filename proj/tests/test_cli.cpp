#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tlmodes/constants.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const fs::path dir = fs::temp_directory_path() / "tlmodes_cli_test";
    fs::create_directories(dir);
    static int counter = 0;
    const fs::path out = dir / ("out" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        std::string(TLMODES_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream buf;
    buf << in.rdbuf();
    return {WEXITSTATUS(rc), buf.str()};
}

std::string asset(const std::string& name) { return std::string(TLMODES_ASSET_DIR) + "/" + name; }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line) {
            if (c == ',') cells.push_back(cur), cur.clear();
            else cur.push_back(c);
        }
        cells.push_back(cur);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("bare-line modes land on the harmonic grid", "[cli]") {
    auto r = run_cli("--scenario " + asset("bare.scn") + " modes");
    REQUIRE(r.exit_code == 0);
    auto rows = parse_csv(r.out);
    REQUIRE(rows.size() >= 4);
    CHECK(rows[0][0] == "index");
    CHECK(rows[0][1] == "frequency_hz");
    const double v = 1.0 / std::sqrt(4.16e-7 * 1.66e-10);
    const double f1 = v / (2.0 * 0.025);
    for (std::size_t n = 1; n < rows.size(); ++n)
        CHECK(std::stod(rows[n][1]) == Catch::Approx(double(n) * f1).epsilon(1e-4));
}

TEST_CASE("kerr of a junction-free netlist is zero", "[cli]") {
    const auto dir = fs::temp_directory_path() / "tlmodes_cli_test";
    fs::create_directories(dir);
    std::ofstream net(dir / "lc.net");
    net << "ground g\nport_in a\nport_out b\nL l a b 1e-11\nC c a b 1e-15\n";
    net.close();
    std::ofstream scn(dir / "lc.scn");
    scn << "netlist=lc.net\nl0=4.16e-7\nc0=1.66e-10\nlength=0.025\nxc_frac=0.5\n"
           "fmin=1e9\nfmax=9e9\nmode_index=1\n";
    scn.close();
    auto r = run_cli("--scenario " + (dir / "lc.scn").string() + " kerr");
    REQUIRE(r.exit_code == 0);
    for (const auto& row : parse_csv(r.out)) {
        if (row[0] == "m") continue;
        CHECK(std::stod(row[2]) == 0.0);
        CHECK(std::stod(row[3]) <= 0.0);  // diagonal entries never positive
    }
}

TEST_CASE("error exit codes", "[cli]") {
    SECTION("unknown subcommand prints usage, exit 2") {
        auto r = run_cli("--scenario " + asset("bare.scn") + " frobnicate");
        CHECK(r.exit_code == 2);
        CHECK(r.out.find("Usage") != std::string::npos);
    }
    SECTION("malformed netlist: parse diagnostics, exit 2") {
        const auto dir = fs::temp_directory_path() / "tlmodes_cli_test";
        fs::create_directories(dir);
        std::ofstream net(dir / "bad.net");
        net << "ground g\nport_in a\nport_out a\nC b1 a zz 1e-15\n";
        net.close();
        std::ofstream scn(dir / "bad.scn");
        scn << "netlist=bad.net\nl0=4.16e-7\nc0=1.66e-10\nlength=0.025\n";
        scn.close();
        auto r = run_cli("--scenario " + (dir / "bad.scn").string() + " modes");
        CHECK(r.exit_code == 2);
        CHECK(r.out.find("line 4") != std::string::npos);
    }
    SECTION("empty sweep range, exit 2") {
        const auto dir = fs::temp_directory_path() / "tlmodes_cli_test";
        fs::create_directories(dir);
        std::ofstream scn(dir / "nosweep.scn");
        scn << "l0=4.16e-7\nc0=1.66e-10\nlength=0.025\nsweep=eta\nsweep_min=0\nsweep_max=0\n"
               "sweep_steps=0\n";
        scn.close();
        auto r = run_cli("--scenario " + (dir / "nosweep.scn").string() + " sweep");
        CHECK(r.exit_code == 2);
    }
    SECTION("solver failure, exit 3") {
        const auto dir = fs::temp_directory_path() / "tlmodes_cli_test";
        fs::create_directories(dir);
        std::ofstream scn(dir / "noroots.scn");
        scn << "l0=4.16e-7\nc0=1.66e-10\nlength=0.025\nfmin=1e7\nfmax=2e7\nmode_index=1\n";
        scn.close();
        auto r = run_cli("--scenario " + (dir / "noroots.scn").string() + " modes");
        CHECK(r.exit_code == 3);
    }
}

TEST_CASE("identical invocations produce byte-identical output", "[cli][determinism]") {
    const std::string args = "--scenario " + asset("bare.scn") + " modes";
    auto a = run_cli(args);
    auto b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("oracle-check on the bare line passes", "[cli][oracle]") {
    auto r = run_cli("--scenario " + asset("bare.scn") + " oracle-check");
    REQUIRE(r.exit_code == 0);
    auto rows = parse_csv(r.out);
    REQUIRE(rows.size() >= 2);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].back() == "pass");
        CHECK(std::stod(rows[i][3]) < 1e-4);
    }
}

TEST_CASE("device scenario: coupled spectrum summary", "[cli][slow]") {
    auto r = run_cli("--scenario " + asset("fig5.scn") + " coupled");
    REQUIRE(r.exit_code == 0);
    auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].size() == 8);
    CHECK(rows[0][0] == "omega3_tilde_rad_s");
    const double w10_1 = std::stod(rows[1][6]);
    CHECK(w10_1 == Catch::Approx(tlmodes::two_pi * 6.39e9).epsilon(1e-4));
}
