#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

namespace {

const std::string kCli = MB_CLI_PATH;
const std::string kSpecDir = MB_SPEC_DIR;

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    std::string out_file = std::string(std::tmpnam(nullptr)) + ".out";
    std::string cmd = kCli + " " + args + " > " + out_file + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WEXITSTATUS(rc);
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    std::remove(out_file.c_str());
    return result;
}

// second CSV line, split on commas
std::vector<std::string> first_record(const std::string& csv) {
    std::stringstream ss(csv);
    std::string header, line;
    std::getline(ss, header);
    std::getline(ss, line);
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    return cells;
}

std::string strip_timing(std::string text) {
    // timing fields vary run to run; everything else must be byte-stable
    text = std::regex_replace(text, std::regex("\"solve_seconds\": [0-9eE+.\\-]+"),
                              "\"solve_seconds\": 0");
    return text;
}

}  // namespace

TEST_CASE("bound command reproduces the published degree-5 interval") {
    auto res = run_cli("bound " + kSpecDir + "/cubic.spec -d 5");
    REQUIRE(res.exit_code == 0);
    auto cells = first_record(res.output);
    REQUIRE(cells.size() >= 7);
    CHECK(cells[0] == "5");
    CHECK_THAT(std::stod(cells[1]), Catch::Matchers::WithinAbs(0.4133, 5e-4));
    CHECK_THAT(std::stod(cells[2]), Catch::Matchers::WithinAbs(0.8283, 5e-4));
    CHECK(cells[3] == "optimal");
    CHECK(cells[4] == "optimal");
}

TEST_CASE("bound command renders unbounded relaxations") {
    auto res = run_cli("bound " + kSpecDir + "/cubic.spec -d 4");
    REQUIRE(res.exit_code == 0);
    auto cells = first_record(res.output);
    CHECK(cells[1] == "unbounded");
    CHECK(cells[2] == "unbounded");
    CHECK(cells[3] == "unbounded");
}

TEST_CASE("degree below the generator degree is a validation error") {
    auto res = run_cli("bound " + kSpecDir + "/cubic.spec -d 2");
    CHECK(res.exit_code == 2);
}

TEST_CASE("malformed specs exit with the validation code") {
    std::string bad = std::string(std::tmpnam(nullptr)) + ".spec";
    {
        std::ofstream out(bad);
        out << R"({"version": "specfile-v1", "variables": ["x"], "drift": ["-x"],)"
            << R"( "diffusion_matrix": [["2"]], "objective": "x", "degree": 4,)"
            << R"( "unexpected_field": 1})";
    }
    auto res = run_cli("bound " + bad);
    CHECK(res.exit_code == 2);
    std::remove(bad.c_str());

    auto missing = run_cli("bound /nonexistent.spec -d 4");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("circle support collapses the interval through the cli") {
    auto res = run_cli("bound " + kSpecDir + "/circle.spec");
    REQUIRE(res.exit_code == 0);
    auto cells = first_record(res.output);
    CHECK_THAT(std::stod(cells[1]), Catch::Matchers::WithinAbs(1.5, 1e-6));
    CHECK_THAT(std::stod(cells[2]), Catch::Matchers::WithinAbs(1.5, 1e-6));
}

TEST_CASE("degree-range tables are monotone and ordered") {
    auto res = run_cli("bound " + kSpecDir + "/cubic.spec --degree-range 5:8 --workers 2");
    REQUIRE(res.exit_code == 0);
    std::stringstream ss(res.output);
    std::string line;
    std::getline(ss, line);  // header
    double prev_rho = -1e30, prev_eta = 1e30;
    int expected_degree = 5;
    while (std::getline(ss, line)) {
        std::stringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        CHECK(std::stoi(cell) == expected_degree++);
        std::getline(ls, cell, ',');
        double rho = std::stod(cell);
        std::getline(ls, cell, ',');
        double eta = std::stod(cell);
        CHECK(rho >= prev_rho - 1e-6);
        CHECK(eta <= prev_eta + 1e-6);
        prev_rho = rho;
        prev_eta = eta;
    }
    CHECK(expected_degree == 9);
}

TEST_CASE("machine reports are reproducible modulo timing") {
    auto a = run_cli("bound " + kSpecDir + "/gbm.spec --format json");
    auto b = run_cli("bound " + kSpecDir + "/gbm.spec --format json");
    REQUIRE(a.exit_code == 0);
    CHECK(strip_timing(a.output) == strip_timing(b.output));
}

TEST_CASE("export emits a stable canonical document") {
    std::string f1 = std::tmpnam(nullptr), f2 = std::tmpnam(nullptr);
    REQUIRE(run_cli("export " + kSpecDir + "/cubic.spec -d 5 --out " + f1).exit_code == 0);
    REQUIRE(run_cli("export " + kSpecDir + "/cubic.spec -d 5 --out " + f2).exit_code == 0);
    std::ifstream in1(f1), in2(f2);
    std::stringstream s1, s2;
    s1 << in1.rdbuf();
    s2 << in2.rdbuf();
    CHECK(s1.str() == s2.str());
    CHECK(s1.str().find("momsdp-v1") != std::string::npos);
    std::remove(f1.c_str());
    std::remove(f2.c_str());
}

TEST_CASE("oracle subcommand prints exact values") {
    auto res = run_cli("oracle inverse_gamma 4 2");
    REQUIRE(res.exit_code == 0);
    CHECK(first_record(res.output)[0] == "1/12");

    auto circle = run_cli("oracle circle_moment 1 2 0");
    CHECK(first_record(circle.output)[0] == "1/2");

    auto unknown = run_cli("oracle nonsense 1");
    CHECK(unknown.exit_code == 2);
}

TEST_CASE("simulate reports a batched time average") {
    auto res = run_cli("simulate " + kSpecDir + "/ou.spec --horizon 2000 --dt 0.005 --seed 11"
                       " --burn-in 10");
    REQUIRE(res.exit_code == 0);
    auto cells = first_record(res.output);
    double mean = std::stod(cells[0]);
    double se = std::stod(cells[1]);
    CHECK_THAT(mean, Catch::Matchers::WithinAbs(1.0, 3 * se + 2e-2));
    CHECK(std::stol(cells[2]) >= 30);
    CHECK(cells[3] == "false");
}

TEST_CASE("lyapunov single point classifies the stable window") {
    auto res = run_cli("lyapunov --c1 1 --c2 -30 --sigma 3.3 -d 16");
    REQUIRE(res.exit_code == 0);
    auto cells = first_record(res.output);
    REQUIRE(cells.size() >= 8);
    CHECK(std::stod(cells[2]) < 0.0);
    CHECK(std::stod(cells[3]) < 0.0);
    CHECK(cells[6] == "stable");
}

TEST_CASE("posterior emits interval rows and a variance bound") {
    auto res = run_cli("posterior --samples 8 --seed 7 -d 5 --format json");
    REQUIRE(res.exit_code == 0);
    CHECK(res.output.find("\"objective\": \"p1\"") != std::string::npos);
    CHECK(res.output.find("total_variance") != std::string::npos);
}

TEST_CASE("piecewise spec files run through the bound command") {
    auto res = run_cli("bound " + kSpecDir + "/duffing_occupation.spec");
    REQUIRE(res.exit_code == 0);
    auto cells = first_record(res.output);
    // lower side is the trivial origin bound, upper is a genuine probability bound
    CHECK_THAT(std::stod(cells[1]), Catch::Matchers::WithinAbs(0.0, 1e-9));
    double eta = std::stod(cells[2]);
    CHECK(eta > 0.0);
    CHECK(eta < 1.0);
}
