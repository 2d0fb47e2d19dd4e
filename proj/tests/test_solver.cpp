#include <catch2/catch_amalgamated.hpp>

#include "momentbound/oracles.hpp"
#include "momentbound/parser.hpp"
#include "momentbound/solve.hpp"

using namespace momentbound;

namespace {

SdeModel cubic_model() {
    auto b = parse_polynomial("1 - 2*x^3", {"x"});
    auto a = parse_polynomial("2*x^2", {"x"});
    return SdeModel(1, {b}, std::nullopt, {{{a}}});
}

SdeModel gbm_model(long lambda) {
    auto b = parse_polynomial("1 - " + std::to_string(lambda) + "*x", {"x"});
    auto a = parse_polynomial("2*x^2", {"x"});
    return SdeModel(1, {b}, std::nullopt, {{{a}}});
}

SdeModel circle_model(const Rat& radius) {
    std::vector<std::string> v{"x1", "x2"};
    std::vector<Polynomial> b{parse_polynomial("-1/2*x1", v), parse_polynomial("-1/2*x2", v)};
    std::vector<std::vector<Polynomial>> sigma{{parse_polynomial("-x2", v)},
                                               {parse_polynomial("x1", v)}};
    Polynomial g = parse_polynomial("x1^2 + x2^2", v) - Polynomial::constant(2, radius * radius);
    return SdeModel(2, b, sigma, std::nullopt, {g}, /*compact=*/true);
}

// y0 = 1 plus a 2x2 moment matrix [[y0, y1], [y1, y2]]
ConicProblem tiny_moment_problem(bool pin_y2) {
    ConicProblem cp;
    cp.num_vars = 3;
    cp.objective[1] = 1;
    ConicProblem::Row norm;
    norm.coeffs[0] = 1;
    norm.rhs = 1;
    norm.label = "norm";
    cp.equalities.push_back(norm);
    if (pin_y2) {
        ConicProblem::Row r;
        r.coeffs[2] = 1;
        r.rhs = 1;
        r.label = "pin";
        cp.equalities.push_back(r);
    }
    ConicProblem::PsdBlock blk;
    blk.side = 2;
    blk.id = "moment:0";
    blk.entries[{0, 0}] = {{0, Rat(1)}};
    blk.entries[{0, 1}] = {{1, Rat(1)}};
    blk.entries[{1, 1}] = {{2, Rat(1)}};
    cp.psd_blocks.push_back(blk);
    return cp;
}

}  // namespace

TEST_CASE("scalar conic sanity cases") {
    // min y0 subject to y0 = 1
    ConicProblem cp;
    cp.num_vars = 1;
    cp.objective[0] = 1;
    ConicProblem::Row r;
    r.coeffs[0] = 1;
    r.rhs = 1;
    cp.equalities.push_back(r);
    auto out = solve(cp, Sense::Minimize);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK_THAT(out.value, Catch::Matchers::WithinAbs(1.0, 1e-9));

    // max y1 with y2 free: y1 = t, y2 = t^2 is feasible for every t
    auto unb = solve(tiny_moment_problem(false), Sense::Maximize);
    CHECK(unb.status == SolveStatus::Unbounded);
    CHECK(std::isinf(unb.value));

    // pinning y2 = 1 forces y1^2 <= y2, so max y1 = 1
    auto pinned = solve(tiny_moment_problem(true), Sense::Maximize);
    REQUIRE(pinned.status == SolveStatus::Optimal);
    CHECK_THAT(pinned.value, Catch::Matchers::WithinAbs(1.0, 1e-6));
}

TEST_CASE("cubic family reproduces the published degree table") {
    auto model = cubic_model();
    auto f = parse_polynomial("x", {"x"});

    auto low = lower_and_upper(assemble_outer(model, f, 4));
    CHECK(low.lower.status == SolveStatus::Unbounded);
    CHECK(low.upper.status == SolveStatus::Unbounded);
    CHECK(std::isinf(low.rho()));
    CHECK(std::isinf(low.eta()));

    auto d5 = lower_and_upper(assemble_outer(model, f, 5));
    REQUIRE(d5.lower.status == SolveStatus::Optimal);
    REQUIRE(d5.upper.status == SolveStatus::Optimal);
    CHECK_THAT(d5.rho(), Catch::Matchers::WithinAbs(0.4133, 5e-4));
    CHECK_THAT(d5.eta(), Catch::Matchers::WithinAbs(0.8283, 5e-4));

    auto d13 = lower_and_upper(assemble_outer(model, f, 13));
    REQUIRE(d13.lower.status == SolveStatus::Optimal);
    REQUIRE(d13.upper.status == SolveStatus::Optimal);
    CHECK_THAT(d13.rho(), Catch::Matchers::WithinAbs(0.6377, 2e-3));
    CHECK_THAT(d13.eta(), Catch::Matchers::WithinAbs(0.6428, 2e-3));
    CHECK(d13.rho() <= d13.eta() + 2e-8);
}

TEST_CASE("constant objectives collapse to the constant") {
    auto model = cubic_model();
    auto c3 = Polynomial::constant(1, Rat(3));
    auto out = lower_and_upper(assemble_outer(model, c3, 5));
    REQUIRE(out.lower.status == SolveStatus::Optimal);
    REQUIRE(out.upper.status == SolveStatus::Optimal);
    CHECK_THAT(out.rho(), Catch::Matchers::WithinAbs(3.0, 1e-7));
    CHECK_THAT(out.eta(), Catch::Matchers::WithinAbs(3.0, 1e-7));
}

TEST_CASE("circle support pins the averages at d = 2") {
    auto model = circle_model(Rat(1));
    auto f = parse_polynomial("x2^2 + 1", {"x1", "x2"});
    auto out = lower_and_upper(assemble_outer(model, f, 2));
    REQUIRE(out.lower.status == SolveStatus::Optimal);
    REQUIRE(out.upper.status == SolveStatus::Optimal);
    CHECK_THAT(out.rho(), Catch::Matchers::WithinAbs(1.5, 1e-6));
    CHECK_THAT(out.eta(), Catch::Matchers::WithinAbs(1.5, 1e-6));

    auto fxy = parse_polynomial("x1*x2", {"x1", "x2"});
    auto out2 = lower_and_upper(assemble_outer(model, fxy, 2));
    CHECK_THAT(out2.rho(), Catch::Matchers::WithinAbs(0.0, 1e-6));
    CHECK_THAT(out2.eta(), Catch::Matchers::WithinAbs(0.0, 1e-6));
}

TEST_CASE("inverse Gamma mean is pinned at degree 4") {
    auto model = gbm_model(4);
    auto out = lower_and_upper(assemble_outer(model, parse_polynomial("x", {"x"}), 4));
    REQUIRE(out.lower.status == SolveStatus::Optimal);
    REQUIRE(out.upper.status == SolveStatus::Optimal);
    CHECK_THAT(out.rho(), Catch::Matchers::WithinAbs(0.25, 1e-6));
    CHECK_THAT(out.eta(), Catch::Matchers::WithinAbs(0.25, 1e-6));
}

TEST_CASE("monotone nesting of the relaxations") {
    auto model = cubic_model();
    auto f = parse_polynomial("x", {"x"});
    double prev_rho = -1e30, prev_eta = 1e30;
    for (int d : {5, 7, 9, 11}) {
        auto out = lower_and_upper(assemble_outer(model, f, d));
        REQUIRE(out.lower.status == SolveStatus::Optimal);
        CHECK(out.rho() >= prev_rho - 1e-6);
        CHECK(out.eta() <= prev_eta + 1e-6);
        prev_rho = out.rho();
        prev_eta = out.eta();
    }
}

TEST_CASE("objective shift and negation dualities") {
    auto model = cubic_model();
    auto f = parse_polynomial("x", {"x"});
    auto base = lower_and_upper(assemble_outer(model, f, 7));

    auto shifted = lower_and_upper(
        assemble_outer(model, f + Polynomial::constant(1, Rat(17, 10)), 7));
    CHECK_THAT(shifted.rho(), Catch::Matchers::WithinAbs(base.rho() + 1.7, 1e-7));
    CHECK_THAT(shifted.eta(), Catch::Matchers::WithinAbs(base.eta() + 1.7, 1e-7));

    auto negated = lower_and_upper(assemble_outer(model, Rat(-1) * f, 7));
    CHECK_THAT(negated.rho(), Catch::Matchers::WithinAbs(-base.eta(), 1e-7));
    CHECK_THAT(negated.eta(), Catch::Matchers::WithinAbs(-base.rho(), 1e-7));
}

TEST_CASE("rescale leaves the optimum invariant") {
    auto model = cubic_model();
    auto f = parse_polynomial("x", {"x"});
    auto prob = assemble_outer(model, f, 7);
    auto base = lower_and_upper(prob);
    auto scaled = rescale(prob, {Rat(7, 10)});  // near the measure scale
    auto out = lower_and_upper(scaled.problem);
    CHECK_THAT(out.rho(), Catch::Matchers::WithinAbs(base.rho(), 1e-6));
    CHECK_THAT(out.eta(), Catch::Matchers::WithinAbs(base.eta(), 1e-6));
}

TEST_CASE("canonical export round trips byte for byte") {
    auto model = cubic_model();
    auto f = parse_polynomial("x", {"x"});
    auto prob = ConicProblem::from_moment_problem(assemble_outer(model, f, 5));

    // the degree-5 family problem: norm + 2 stationarity rows, one 3x3 block
    CHECK(prob.equalities.size() == 3);
    REQUIRE(prob.psd_blocks.size() == 1);
    CHECK(prob.psd_blocks[0].side == 3);

    std::string text = export_canonical(prob);
    ConicProblem parsed = parse_canonical(text);
    CHECK(export_canonical(parsed) == text);
    CHECK(fingerprint(prob) == fingerprint(parsed));

    for (int d = 5; d <= 13; ++d) {
        auto p = ConicProblem::from_moment_problem(assemble_outer(model, f, d));
        std::string t1 = export_canonical(p);
        CHECK(export_canonical(parse_canonical(t1)) == t1);
    }

    ConicProblem empty;
    std::string etext = export_canonical(empty);
    CHECK(export_canonical(parse_canonical(etext)) == etext);
}

TEST_CASE("infeasible equalities are reported") {
    ConicProblem cp;
    cp.num_vars = 1;
    cp.objective[0] = 1;
    ConicProblem::Row a, b;
    a.coeffs[0] = 1;
    a.rhs = 1;
    b.coeffs[0] = 1;
    b.rhs = 2;
    cp.equalities = {a, b};
    auto out = solve(cp, Sense::Minimize);
    CHECK(out.status == SolveStatus::Infeasible);
}

TEST_CASE("bound pair carries a stable fingerprint") {
    auto model = cubic_model();
    auto prob = assemble_outer(model, parse_polynomial("x", {"x"}), 5);
    auto b1 = lower_and_upper(prob);
    auto b2 = lower_and_upper(prob);
    CHECK(b1.fingerprint == b2.fingerprint);
    CHECK(b1.fingerprint.size() == 16);
    CHECK(b1.degree == 5);
}
