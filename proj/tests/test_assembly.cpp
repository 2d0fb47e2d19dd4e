#include <catch2/catch_amalgamated.hpp>

#include "momentbound/assembly.hpp"
#include "momentbound/oracles.hpp"
#include "momentbound/parser.hpp"

#include <Eigen/Dense>

using namespace momentbound;

namespace {

Exponents e1(int a) { return Exponents{a}; }
Exponents e2(int a, int b) { return Exponents{a, b}; }

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

SdeModel circle_model(const Rat& radius, bool compact = true) {
    std::vector<std::string> v{"x1", "x2"};
    std::vector<Polynomial> b{parse_polynomial("-1/2*x1", v), parse_polynomial("-1/2*x2", v)};
    std::vector<std::vector<Polynomial>> sigma{{parse_polynomial("-x2", v)},
                                               {parse_polynomial("x1", v)}};
    Polynomial g = parse_polynomial("x1^2 + x2^2", v) - Polynomial::constant(2, radius * radius);
    return SdeModel(2, b, sigma, std::nullopt, {g}, compact);
}

Rat row_apply(const LinearRow& row, const std::function<Rat(long)>& y) {
    Rat acc(0);
    for (const auto& [idx, c] : row.coeffs) acc += c * y(idx);
    return acc;
}

}  // namespace

TEST_CASE("monomial basis sizes and order") {
    MonomialBasis b22(2, 2);
    REQUIRE(b22.size() == 6);
    std::vector<Exponents> expected{e2(0, 0), e2(1, 0), e2(0, 1), e2(2, 0), e2(1, 1), e2(0, 2)};
    for (size_t i = 0; i < expected.size(); ++i) CHECK(b22.tuple(static_cast<int>(i)) == expected[i]);
    CHECK(b22.index(e2(0, 0)) == 0);

    CHECK(MonomialBasis(1, 0).size() == 1);
    CHECK(MonomialBasis(3, 4).size() == binomial(7, 4).convert_to<size_t>());
    CHECK_THROWS_AS(MonomialBasis(8, 12), std::invalid_argument);  // r(d) cap
}

TEST_CASE("stationarity rows reproduce the worked recurrences") {
    auto model = cubic_model();
    auto rows = stationarity_rows(model, 6);
    REQUIRE(rows.size() == 3);  // r(6-3) - 1
    // k=1: y0 - 2 y3
    CHECK(rows[0].coeffs.at(0) == 1);
    CHECK(rows[0].coeffs.at(3) == -2);
    // k=2: 2 y1 + 2 y2 - 4 y4
    CHECK(rows[1].coeffs.at(1) == 2);
    CHECK(rows[1].coeffs.at(2) == 2);
    CHECK(rows[1].coeffs.at(4) == -4);
    // k=3: 3 y2 + 6 y3 - 6 y5
    CHECK(rows[2].coeffs.at(2) == 3);
    CHECK(rows[2].coeffs.at(3) == 6);
    CHECK(rows[2].coeffs.at(5) == -6);

    auto gbm = gbm_model(4);
    auto grows = stationarity_rows(gbm, 4);
    REQUIRE(grows.size() == 2);
    // forces y1 = y0/4 and y2 = y1/3
    CHECK(grows[0].coeffs.at(0) == 1);
    CHECK(grows[0].coeffs.at(1) == -4);
    CHECK(grows[1].coeffs.at(1) == 2);
    CHECK(grows[1].coeffs.at(2) == -6);

    CHECK(stationarity_rows(model, model.generator_degree()).empty());
    CHECK_THROWS_AS(stationarity_rows(model, 2), std::invalid_argument);
}

TEST_CASE("row counts match the cardinality formulas") {
    auto model = cubic_model();
    for (int d = 3; d <= 13; ++d) {
        auto rows = stationarity_rows(model, d);
        CHECK(rows.size() == basis_size(1, d - 3) - 1);
    }
    MonomialBasis b24(2, 4);
    auto g = parse_polynomial("x1^2 + x2^2 - 1", {"x1", "x2"});
    CHECK(variety_rows(g, b24).size() == basis_size(2, 2));
    CHECK(moment_matrix_map(b24).side == static_cast<int>(basis_size(2, 2)));
}

TEST_CASE("variety rows") {
    MonomialBasis basis(2, 2);
    Rat R(3);
    auto g = parse_polynomial("x1^2 + x2^2", {"x1", "x2"}) - Polynomial::constant(2, R * R);
    auto rows = variety_rows(g, basis);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].coeffs.at(basis.index(e2(2, 0))) == 1);
    CHECK(rows[0].coeffs.at(basis.index(e2(0, 2))) == 1);
    CHECK(rows[0].coeffs.at(0) == -R * R);

    CHECK_THROWS_AS(variety_rows(Polynomial(2), basis), std::invalid_argument);

    // Dirac-at-u moments: g = x - u gives y_{k+1} = u y_k
    MonomialBasis b13(1, 3);
    Rat u(5, 7);
    auto gu = parse_polynomial("x", {"x"}) - Polynomial::constant(1, u);
    auto dirac = variety_rows(gu, b13);
    REQUIRE(dirac.size() == 3);
    std::vector<Rat> y(4);
    for (int k = 0; k <= 3; ++k) y[static_cast<size_t>(k)] = rat_pow(u, static_cast<unsigned>(k));
    for (const auto& row : dirac)
        CHECK(row_apply(row, [&](long i) { return y[static_cast<size_t>(i)]; }) == 0);
}

TEST_CASE("moment matrix maps") {
    MonomialBasis b12(1, 2);
    auto m2 = moment_matrix_map(b12);
    REQUIRE(m2.side == 2);
    CHECK(m2.entry(0, 0) == LinearForm{{0, Rat(1)}});
    CHECK(m2.entry(0, 1) == LinearForm{{1, Rat(1)}});
    CHECK(m2.entry(1, 1) == LinearForm{{2, Rat(1)}});

    MonomialBasis b16(1, 6);
    auto m6 = moment_matrix_map(b16);
    REQUIRE(m6.side == 4);
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) CHECK(m6.entry(i, j) == LinearForm{{i + j, Rat(1)}});

    CHECK(moment_matrix_map(MonomialBasis(1, 0)).side == 1);
}

TEST_CASE("localizing maps") {
    MonomialBasis b22(2, 2);
    auto loc = localizing_map(parse_polynomial("x2", {"x1", "x2"}), b22);
    REQUIRE(loc.side == 1);
    CHECK(loc.entry(0, 0) == LinearForm{{b22.index(e2(0, 1)), Rat(1)}});

    MonomialBasis b24(2, 4);
    Rat u(2);
    auto q = parse_polynomial("x1", {"x1", "x2"}) - Polynomial::constant(2, u);
    auto loc2 = localizing_map(q, b24);
    REQUIRE(loc2.side == 3);
    LinearForm corner = loc2.entry(0, 0);
    REQUIRE(corner.size() == 2);
    // theta_q at (0,0): y_{(1,0)} - u y_{(0,0)}
    CHECK(corner[0] == std::pair<long, Rat>{b24.index(e2(0, 0)), -u});
    CHECK(corner[1] == std::pair<long, Rat>{b24.index(e2(1, 0)), Rat(1)});

    auto one = Polynomial::constant(2, Rat(1));
    auto locone = localizing_map(one, b24);
    auto mm = moment_matrix_map(b24);
    REQUIRE(locone.side == mm.side);
    for (const auto& [rc, form] : mm.entries) CHECK(locone.entry(rc.first, rc.second) == form);
}

TEST_CASE("assemble_outer structure for the cubic family") {
    auto model = cubic_model();
    auto f = parse_polynomial("x", {"x"});
    auto prob = assemble_outer(model, f, 4);
    CHECK(prob.num_vars() == 5);
    REQUIRE(prob.equalities.size() == 2);  // norm + k=1
    CHECK(prob.equalities[0].label == "norm");
    CHECK(prob.equalities[0].rhs == 1);
    CHECK(prob.psd_maps.size() == 1);
    CHECK(prob.psd_maps[0].side == 3);
    CHECK(prob.objective.at(1) == 1);

    CHECK_THROWS_AS(assemble_outer(model, f, 2), std::invalid_argument);
    auto c3 = Polynomial::constant(1, Rat(3));
    auto constant_prob = assemble_outer(model, c3, 4);
    CHECK(constant_prob.objective.at(0) == 3);
}

TEST_CASE("circle moments satisfy every assembled constraint exactly") {
    for (const Rat& R : {Rat(1, 2), Rat(1), Rat(3)}) {
        auto model = circle_model(R);
        for (int d : {2, 4, 6, 8}) {
            auto f = parse_polynomial("x2^2 + 1", {"x1", "x2"});
            auto prob = assemble_outer(model, f, d);
            const MonomialBasis& basis = prob.blocks[0].basis;
            auto y = [&](long idx) {
                const Exponents& e = basis.tuple(static_cast<int>(idx));
                return oracle_circle_moment(R, e[0], e[1]);
            };
            for (const auto& row : prob.equalities) {
                INFO("R=" << rat_to_string(R) << " d=" << d << " row=" << row.label);
                CHECK(row_apply(row, y) == row.rhs);
            }
            // moment matrix of the oracle vector is PSD to 1e-10
            const auto& mm = prob.psd_maps[0];
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(mm.side, mm.side);
            for (const auto& [rc, form] : mm.entries) {
                double v = 0;
                for (const auto& [idx, c] : form) v += to_double(c * y(idx));
                M(rc.first, rc.second) = v;
                M(rc.second, rc.first) = v;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        }
    }
}

TEST_CASE("inverse Gamma moments satisfy the stationarity rows exactly") {
    for (long lambda : {4L, 6L}) {
        auto model = gbm_model(lambda);
        for (int d = 2; d <= static_cast<int>(lambda) - 2; ++d) {
            auto rows = stationarity_rows(model, d);
            for (const auto& row : rows) {
                INFO("lambda=" << lambda << " d=" << d << " row=" << row.label);
                CHECK(row_apply(row, [&](long k) {
                          return oracle_inverse_gamma_moment(lambda, k);
                      }) == 0);
            }
        }
    }
}

TEST_CASE("piecewise assembly") {
    std::vector<std::string> v{"x1", "x2"};
    std::vector<Polynomial> b{parse_polynomial("x2", v),
                              parse_polynomial("-x2 - x1 - 1/2*x1^3", v)};
    std::vector<std::vector<Polynomial>> a{
        {Polynomial(2), Polynomial(2)},
        {Polynomial(2), Polynomial::constant(2, Rat(2))}};
    SdeModel duffing(2, b, std::nullopt, a);

    Piece above;  // f = 1 on {x1 - u >= 0}
    above.f = Polynomial::constant(2, Rat(1));
    above.inequalities = {parse_polynomial("x1 - 2", v)};
    auto prob = assemble_piecewise(duffing, {above}, 6);

    REQUIRE(prob.blocks.size() == 2);
    CHECK(prob.num_vars() == 2 * static_cast<long>(basis_size(2, 6)));
    // one coupled normalisation row
    CHECK(prob.equalities[0].coeffs.size() == 2);
    CHECK(prob.equalities[0].rhs == 1);
    // stationarity rows couple both blocks
    size_t coupled = 0;
    for (const auto& row : prob.equalities)
        if (row.label.rfind("stat:", 0) == 0) {
            ++coupled;
            bool first = false, second = false;
            for (const auto& [idx, c] : row.coeffs) {
                if (idx < prob.blocks[1].offset) first = true;
                else second = true;
            }
            CHECK((first && second));
        }
    CHECK(coupled == basis_size(2, 3) - 1);
    // block 0: moment map only; block 1: moment map + localizing map
    REQUIRE(prob.psd_maps.size() == 3);
    CHECK(prob.psd_maps[0].block == 0);
    CHECK(prob.psd_maps[1].block == 1);
    CHECK(prob.psd_maps[2].block == 1);
    CHECK(prob.psd_maps[2].side == static_cast<int>(basis_size(2, 2)));
    // objective lives on block 1
    for (const auto& [idx, c] : prob.objective) CHECK(idx >= prob.blocks[1].offset);

    Piece slice;  // f = x2 on {x1 - u = 0, x2 >= 0}
    slice.f = parse_polynomial("x2", v);
    slice.equalities = {parse_polynomial("x1 - 2", v)};
    slice.inequalities = {parse_polynomial("x2", v)};
    auto prob2 = assemble_piecewise(duffing, {slice}, 6);
    size_t piece_eqs = 0;
    for (const auto& row : prob2.equalities)
        if (row.label.rfind("piece:", 0) == 0) ++piece_eqs;
    CHECK(piece_eqs == basis_size(2, 5));

    CHECK_THROWS_AS(assemble_piecewise(duffing, {above}, 2), std::invalid_argument);
}

TEST_CASE("rescale substitutes y_alpha = z^alpha y~_alpha") {
    auto model = cubic_model();
    auto prob = assemble_outer(model, parse_polynomial("x", {"x"}), 4);

    auto same = rescale(prob, {Rat(1)});
    for (size_t r = 0; r < prob.equalities.size(); ++r)
        CHECK(same.problem.equalities[r].coeffs == prob.equalities[r].coeffs);

    auto scaled = rescale(prob, {Rat(2)});
    // the k=1 stationarity row y0 - 2 y3 becomes y0 - 16 y3
    const auto& row = scaled.problem.equalities[1];
    CHECK(row.coeffs.at(0) == 1);
    CHECK(row.coeffs.at(3) == -16);
    // moment matrix maps are invariant under the congruence
    for (const auto& [rc, form] : prob.psd_maps[0].entries)
        CHECK(scaled.problem.psd_maps[0].entry(rc.first, rc.second) == form);

    // round trip restores the problem exactly
    auto back = rescale(scaled.problem, {Rat(1, 2)});
    for (size_t r = 0; r < prob.equalities.size(); ++r) {
        CHECK(back.problem.equalities[r].coeffs == prob.equalities[r].coeffs);
        CHECK(back.problem.equalities[r].rhs == prob.equalities[r].rhs);
    }
    CHECK(back.problem.objective == prob.objective);

    CHECK_THROWS_AS(rescale(prob, {Rat(0)}), std::invalid_argument);
    CHECK_THROWS_AS(rescale(prob, {Rat(-1)}), std::invalid_argument);
}

TEST_CASE("rescaled localizing maps scale their shift coefficients") {
    std::vector<std::string> v{"x1", "x2"};
    std::vector<Polynomial> b{parse_polynomial("x2", v),
                              parse_polynomial("-x2 - x1 - 1/2*x1^3", v)};
    std::vector<std::vector<Polynomial>> a{
        {Polynomial(2), Polynomial(2)},
        {Polynomial(2), Polynomial::constant(2, Rat(2))}};
    SdeModel duffing(2, b, std::nullopt, a);
    Piece above;
    above.f = Polynomial::constant(2, Rat(1));
    above.inequalities = {parse_polynomial("x1 - 2", v)};
    auto prob = assemble_piecewise(duffing, {above}, 6);

    std::vector<Rat> z{Rat(3), Rat(1, 2)};
    auto scaled = rescale(prob, z);
    // localizing entry (0,0) was y_{(1,0)} - 2 y_0; shift coefficients pick up
    // z^delta: 3 y~_{(1,0)} - 2 y~_0
    const auto& loc = scaled.problem.psd_maps[2];
    const Block& blk = prob.blocks[1];
    LinearForm corner = loc.entry(0, 0);
    REQUIRE(corner.size() == 2);
    CHECK(corner[0] == std::pair<long, Rat>{blk.offset + blk.basis.index(e2(0, 0)), Rat(-2)});
    CHECK(corner[1] == std::pair<long, Rat>{blk.offset + blk.basis.index(e2(1, 0)), Rat(3)});
}
