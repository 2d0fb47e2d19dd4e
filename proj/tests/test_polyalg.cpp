#include <catch2/catch_amalgamated.hpp>

#include "momentbound/model.hpp"
#include "momentbound/parser.hpp"
#include "momentbound/rng.hpp"

using namespace momentbound;

namespace {

Exponents e1(int a) { return Exponents{a}; }
Exponents e2(int a, int b) { return Exponents{a, b}; }

// Independent oracle for (x + y)^k expansion coefficients.
Rat binomial_coeff_oracle(unsigned k, unsigned j) { return Rat(binomial(k, j)); }

Polynomial random_poly(CounterRng& rng, int n, int max_deg, int terms) {
    Polynomial p(n);
    for (int t = 0; t < terms; ++t) {
        Exponents e(n, 0);
        for (int i = 0; i < n; ++i)
            e[i] = static_cast<int>(rng.next_uniform() * (max_deg + 1)) % (max_deg + 1);
        long num = static_cast<long>(rng.next_uniform() * 9) - 4;
        long den = 1 + static_cast<long>(rng.next_uniform() * 3);
        p.add_term(e, Rat(num, den));
    }
    return p;
}

SdeModel cubic_model() {
    // dX = (1 - 2 X^3) dt + sqrt(2) X dW, supplied through a = 2 x^2
    auto b = parse_polynomial("1 - 2*x^3", {"x"});
    auto a = parse_polynomial("2*x^2", {"x"});
    return SdeModel(1, {b}, std::nullopt, {{{a}}});
}

SdeModel gbm_model(long lambda) {
    auto b = parse_polynomial("1 - " + std::to_string(lambda) + "*x", {"x"});
    auto a = parse_polynomial("2*x^2", {"x"});
    return SdeModel(1, {b}, std::nullopt, {{{a}}});
}

SdeModel circle_model() {
    // dX = -X/2 dt + [[0,-1],[1,0]] X dW
    std::vector<std::string> v{"x1", "x2"};
    std::vector<Polynomial> b{parse_polynomial("-1/2*x1", v), parse_polynomial("-1/2*x2", v)};
    std::vector<std::vector<Polynomial>> sigma{{parse_polynomial("-x2", v)},
                                               {parse_polynomial("x1", v)}};
    return SdeModel(2, b, sigma, std::nullopt);
}

}  // namespace

TEST_CASE("parser handles the expression grammar") {
    auto p = parse_polynomial("1 - 2*x^3", {"x"});
    CHECK(p.coefficient(e1(0)) == 1);
    CHECK(p.coefficient(e1(3)) == -2);
    CHECK(p.terms().size() == 2);

    CHECK(parse_polynomial("0", {"x", "y"}).is_zero());

    auto q = parse_polynomial("(x1 + x2)^2", {"x1", "x2"});
    CHECK(q.coefficient(e2(2, 0)) == binomial_coeff_oracle(2, 0));
    CHECK(q.coefficient(e2(1, 1)) == binomial_coeff_oracle(2, 1));
    CHECK(q.coefficient(e2(0, 2)) == binomial_coeff_oracle(2, 2));

    CHECK(parse_polynomial("1/2 + 0.25", {"x"}).coefficient(e1(0)) == Rat(3, 4));
    CHECK(parse_polynomial("-x + 3", {"x"}).coefficient(e1(1)) == -1);
    CHECK(parse_polynomial("2*x*x", {"x"}).coefficient(e1(2)) == 2);
}

TEST_CASE("parser rejects malformed input with positions") {
    CHECK_THROWS_AS(parse_polynomial("x + y", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_polynomial("x^-2", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_polynomial("x^", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_polynomial("(x + 1", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_polynomial("x + * 2", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_polynomial("1/0", {"x"}), ParseError);
    try {
        parse_polynomial("x + qq", {"x"});
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.position == 4);
    }
}

TEST_CASE("ring operations are exact") {
    auto x = Polynomial::variable(1, 0);
    CHECK(x * x == parse_polynomial("x^2", {"x"}));

    auto p = parse_polynomial("1/3*x^2 - 7*x + 2", {"x"});
    CHECK((p + Rat(-1) * p).is_zero());

    auto cube = parse_polynomial("1 + x", {"x"}).pow(3);
    for (unsigned j = 0; j <= 3; ++j) CHECK(cube.coefficient(e1(static_cast<int>(j))) == binomial_coeff_oracle(3, j));

    CHECK_THROWS_AS(parse_polynomial("x", {"x"}) + parse_polynomial("x", {"x", "y"}),
                    std::invalid_argument);
}

TEST_CASE("ring axioms on sampled polynomials") {
    CounterRng rng(12345);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + trial % 3;
        auto p = random_poly(rng, n, 3, 4);
        auto q = random_poly(rng, n, 3, 4);
        auto r = random_poly(rng, n, 2, 3);
        CHECK(p + q == q + p);
        CHECK(p * q == q * p);
        CHECK((p + q) + r == p + (q + r));
        CHECK((p * q) * r == p * (q * r));
        CHECK(p * (q + r) == p * q + p * r);
        if (!p.is_zero() && !q.is_zero()) CHECK((p * q).degree() == p.degree() + q.degree());
    }
}

TEST_CASE("differentiation") {
    CHECK(parse_polynomial("x^3", {"x"}).differentiate(0) == parse_polynomial("3*x^2", {"x"}));
    auto p = parse_polynomial("x1^2*x2 + x2^2", {"x1", "x2"});
    CHECK(p.differentiate(1) == parse_polynomial("x1^2 + 2*x2", {"x1", "x2"}));
    CHECK(parse_polynomial("5", {"x"}).differentiate(0).is_zero());
    CHECK_THROWS_AS(p.differentiate(2), std::out_of_range);
}

TEST_CASE("print/parse round trip on a corpus") {
    std::vector<std::string> fixed = {
        "0", "1", "-1", "x", "-x", "1 - 2*x^3", "x^10", "1/2*x - 2/3", "(1+x)^4",
        "x*(x+1)*(x-1)", "0.125*x^2", "3 - x + x^2 - x^3",
    };
    for (const auto& s : fixed) {
        auto p = parse_polynomial(s, {"x"});
        auto printed = to_string(p, {"x"});
        CHECK(parse_polynomial(printed, {"x"}) == p);
    }
    CounterRng rng(777);
    std::vector<std::string> vars{"x1", "x2", "x3"};
    for (int trial = 0; trial < 60; ++trial) {
        auto p = random_poly(rng, 3, 4, 6);
        auto printed = to_string(p, vars);
        auto q = parse_polynomial(printed, vars);
        REQUIRE(q == p);
        CHECK(to_string(q, vars) == printed);
    }
}

TEST_CASE("generator application matches the worked recurrences") {
    auto model = cubic_model();
    CHECK(model.generator_degree() == 3);
    for (int k = 1; k <= 6; ++k) {
        Polynomial h = Polynomial::monomial(1, e1(k), Rat(1));
        Polynomial expected(1);
        expected.add_term(e1(k - 1), Rat(k));
        expected.add_term(e1(k), Rat(k) * Rat(k - 1));
        expected.add_term(e1(k + 2), Rat(-2) * Rat(k));
        CHECK(apply_generator(h, model) == expected);
    }

    long lambda = 4;
    auto gbm = gbm_model(lambda);
    for (int k = 1; k <= 4; ++k) {
        Polynomial h = Polynomial::monomial(1, e1(k), Rat(1));
        Polynomial expected(1);
        expected.add_term(e1(k - 1), Rat(k));
        expected.add_term(e1(k), Rat(-k) * Rat(lambda + 1 - k));
        CHECK(apply_generator(h, gbm) == expected);
    }

    auto circ = circle_model();
    auto norm2 = parse_polynomial("x1^2 + x2^2", {"x1", "x2"});
    CHECK(apply_generator(norm2, circ).is_zero());
    CHECK(apply_generator(Polynomial::constant(2, Rat(1)), circ).is_zero());
}

TEST_CASE("generator is linear and satisfies the product rule") {
    CounterRng rng(9001);
    auto model = circle_model();
    const auto& a = model.diffusion_matrix();
    for (int trial = 0; trial < 100; ++trial) {
        auto p = random_poly(rng, 2, 3, 4);
        auto q = random_poly(rng, 2, 3, 4);
        Rat alpha(static_cast<long>(rng.next_uniform() * 7) - 3,
                  1 + static_cast<long>(rng.next_uniform() * 2));
        Rat beta(static_cast<long>(rng.next_uniform() * 7) - 3, 2);

        CHECK(apply_generator(alpha * p + beta * q, model) ==
              alpha * apply_generator(p, model) + beta * apply_generator(q, model));

        // A(pq) = p Aq + q Ap + <a grad p, grad q>
        Polynomial carre(2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) carre += a[i][j] * p.differentiate(i) * q.differentiate(j);
        CHECK(apply_generator(p * q, model) ==
              p * apply_generator(q, model) + q * apply_generator(p, model) + carre);
    }
}

TEST_CASE("model validation") {
    auto b = parse_polynomial("-x", {"x"});
    auto a_ok = parse_polynomial("x^2", {"x"});
    std::vector<std::vector<Polynomial>> sigma{{parse_polynomial("x", {"x"})}};
    CHECK_NOTHROW(SdeModel(1, {b}, sigma, {{{a_ok}}}));
    auto a_bad = parse_polynomial("x^2 + 1", {"x"});
    CHECK_THROWS_AS(SdeModel(1, {b}, sigma, {{{a_bad}}}), std::invalid_argument);

    std::vector<std::string> v{"x1", "x2"};
    std::vector<Polynomial> drift2{parse_polynomial("-x1", v), parse_polynomial("-x2", v)};
    std::vector<std::vector<Polynomial>> asym{
        {parse_polynomial("1", v), parse_polynomial("x1", v)},
        {parse_polynomial("x2", v), parse_polynomial("1", v)}};
    CHECK_THROWS_AS(SdeModel(2, drift2, std::nullopt, asym), std::invalid_argument);
    CHECK_THROWS_AS(SdeModel(1, {b}, std::nullopt, {{{a_ok}}}, {Polynomial(1)}),
                    std::invalid_argument);
}

TEST_CASE("exact division certifies vanishing on a variety") {
    auto g = parse_polynomial("x1^2 + x2^2 - 1", {"x1", "x2"});
    auto p = parse_polynomial("(x1^2 + x2^2 - 1) * (3*x1 - x2^2)", {"x1", "x2"});
    auto dm = poly_divmod(p, g);
    CHECK(dm.remainder.is_zero());
    CHECK(dm.quotient == parse_polynomial("3*x1 - x2^2", {"x1", "x2"}));
    auto notdiv = poly_divmod(parse_polynomial("x1 + 1", {"x1", "x2"}), g);
    CHECK_FALSE(notdiv.remainder.is_zero());
}

TEST_CASE("exact rational evaluation") {
    auto p = parse_polynomial("1/3*x^2 + x - 2", {"x"});
    CHECK(p.evaluate({Rat(3, 2)}) == Rat(1, 3) * Rat(9, 4) + Rat(3, 2) - 2);
}
