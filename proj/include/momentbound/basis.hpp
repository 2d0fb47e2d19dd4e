#pragma once

#include "momentbound/polynomial.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace momentbound {

// Blocks blow up combinatorially with n and d; fail fast past this many
// variables rather than letting the solver thrash.
inline constexpr size_t kMaxBasisSize = 5000;

inline size_t basis_size(int n, int d) {
    // r(d) = C(n+d, d)
    BigInt r = binomial(static_cast<unsigned>(n + d), static_cast<unsigned>(d));
    return r.convert_to<size_t>();
}

// Monomial basis of N^n_d in graded lexicographic order. Position 0 is the
// zero tuple, whose variable carries the measure's mass y_0.
class MonomialBasis {
public:
    MonomialBasis(int n, int d) : n_(n), d_(d) {
        if (n < 1) throw std::invalid_argument("MonomialBasis: need n >= 1");
        if (d < 0) throw std::invalid_argument("MonomialBasis: need d >= 0");
        size_t expected = basis_size(n, d);
        if (expected > kMaxBasisSize)
            throw std::invalid_argument(
                "MonomialBasis: r(d) = " + std::to_string(expected) + " exceeds the cap of " +
                std::to_string(kMaxBasisSize) +
                " variables per block; lower the relaxation degree");
        tuples_.reserve(expected);
        Exponents cur(n, 0);
        for (int deg = 0; deg <= d; ++deg) enumerate_degree(cur, 0, deg);
        for (size_t i = 0; i < tuples_.size(); ++i) index_[tuples_[i]] = static_cast<int>(i);
    }

    int dimension() const { return n_; }
    int degree() const { return d_; }
    size_t size() const { return tuples_.size(); }
    const Exponents& tuple(int idx) const { return tuples_.at(static_cast<size_t>(idx)); }
    const std::vector<Exponents>& tuples() const { return tuples_; }

    int index(const Exponents& alpha) const {
        auto it = index_.find(alpha);
        if (it == index_.end())
            throw std::out_of_range("MonomialBasis::index: tuple outside basis");
        return it->second;
    }

    bool contains(const Exponents& alpha) const { return index_.count(alpha) > 0; }

private:
    // Emits all tuples of exact total degree `deg` in graded lex order: the
    // order sorts later variables up, so recurse giving earlier variables the
    // largest remaining share first.
    void enumerate_degree(Exponents& cur, int var, int deg) {
        if (var == n_ - 1) {
            cur[var] = deg;
            tuples_.push_back(cur);
            cur[var] = 0;
            return;
        }
        for (int k = deg; k >= 0; --k) {
            cur[var] = k;
            enumerate_degree(cur, var + 1, deg - k);
        }
        cur[var] = 0;
    }

    int n_;
    int d_;
    std::vector<Exponents> tuples_;
    std::map<Exponents, int, GradedLexLess> index_;
};

}  // namespace momentbound
