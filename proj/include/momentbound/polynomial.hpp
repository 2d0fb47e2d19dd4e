#pragma once

#include "momentbound/rational.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace momentbound {

// Exponent tuple alpha in N^n. Kept as a plain vector; all entries >= 0.
using Exponents = std::vector<int>;

inline int total_degree(const Exponents& a) { return std::accumulate(a.begin(), a.end(), 0); }

inline Exponents exp_add(const Exponents& a, const Exponents& b) {
    Exponents out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

// Graded lexicographic order: lower total degree first, ties broken
// lexicographically with earlier variables dominating. This fixes row and
// column layouts of every assembled problem.
struct GradedLexLess {
    bool operator()(const Exponents& a, const Exponents& b) const {
        int da = total_degree(a), db = total_degree(b);
        if (da != db) return da < db;
        for (size_t i = 0; i < a.size(); ++i) {
            if (a[i] != b[i]) return a[i] > b[i];
        }
        return false;
    }
};

// Sparse multivariate polynomial with exact rational coefficients.
// Invariant: no stored term has a zero coefficient.
class Polynomial {
public:
    using TermMap = std::map<Exponents, Rat, GradedLexLess>;

    Polynomial() : n_(0) {}
    explicit Polynomial(int n) : n_(n) {
        if (n < 0) throw std::invalid_argument("Polynomial: negative variable count");
    }

    static Polynomial constant(int n, const Rat& c) {
        Polynomial p(n);
        if (c != 0) p.terms_[Exponents(n, 0)] = c;
        return p;
    }

    static Polynomial variable(int n, int i) {
        if (i < 0 || i >= n) throw std::out_of_range("Polynomial::variable: index out of range");
        Polynomial p(n);
        Exponents e(n, 0);
        e[i] = 1;
        p.terms_[e] = 1;
        return p;
    }

    static Polynomial monomial(int n, const Exponents& alpha, const Rat& c) {
        if (static_cast<int>(alpha.size()) != n)
            throw std::invalid_argument("Polynomial::monomial: exponent arity mismatch");
        for (int e : alpha)
            if (e < 0) throw std::invalid_argument("Polynomial::monomial: negative exponent");
        Polynomial p(n);
        if (c != 0) p.terms_[alpha] = c;
        return p;
    }

    int num_vars() const { return n_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }

    // Degree of the zero polynomial is 0 by convention; callers that care
    // should check is_zero() first.
    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
        return d;
    }

    Rat coefficient(const Exponents& alpha) const {
        auto it = terms_.find(alpha);
        return it == terms_.end() ? Rat(0) : it->second;
    }

    void add_term(const Exponents& alpha, const Rat& c) {
        if (static_cast<int>(alpha.size()) != n_)
            throw std::invalid_argument("Polynomial::add_term: exponent arity mismatch");
        if (c == 0) return;
        auto [it, inserted] = terms_.emplace(alpha, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Polynomial operator-() const {
        Polynomial out(n_);
        for (const auto& [e, c] : terms_) out.terms_[e] = -c;
        return out;
    }

    Polynomial& operator+=(const Polynomial& q) {
        check_arity(q);
        for (const auto& [e, c] : q.terms_) add_term(e, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& q) {
        check_arity(q);
        for (const auto& [e, c] : q.terms_) add_term(e, -c);
        return *this;
    }

    friend Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
    friend Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }

    friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
        p.check_arity(q);
        Polynomial out(p.n_);
        for (const auto& [ea, ca] : p.terms_)
            for (const auto& [eb, cb] : q.terms_) out.add_term(exp_add(ea, eb), ca * cb);
        return out;
    }

    friend Polynomial operator*(const Rat& c, const Polynomial& p) {
        Polynomial out(p.n_);
        if (c == 0) return out;
        for (const auto& [e, k] : p.terms_) out.terms_[e] = c * k;
        return out;
    }
    friend Polynomial operator*(const Polynomial& p, const Rat& c) { return c * p; }

    bool operator==(const Polynomial& q) const { return n_ == q.n_ && terms_ == q.terms_; }
    bool operator!=(const Polynomial& q) const { return !(*this == q); }

    Polynomial pow(unsigned k) const {
        Polynomial out = constant(n_, 1);
        Polynomial b = *this;
        while (k > 0) {
            if (k & 1u) out = out * b;
            if (k >>= 1u) b = b * b;
        }
        return out;
    }

    // Exact partial derivative with respect to variable i (0-based).
    Polynomial differentiate(int i) const {
        if (i < 0 || i >= n_) throw std::out_of_range("differentiate: variable index out of range");
        Polynomial out(n_);
        for (const auto& [e, c] : terms_) {
            if (e[i] == 0) continue;
            Exponents d = e;
            d[i] -= 1;
            out.add_term(d, c * e[i]);
        }
        return out;
    }

    Rat evaluate(const std::vector<Rat>& x) const {
        if (static_cast<int>(x.size()) != n_)
            throw std::invalid_argument("evaluate: point arity mismatch");
        Rat out(0);
        for (const auto& [e, c] : terms_) {
            Rat t = c;
            for (int i = 0; i < n_; ++i)
                if (e[i] > 0) t *= rat_pow(x[i], static_cast<unsigned>(e[i]));
            out += t;
        }
        return out;
    }

    double evaluate_double(const std::vector<double>& x) const {
        double out = 0;
        for (const auto& [e, c] : terms_) {
            double t = to_double(c);
            for (int i = 0; i < n_; ++i)
                for (int k = 0; k < e[i]; ++k) t *= x[i];
            out += t;
        }
        return out;
    }

private:
    void check_arity(const Polynomial& q) const {
        if (n_ != q.n_) throw std::invalid_argument("polynomial arity mismatch");
    }

    int n_;
    TermMap terms_;
};

// Division with remainder by a single divisor under graded lex order.
// Used to certify identities of the form "p vanishes on {g = 0}" exactly.
struct DivModResult {
    Polynomial quotient;
    Polynomial remainder;
};

inline DivModResult poly_divmod(const Polynomial& p, const Polynomial& g) {
    if (g.is_zero()) throw std::invalid_argument("poly_divmod: division by zero polynomial");
    if (p.num_vars() != g.num_vars()) throw std::invalid_argument("poly_divmod: arity mismatch");
    const int n = p.num_vars();
    const auto& glead = *g.terms().rbegin();  // largest in graded lex

    Polynomial q(n), r(n), work = p;
    while (!work.is_zero()) {
        const auto& wlead = *work.terms().rbegin();
        Exponents diff(n);
        bool divides = true;
        for (int i = 0; i < n; ++i) {
            diff[i] = wlead.first[i] - glead.first[i];
            if (diff[i] < 0) {
                divides = false;
                break;
            }
        }
        if (divides) {
            Rat c = wlead.second / glead.second;
            Polynomial t = Polynomial::monomial(n, diff, c);
            q += t;
            work -= t * g;
        } else {
            r.add_term(wlead.first, wlead.second);
            Polynomial t = Polynomial::monomial(n, wlead.first, wlead.second);
            work -= t;
        }
    }
    return {q, r};
}

// Canonical text form: terms in graded lex order, explicit '*' and '^'.
// parse(print(p)) reproduces the term map exactly.
inline std::string to_string(const Polynomial& p, const std::vector<std::string>& vars) {
    if (static_cast<int>(vars.size()) != p.num_vars())
        throw std::invalid_argument("to_string: variable name count mismatch");
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : p.terms()) {
        Rat a = c;
        if (first) {
            if (a < 0) {
                os << "-";
                a = -a;
            }
        } else {
            os << (a < 0 ? " - " : " + ");
            if (a < 0) a = -a;
        }
        first = false;
        bool any_var = total_degree(e) > 0;
        bool coeff_shown = (a != 1) || !any_var;
        if (coeff_shown) os << rat_to_string(a);
        bool lead = !coeff_shown;
        for (size_t i = 0; i < vars.size(); ++i) {
            if (e[i] == 0) continue;
            if (!lead) os << "*";
            lead = false;
            os << vars[i];
            if (e[i] > 1) os << "^" << e[i];
        }
    }
    return os.str();
}

}  // namespace momentbound
