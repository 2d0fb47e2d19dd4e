#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace momentbound {

// Exact rational scalar used throughout assembly. Floating point enters only
// at the solver boundary.
using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline Rat rat_pow(const Rat& base, unsigned k) {
    Rat out(1);
    Rat b = base;
    while (k > 0) {
        if (k & 1u) out *= b;
        b *= b;
        k >>= 1u;
    }
    return out;
}

// Exact conversion of a binary double (data values, cos() constants).
inline Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rat_from_double: non-finite value");
    return Rat(x);
}

// Decimal-only integer parse. cpp_int's string constructor treats a leading
// zero as an octal prefix, which is never what a data file means.
inline BigInt bigint_from_decimal(const std::string& s) {
    std::string t = s;
    bool neg = false;
    if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
        neg = t[0] == '-';
        t = t.substr(1);
    }
    if (t.empty()) throw std::invalid_argument("malformed integer literal: " + s);
    for (char c : t)
        if (c < '0' || c > '9') throw std::invalid_argument("malformed integer literal: " + s);
    size_t first = t.find_first_not_of('0');
    t = first == std::string::npos ? "0" : t.substr(first);
    BigInt v(t);
    return neg ? -v : v;
}

// Parses "123", "-4/7" or a decimal literal like "3.25" exactly.
inline Rat rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt num = bigint_from_decimal(s.substr(0, slash));
        BigInt den = bigint_from_decimal(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
        return Rat(num, den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rat(bigint_from_decimal(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    bool neg = false;
    if (!digits.empty() && (digits[0] == '+' || digits[0] == '-')) {
        neg = digits[0] == '-';
        digits = digits.substr(1);
    }
    if (digits.empty()) throw std::invalid_argument("malformed decimal literal: " + s);
    BigInt num = bigint_from_decimal(digits);
    BigInt den(1);
    for (size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    Rat r(num, den);
    return neg ? -r : r;
}

inline std::string rat_to_string(const Rat& r) {
    std::string s = numerator(r).convert_to<std::string>();
    if (denominator(r) != 1) s += "/" + denominator(r).convert_to<std::string>();
    return s;
}

inline BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt out(1);
    for (unsigned i = 0; i < k; ++i) {
        out *= n - i;
        out /= i + 1;
    }
    return out;
}

inline BigInt factorial(unsigned n) {
    BigInt out(1);
    for (unsigned i = 2; i <= n; ++i) out *= i;
    return out;
}

}  // namespace momentbound
