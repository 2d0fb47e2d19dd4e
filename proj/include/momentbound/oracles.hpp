#pragma once

#include "momentbound/polynomial.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace momentbound {

// Moments of the uniform measure on the circle of radius R:
//   E[x1^a1 x2^a2] = 0 when either exponent is odd, else
//   R^|a| (a1)! (a2)! / (4^{|a|/2} (a1/2)! (a2/2)! (|a|/2)!).
// Exact for rational R.
inline Rat oracle_circle_moment(const Rat& radius, int a1, int a2) {
    if (radius < 0) throw std::invalid_argument("oracle_circle_moment: negative radius");
    if (a1 < 0 || a2 < 0) throw std::invalid_argument("oracle_circle_moment: negative exponent");
    if (a1 % 2 != 0 || a2 % 2 != 0) return Rat(0);
    unsigned a = static_cast<unsigned>(a1) / 2, b = static_cast<unsigned>(a2) / 2;
    Rat angular(factorial(2 * a) * factorial(2 * b),
                rat_pow(Rat(4), a + b).convert_to<BigInt>() * factorial(a) * factorial(b) *
                    factorial(a + b));
    return rat_pow(radius, static_cast<unsigned>(a1 + a2)) * angular;
}

// Moments y_k = prod_{j<k} 1/(lambda - j) of the inverse Gamma stationary law
// of dX = (1 - lambda X) dt + sqrt(2) X dW; valid for k = 0..lambda.
inline Rat oracle_inverse_gamma_moment(long lambda, long k) {
    if (lambda <= 0 || lambda % 2 != 0)
        throw std::invalid_argument("oracle_inverse_gamma_moment: lambda must be even positive");
    if (k < 0 || k > lambda)
        throw std::invalid_argument("oracle_inverse_gamma_moment: need 0 <= k <= lambda");
    Rat y(1);
    for (long j = 0; j < k; ++j) y /= Rat(lambda - j);
    return y;
}

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b, long intervals) {
    if (intervals % 2 != 0) ++intervals;
    double h = (b - a) / static_cast<double>(intervals);
    double acc = f(a) + f(b);
    for (long i = 1; i < intervals; ++i) acc += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Doubles the grid until two successive composite-Simpson values agree.
inline double simpson_adaptive(const std::function<double(double)>& f, double a, double b,
                               long start, double rel_tol) {
    double prev = simpson(f, a, b, start);
    for (long n = start * 2; n <= start * 1024; n *= 2) {
        double cur = simpson(f, a, b, n);
        if (std::abs(cur - prev) <= rel_tol * (std::abs(cur) + 1e-300)) return cur;
        prev = cur;
    }
    return prev;
}

}  // namespace detail

// Lyapunov exponent of the noise-stabilization system through the closed-form
// ratio of periodic integrals
//   pi(Q) = int (s^2/2 + c1 cos^2 + c2 sin^2) e^{((c1-c2)/s^2) cos^2} dphi
//           / int e^{((c1-c2)/s^2) cos^2} dphi.
inline double oracle_lyapunov(double c1, double c2, double sigma, long grid = 4096) {
    if (sigma <= 0) throw std::invalid_argument("oracle_lyapunov: sigma must be positive");
    if (grid < 1000) grid = 1000;
    if (grid % 2 != 0) ++grid;
    double k = (c1 - c2) / (sigma * sigma);
    auto weight = [&](double phi) {
        double c = std::cos(phi);
        return std::exp(k * c * c);
    };
    auto numerator = [&](double phi) {
        double c = std::cos(phi), s = std::sin(phi);
        return (sigma * sigma / 2.0 + c1 * c * c + c2 * s * s) * weight(phi);
    };
    const double two_pi = 6.283185307179586476925286766559;
    double num = detail::simpson_adaptive(numerator, 0.0, two_pi, grid, 1e-12);
    double den = detail::simpson_adaptive(weight, 0.0, two_pi, grid, 1e-12);
    return num / den;
}

// Reliability quantities of the Duffing oscillator computed from the
// factorized stationary density e^{-ydot^2/2} e^{-(y^2/2 + y^4/8)}.
struct DuffingExact {
    double f_u = 0.0;  // stationary fraction of time above the threshold
    double v_u = 0.0;  // mean up-crossing rate at the threshold
    double p_u = 0.0;  // extreme-value probability over the horizon
    double sigma = 0.0;  // standard deviation of the position marginal
};

inline DuffingExact oracle_duffing(double u, double horizon, long grid = 4096) {
    if (u < 0) throw std::invalid_argument("oracle_duffing: negative threshold");
    auto density = [](double y) { return std::exp(-(y * y / 2.0 + y * y * y * y / 8.0)); };
    const double cutoff = 12.0;  // density is ~1e-400 here
    double mass = detail::simpson_adaptive(density, -cutoff, cutoff, grid, 1e-13);
    double second = detail::simpson_adaptive([&](double y) { return y * y * density(y); },
                                             -cutoff, cutoff, grid, 1e-13);
    DuffingExact out;
    out.sigma = std::sqrt(second / mass);
    double tail = u >= cutoff ? 0.0
                              : detail::simpson_adaptive(density, u, cutoff, grid, 1e-13);
    out.f_u = tail / mass;
    // up-crossing rate: density slice at u times int_0^inf w e^{-w^2/2} dw = 1,
    // normalized by the full velocity mass sqrt(2 pi)
    const double sqrt_two_pi = 2.5066282746310005024157652848110;
    out.v_u = density(u) / (mass * sqrt_two_pi);
    out.p_u = horizon <= 0 ? 0.0 : 1.0 - std::exp(-out.v_u * horizon);
    return out;
}

}  // namespace momentbound
