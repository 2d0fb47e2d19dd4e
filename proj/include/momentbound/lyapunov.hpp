#pragma once

#include "momentbound/assembly.hpp"
#include "momentbound/model.hpp"
#include "momentbound/solve.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace momentbound {

// Linear system dX = A X dt + sum_i B_i X dW_i with multiplicative noise,
// in Ito or Stratonovich form. Entries are exact rationals so sweeps are
// bit-reproducible.
struct LinearNoiseSystem {
    enum class Calculus { Ito, Stratonovich };

    int n = 0;
    std::vector<std::vector<Rat>> A;
    std::vector<std::vector<std::vector<Rat>>> B;
    Calculus calculus = Calculus::Ito;

    void validate() const {
        if (n <= 0) throw std::invalid_argument("LinearNoiseSystem: dimension must be positive");
        auto check = [&](const std::vector<std::vector<Rat>>& M, const char* what) {
            if (static_cast<int>(M.size()) != n)
                throw std::invalid_argument(std::string("LinearNoiseSystem: ") + what +
                                            " must be n x n");
            for (const auto& row : M)
                if (static_cast<int>(row.size()) != n)
                    throw std::invalid_argument(std::string("LinearNoiseSystem: ") + what +
                                                " must be n x n");
        };
        check(A, "A");
        for (const auto& b : B) check(b, "B_i");
    }
};

// Drift correction A' = A + (1/2) sum_i B_i^2 converting Stratonovich noise
// to Ito form; the noise matrices are unchanged.
inline LinearNoiseSystem stratonovich_to_ito(const LinearNoiseSystem& sys) {
    sys.validate();
    if (sys.calculus != LinearNoiseSystem::Calculus::Stratonovich)
        throw std::invalid_argument("stratonovich_to_ito: system is not Stratonovich");
    LinearNoiseSystem out = sys;
    out.calculus = LinearNoiseSystem::Calculus::Ito;
    const int n = sys.n;
    for (const auto& b : sys.B) {
        // A += (1/2) b * b
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Rat acc(0);
                for (int k = 0; k < n; ++k) acc += b[i][k] * b[k][j];
                out.A[i][j] += acc / 2;
            }
    }
    return out;
}

// Unit-sphere projection of a linear Ito system: the angular part satisfies
//   d Lambda = u0(Lambda) dt + sum_i u_i(Lambda) dW_i
// on ||x|| = 1, and log||X_t|| grows at rate Q(Lambda_t) with
//   u0 = Ax - <x,Ax>x - sum_i( (1/2)||B_i x||^2 x + <x,B_i x> B_i x
//                              - (3/2)<x,B_i x>^2 x ),
//   u_i = B_i x - <x,B_i x> x,
//   Q   = <x,Ax> + (1/2) sum_i ||B_i x||^2 - sum_i <x,B_i x>^2.
// The support is the (compact) unit sphere.
struct ProjectedSystem {
    SdeModel model;
    Polynomial growth_rate;  // Q
};

inline ProjectedSystem build_projection(const LinearNoiseSystem& sys) {
    sys.validate();
    if (sys.calculus != LinearNoiseSystem::Calculus::Ito)
        throw std::invalid_argument("build_projection: convert to Ito form first");
    const int n = sys.n;

    auto matvec = [&](const std::vector<std::vector<Rat>>& M) {
        std::vector<Polynomial> out(static_cast<size_t>(n), Polynomial(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (M[i][j] != 0) out[static_cast<size_t>(i)] += M[i][j] * Polynomial::variable(n, j);
        return out;
    };
    auto dot_x = [&](const std::vector<Polynomial>& v) {
        Polynomial out(n);
        for (int i = 0; i < n; ++i) out += Polynomial::variable(n, i) * v[static_cast<size_t>(i)];
        return out;
    };
    auto norm2 = [&](const std::vector<Polynomial>& v) {
        Polynomial out(n);
        for (const auto& p : v) out += p * p;
        return out;
    };

    std::vector<Polynomial> ax = matvec(sys.A);
    Polynomial x_ax = dot_x(ax);

    std::vector<Polynomial> drift = ax;
    for (int i = 0; i < n; ++i) drift[static_cast<size_t>(i)] -= x_ax * Polynomial::variable(n, i);

    Polynomial q = x_ax;
    Rat half(1, 2), three_half(3, 2);

    std::vector<std::vector<Polynomial>> sigma(static_cast<size_t>(n));
    for (auto& row : sigma) row.reserve(sys.B.size());

    for (const auto& bmat : sys.B) {
        std::vector<Polynomial> bx = matvec(bmat);
        Polynomial x_bx = dot_x(bx);
        Polynomial bx2 = norm2(bx);

        for (int i = 0; i < n; ++i) {
            Polynomial xi = Polynomial::variable(n, i);
            drift[static_cast<size_t>(i)] -=
                half * (bx2 * xi) + x_bx * bx[static_cast<size_t>(i)] - three_half * (x_bx * x_bx * xi);
            sigma[static_cast<size_t>(i)].push_back(bx[static_cast<size_t>(i)] - x_bx * xi);
        }
        q += half * bx2 - x_bx * x_bx;
    }

    Polynomial unit_sphere(n);
    for (int i = 0; i < n; ++i)
        unit_sphere += Polynomial::variable(n, i) * Polynomial::variable(n, i);
    unit_sphere -= Polynomial::constant(n, Rat(1));

    // The coefficients only matter on the sphere, so reduce them modulo the
    // variety; lower degrees admit more stationarity rows at a fixed d.
    auto reduce = [&](const Polynomial& p) { return poly_divmod(p, unit_sphere).remainder; };
    for (auto& p : drift) p = reduce(p);
    for (auto& row : sigma)
        for (auto& p : row) p = reduce(p);
    q = reduce(q);

    SdeModel model(n, std::move(drift), std::move(sigma), std::nullopt, {unit_sphere},
                   /*compact_support=*/true);
    return {std::move(model), std::move(q)};
}

// Moment relaxation bounds on the Lyapunov exponents: rho^d <= lambda_- and
// lambda_+ <= eta^d. Finite for sufficiently large d; probed by raising d.
inline BoundPair lyapunov_bounds(const LinearNoiseSystem& sys, int d,
                                 const SolverSettings& settings = {}) {
    LinearNoiseSystem ito =
        sys.calculus == LinearNoiseSystem::Calculus::Stratonovich ? stratonovich_to_ito(sys) : sys;
    ProjectedSystem proj = build_projection(ito);
    return lower_and_upper(assemble_outer(proj.model, proj.growth_rate, d), settings);
}

enum class Stability { Stable, Unstable, Inconclusive };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct StabilityVerdict {
    Stability kind = Stability::Inconclusive;
    BoundPair interval;
};

// Almost-sure asymptotic stability test: eta < 0 certifies stability and
// rho > 0 certifies instability. The deciding solve must be Optimal; an
// Inaccurate bound downgrades to Inconclusive.
inline StabilityVerdict classify(const BoundPair& bounds) {
    StabilityVerdict v;
    v.interval = bounds;
    if (bounds.upper.status == SolveStatus::Optimal && bounds.upper.value < 0)
        v.kind = Stability::Stable;
    else if (bounds.lower.status == SolveStatus::Optimal && bounds.lower.value > 0)
        v.kind = Stability::Unstable;
    return v;
}

// The two-dimensional noise-stabilization benchmark: growth rates c1 > 0 and
// c2 < 0 on the axes, isotropic intensity noise and rotational noise of
// strength sigma. Stated directly in Ito form; the sigma^2/2 drift shift is
// what the closed-form exponent density integrates against.
inline LinearNoiseSystem noise_stabilization_system(const Rat& c1, const Rat& c2,
                                                    const Rat& sigma) {
    LinearNoiseSystem sys;
    sys.n = 2;
    sys.calculus = LinearNoiseSystem::Calculus::Ito;
    Rat shift = sigma * sigma / 2;
    sys.A = {{c1 + shift, Rat(0)}, {Rat(0), c2 + shift}};
    sys.B = {{{sigma, Rat(0)}, {Rat(0), sigma}}, {{Rat(0), sigma}, {-sigma, Rat(0)}}};
    return sys;
}

struct SweepPoint {
    Rat sigma;
    int degree = 0;
    BoundPair bounds;
    StabilityVerdict verdict;
};

}  // namespace momentbound
