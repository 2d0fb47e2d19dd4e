#pragma once

#include "momentbound/assembly.hpp"
#include "momentbound/model.hpp"
#include "momentbound/oracles.hpp"
#include "momentbound/rng.hpp"
#include "momentbound/solve.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace momentbound {

// Langevin diffusion dX = grad v dt + sqrt(2) dW, whose unique stationary
// measure is proportional to e^{v}.
inline SdeModel build_langevin(const Polynomial& v) {
    const int n = v.num_vars();
    std::vector<Polynomial> drift(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) drift[static_cast<size_t>(i)] = v.differentiate(i);
    std::vector<std::vector<Polynomial>> a(static_cast<size_t>(n),
                                           std::vector<Polynomial>(static_cast<size_t>(n), Polynomial(n)));
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)][static_cast<size_t>(i)] =
        Polynomial::constant(n, Rat(2));
    return SdeModel(n, std::move(drift), std::nullopt, std::move(a));
}

// ---------------------------------------------------------------------------
// Benchmark recurrence z_k = p1 z_{k-1} + p2 z_{k-1}/(1+z_{k-1}^2)
//                            + p3 cos(1.2 (k-1)) + xi_k
// with bimodal noise xi ~ e^{3x^2 - x^4} dx (normalized).
// ---------------------------------------------------------------------------

struct RecurrenceDataset {
    double z0 = 0.0;
    std::vector<double> z;  // z_1..z_N
    std::array<double, 3> params_true{};
    std::uint64_t seed = 0;
    // noise grid spec, fixed by the generation recipe
    static constexpr double grid_lo = -10.0;
    static constexpr double grid_hi = 10.0;
    static constexpr double grid_step = 1e-4;
};

namespace detail {

// Inverse CDF of the bimodal noise law on a uniform grid with linear
// interpolation between nodes; monotone by construction.
class BimodalNoiseSampler {
public:
    BimodalNoiseSampler() {
        const double lo = RecurrenceDataset::grid_lo, hi = RecurrenceDataset::grid_hi;
        const double step = RecurrenceDataset::grid_step;
        const size_t count = static_cast<size_t>(std::llround((hi - lo) / step)) + 1;
        grid_.resize(count);
        cdf_.resize(count);
        double prev_density = density(lo);
        grid_[0] = lo;
        cdf_[0] = 0.0;
        for (size_t i = 1; i < count; ++i) {
            grid_[i] = lo + step * static_cast<double>(i);
            double cur = density(grid_[i]);
            cdf_[i] = cdf_[i - 1] + 0.5 * step * (prev_density + cur);
            prev_density = cur;
        }
        double total = cdf_.back();
        for (auto& c : cdf_) c /= total;
    }

    double invert(double u) const {
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.begin()) return grid_.front();
        if (it == cdf_.end()) return grid_.back();
        size_t hi = static_cast<size_t>(it - cdf_.begin());
        double c0 = cdf_[hi - 1], c1 = cdf_[hi];
        double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
        return grid_[hi - 1] + t * (grid_[hi] - grid_[hi - 1]);
    }

    static double density(double x) { return std::exp(3 * x * x - x * x * x * x); }

private:
    std::vector<double> grid_;
    std::vector<double> cdf_;
};

}  // namespace detail

inline RecurrenceDataset generate_recurrence(const std::array<double, 3>& params, double z0,
                                             long count, std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("generate_recurrence: negative sample count");
    static const detail::BimodalNoiseSampler sampler;
    RecurrenceDataset data;
    data.z0 = z0;
    data.params_true = params;
    data.seed = seed;
    data.z.reserve(static_cast<size_t>(count));
    CounterRng rng(seed);
    double prev = z0;
    for (long k = 1; k <= count; ++k) {
        double xi = sampler.invert(rng.uniform_at(static_cast<std::uint64_t>(k - 1)));
        double zk = params[0] * prev + params[1] * prev / (1.0 + prev * prev) +
                    params[2] * std::cos(1.2 * static_cast<double>(k - 1)) + xi;
        data.z.push_back(zk);
        prev = zk;
    }
    return data;
}

// Log-posterior potential over the parameters (p1, p2, p3): the sum of the
// noise potential evaluated at each residual plus the prior potential. The
// residual is affine in p with data coefficients converted exactly, so the
// result is an exact polynomial of degree deg(u_xi).
inline Polynomial posterior_potential(const RecurrenceDataset& data, const Polynomial& noise_pot,
                                      const Polynomial& prior_pot) {
    if (noise_pot.num_vars() != 1)
        throw std::invalid_argument("posterior_potential: noise potential must be univariate");
    if (prior_pot.num_vars() != 3)
        throw std::invalid_argument("posterior_potential: prior potential must be trivariate");

    Polynomial v = prior_pot;
    double prev = data.z0;
    for (size_t k = 0; k < data.z.size(); ++k) {
        // residual = z_k - (p1 c1 + p2 c2 + p3 c3), data entering exactly
        Rat c1 = rat_from_double(prev);
        Rat c2 = rat_from_double(prev / (1.0 + prev * prev));
        Rat c3 = rat_from_double(std::cos(1.2 * static_cast<double>(k)));
        Polynomial residual = Polynomial::constant(3, rat_from_double(data.z[k]));
        residual -= c1 * Polynomial::variable(3, 0);
        residual -= c2 * Polynomial::variable(3, 1);
        residual -= c3 * Polynomial::variable(3, 2);

        // compose the univariate noise potential with the residual
        for (const auto& [e, c] : noise_pot.terms())
            v += c * residual.pow(static_cast<unsigned>(e[0]));
        prev = data.z[k];
    }
    return v;
}

// ---------------------------------------------------------------------------
// Duffing oscillator reliability
// ---------------------------------------------------------------------------

// Ito form of the noisy oscillator y'' + y' + y + y^3/2 = sqrt(2) W':
// dX1 = X2 dt, dX2 = (-X2 - X1 - X1^3/2) dt + sqrt(2) dW.
inline SdeModel duffing_model() {
    std::vector<std::string> v{"x1", "x2"};
    std::vector<Polynomial> b{Polynomial::variable(2, 1),
                              Polynomial(2)};
    b[1] -= Polynomial::variable(2, 1);
    b[1] -= Polynomial::variable(2, 0);
    b[1] -= Rat(1, 2) * Polynomial::variable(2, 0).pow(3);
    std::vector<std::vector<Polynomial>> a{
        {Polynomial(2), Polynomial(2)},
        {Polynomial(2), Polynomial::constant(2, Rat(2))}};
    return SdeModel(2, std::move(b), std::nullopt, std::move(a));
}

struct ReliabilityResult {
    double threshold = 0.0;
    double horizon = 0.0;
    int degree = 0;
    BoundPair occupation;   // upper bound on the stationary fraction above u
    BoundPair crossing;     // upper bound on the mean up-crossing rate
    double p_u_bound = 0.0;  // 1 - exp(-crossing_bound * T)
    DuffingExact exact;      // quadrature values for the same u, T
};

namespace detail {

// The nonnegative piecewise objectives only carry information in the upper
// bound (the multi-block set always contains the origin), so solve that side
// alone. Moment magnitudes grow factorially, which thins the interior of the
// spectrahedron; retry over a ladder of coordinate scalings and keep the
// best-certified solve.
inline BoundPair solve_piecewise_upper(const MomentProblem& prob, const SolverSettings& settings,
                                       const Rat& piece_scale_hint) {
    // ambient scalings paired with a piece-block scaling matched to the
    // threshold, where the restricted measure's x1 moments concentrate
    std::vector<std::vector<Rat>> ambient = {
        {Rat(3, 2), Rat(5, 2)}, {Rat(5, 2), Rat(3)}, {Rat(2), Rat(3)}, {Rat(2), Rat(2)},
        {Rat(1), Rat(1)}};
    Rat hint = piece_scale_hint > 1 ? piece_scale_hint : Rat(1);

    BoundPair best;
    best.degree = prob.degree;
    best.fingerprint = fingerprint(ConicProblem::from_moment_problem(prob));
    // informative side is the supremum; the infimum is zero by construction
    best.lower.status = SolveStatus::Optimal;
    best.lower.value = 0.0;
    best.lower.primal_residual = best.lower.dual_residual = best.lower.gap = 0.0;
    best.lower.backend = "trivial-origin";

    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    double best_err = std::numeric_limits<double>::infinity();
    for (bool scale_piece : {true, false}) {
        for (const auto& z : ambient) {
            std::vector<std::vector<Rat>> zs(prob.blocks.size(), z);
            if (scale_piece)
                for (size_t b = 1; b < zs.size(); ++b) zs[b] = {hint, z[1]};
            SolveOutcome up = solve(ConicProblem::from_moment_problem(rescale_with(prob, zs)),
                                    Sense::Maximize, settings);
            double err = std::max({up.primal_residual, up.dual_residual, up.gap});
            if (up.status == SolveStatus::Unbounded) {
                // the relaxation is too weak to cap the piece at this degree;
                // +infinity is the honest (vacuous) upper bound
                best.upper = up;
                return best;
            }
            if (up.has_value() && err < best_err) {
                best_err = err;
                best.upper = up;
            }
            // stop hunting once certified or close enough that further
            // scalings historically do not improve matters
            if (up.status == SolveStatus::Optimal || best_err <= 3e-6 || elapsed() > 25.0)
                return best;
        }
    }
    if (!best.upper.has_value()) best.upper.status = SolveStatus::NumericalFailure;
    return best;
}

}  // namespace detail

// Upper bounds on the occupation fraction F_u, the up-crossing rate v_u and
// the extreme-value probability P_u of the Duffing oscillator.
inline ReliabilityResult reliability_bounds(double threshold, double horizon, int d,
                                            const SolverSettings& settings = {}) {
    if (threshold <= 0) throw std::invalid_argument("reliability_bounds: threshold must be positive");
    if (horizon < 0) throw std::invalid_argument("reliability_bounds: negative horizon");
    if (d < 4) throw std::invalid_argument("reliability_bounds: degree too small");

    SdeModel model = duffing_model();
    Rat u = rat_from_double(threshold);
    Polynomial x1 = Polynomial::variable(2, 0);
    Polynomial x2 = Polynomial::variable(2, 1);
    Polynomial level = x1 - Polynomial::constant(2, u);

    ReliabilityResult out;
    out.threshold = threshold;
    out.horizon = horizon;
    out.degree = d;

    Piece occupation;
    occupation.f = Polynomial::constant(2, Rat(1));
    occupation.inequalities = {level};
    out.occupation =
        detail::solve_piecewise_upper(assemble_piecewise(model, {occupation}, d), settings, u);

    Piece crossing;
    crossing.f = x2;
    crossing.equalities = {level};
    crossing.inequalities = {x2};
    out.crossing =
        detail::solve_piecewise_upper(assemble_piecewise(model, {crossing}, d), settings, u);

    double vu = out.crossing.eta();
    out.p_u_bound = horizon <= 0 ? 0.0 : 1.0 - std::exp(-vu * horizon);
    out.exact = oracle_duffing(threshold, horizon);
    return out;
}

// ---------------------------------------------------------------------------
// Euler-Maruyama time averages (independent stochastic oracle)
// ---------------------------------------------------------------------------

struct TimeAverage {
    double mean = 0.0;
    double standard_error = 0.0;
    long batches = 0;
    bool diverged = false;
    double divergence_time = 0.0;
};

namespace detail {

struct CompiledPoly {
    struct Term {
        double coeff;
        std::array<int, 4> exps;
    };
    std::vector<Term> terms;
    int n;

    explicit CompiledPoly(const Polynomial& p) : n(p.num_vars()) {
        if (n > 4) throw std::invalid_argument("CompiledPoly: dimension cap is 4");
        for (const auto& [e, c] : p.terms()) {
            Term t{to_double(c), {0, 0, 0, 0}};
            for (int i = 0; i < n; ++i) t.exps[static_cast<size_t>(i)] = e[i];
            terms.push_back(t);
        }
    }

    double operator()(const double* x) const {
        double acc = 0;
        for (const auto& t : terms) {
            double v = t.coeff;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < t.exps[static_cast<size_t>(i)]; ++k) v *= x[i];
            acc += v;
        }
        return acc;
    }
};

}  // namespace detail

// Long-run time average of f along an Euler-Maruyama path. The diffusion
// factor is the Cholesky-style square root of a(x) evaluated pointwise, so
// models supplied through the diffusion matrix alone remain simulable.
// Batch-means standard error over at least 30 batches.
inline TimeAverage simulate_time_average(const SdeModel& model, const Polynomial& f,
                                         double horizon, double dt, std::uint64_t seed,
                                         double burn_in = 0.0,
                                         const std::vector<double>& start = {}) {
    const int n = model.dimension();
    if (n > 4) throw std::invalid_argument("simulate_time_average: dimension cap is 4");
    if (dt <= 0 || horizon <= burn_in)
        throw std::invalid_argument("simulate_time_average: need dt > 0 and horizon > burn-in");

    std::vector<detail::CompiledPoly> drift;
    for (const auto& b : model.drift()) drift.emplace_back(b);
    std::vector<std::vector<detail::CompiledPoly>> amat;
    for (const auto& row : model.diffusion_matrix()) {
        std::vector<detail::CompiledPoly> r;
        for (const auto& p : row) r.emplace_back(p);
        amat.push_back(std::move(r));
    }
    detail::CompiledPoly fc(f);

    double x[4] = {0, 0, 0, 0};
    for (size_t i = 0; i < start.size() && i < 4; ++i) x[i] = start[i];

    CounterRng rng(seed);
    const double sqdt = std::sqrt(dt);
    const long total_steps = static_cast<long>(horizon / dt);
    const long burn_steps = static_cast<long>(burn_in / dt);
    const long sample_steps = total_steps - burn_steps;
    const long num_batches = 50;
    const long batch_len = std::max<long>(1, sample_steps / num_batches);

    TimeAverage out;
    std::vector<double> batch_means;
    double batch_acc = 0;
    long batch_count = 0;

    double a_chol[4][4];
    for (long step = 0; step < total_steps; ++step) {
        // pointwise square root of the diffusion matrix (lower triangular)
        double a_val[4][4];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) a_val[i][j] = amat[static_cast<size_t>(i)][static_cast<size_t>(j)](x);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = a_val[i][j];
                for (int k = 0; k < j; ++k) s -= a_chol[i][k] * a_chol[j][k];
                if (i == j) {
                    a_chol[i][i] = s > 0 ? std::sqrt(s) : 0.0;
                } else {
                    a_chol[i][j] = a_chol[j][j] > 0 ? s / a_chol[j][j] : 0.0;
                }
            }
        }
        double noise[4];
        for (int i = 0; i < n; ++i) noise[i] = rng.next_normal();
        double next[4];
        for (int i = 0; i < n; ++i) {
            double diff = 0;
            for (int j = 0; j <= i; ++j) diff += a_chol[i][j] * noise[j];
            next[i] = x[i] + drift[static_cast<size_t>(i)](x) * dt + diff * sqdt;
        }
        double norm2 = 0;
        for (int i = 0; i < n; ++i) {
            x[i] = next[i];
            norm2 += x[i] * x[i];
        }
        if (norm2 > 1e16) {
            out.diverged = true;
            out.divergence_time = dt * static_cast<double>(step + 1);
            return out;
        }
        if (step >= burn_steps) {
            batch_acc += fc(x);
            if (++batch_count == batch_len) {
                batch_means.push_back(batch_acc / static_cast<double>(batch_len));
                batch_acc = 0;
                batch_count = 0;
            }
        }
    }

    if (batch_means.empty()) throw std::invalid_argument("simulate_time_average: horizon too short");
    double mean = 0;
    for (double b : batch_means) mean += b;
    mean /= static_cast<double>(batch_means.size());
    double var = 0;
    for (double b : batch_means) var += (b - mean) * (b - mean);
    var /= std::max<double>(1.0, static_cast<double>(batch_means.size()) - 1.0);

    out.mean = mean;
    out.standard_error = std::sqrt(var / static_cast<double>(batch_means.size()));
    out.batches = static_cast<long>(batch_means.size());
    return out;
}

// ---------------------------------------------------------------------------
// Posterior inference summary
// ---------------------------------------------------------------------------

struct PosteriorSummary {
    std::array<BoundPair, 3> mean_bounds;
    BoundPair second_moment;      // bounds on p1^2 + p2^2 + p3^2
    double total_variance_upper = 0.0;
    int degree = 0;
};

// Mean bounds per parameter and the upper bound on the total posterior
// variance: eta(|p|^2) minus the certain lower bound on each squared mean.
inline PosteriorSummary posterior_bounds(const Polynomial& potential, int d,
                                         const SolverSettings& settings = {}) {
    SdeModel model = build_langevin(potential);
    PosteriorSummary out;
    out.degree = d;
    Polynomial sumsq(3);
    for (int i = 0; i < 3; ++i) {
        out.mean_bounds[static_cast<size_t>(i)] =
            lower_and_upper(assemble_outer(model, Polynomial::variable(3, i), d), settings);
        sumsq += Polynomial::variable(3, i) * Polynomial::variable(3, i);
    }
    out.second_moment = lower_and_upper(assemble_outer(model, sumsq, d), settings);

    double var_upper = out.second_moment.eta();
    for (const auto& mb : out.mean_bounds) {
        double lo = mb.rho(), hi = mb.eta();
        double sq_floor = (lo <= 0.0 && 0.0 <= hi) ? 0.0 : std::min(lo * lo, hi * hi);
        var_upper -= sq_floor;
    }
    out.total_variance_upper = var_upper;
    return out;
}

// Tensor-grid quadrature of moments of the density e^{v} over a whitened box
// around the mode; used as the independent posterior oracle.
struct DensityMoments {
    std::array<double, 3> mean{};
    double second_moment_sum = 0.0;  // E|p|^2
    double total_variance = 0.0;
};

inline DensityMoments density_moments_3d(const Polynomial& v, long grid = 160) {
    if (v.num_vars() != 3) throw std::invalid_argument("density_moments_3d: need 3 variables");

    // Newton iteration to the mode
    std::array<Polynomial, 3> grad;
    std::array<std::array<Polynomial, 3>, 3> hess;
    for (int i = 0; i < 3; ++i) grad[static_cast<size_t>(i)] = v.differentiate(i);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            hess[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                grad[static_cast<size_t>(i)].differentiate(j);

    Eigen::Vector3d mode(0.5, 1.5, 1.0);
    for (int it = 0; it < 100; ++it) {
        std::vector<double> p{mode(0), mode(1), mode(2)};
        Eigen::Vector3d g;
        Eigen::Matrix3d h;
        for (int i = 0; i < 3; ++i) {
            g(i) = grad[static_cast<size_t>(i)].evaluate_double(p);
            for (int j = 0; j < 3; ++j)
                h(i, j) = hess[static_cast<size_t>(i)][static_cast<size_t>(j)].evaluate_double(p);
        }
        Eigen::Vector3d step = h.fullPivLu().solve(g);
        mode -= step;
        if (step.norm() < 1e-13) break;
    }

    std::vector<double> pm{mode(0), mode(1), mode(2)};
    Eigen::Matrix3d h;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            h(i, j) = hess[static_cast<size_t>(i)][static_cast<size_t>(j)].evaluate_double(pm);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(-h);
    Eigen::Vector3d scale = es.eigenvalues().cwiseMax(1e-8).cwiseSqrt().cwiseInverse();
    Eigen::Matrix3d axes = es.eigenvectors() * scale.asDiagonal();
    const double v0 = v.evaluate_double(pm);
    const double half = 10.0;  // +-10 whitened standard deviations

    auto integrate = [&](long m) {
        // composite Simpson weights in each axis
        std::vector<double> w(static_cast<size_t>(m) + 1);
        for (long i = 0; i <= m; ++i) w[static_cast<size_t>(i)] = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double hstep = 2.0 * half / static_cast<double>(m);
        double mass = 0;
        std::array<double, 3> m1{};
        double m2 = 0;
        std::array<double, 3> m2v{};
        for (long i = 0; i <= m; ++i)
            for (long j = 0; j <= m; ++j)
                for (long k = 0; k <= m; ++k) {
                    Eigen::Vector3d t(-half + hstep * static_cast<double>(i),
                                      -half + hstep * static_cast<double>(j),
                                      -half + hstep * static_cast<double>(k));
                    Eigen::Vector3d p = mode + axes * t;
                    std::vector<double> pv{p(0), p(1), p(2)};
                    double weight = w[static_cast<size_t>(i)] * w[static_cast<size_t>(j)] *
                                    w[static_cast<size_t>(k)];
                    double dens = std::exp(v.evaluate_double(pv) - v0) * weight;
                    mass += dens;
                    for (int c = 0; c < 3; ++c) {
                        m1[static_cast<size_t>(c)] += dens * p(c);
                        m2v[static_cast<size_t>(c)] += dens * p(c) * p(c);
                    }
                    m2 += dens * p.squaredNorm();
                }
        DensityMoments dm;
        for (int c = 0; c < 3; ++c) {
            dm.mean[static_cast<size_t>(c)] = m1[static_cast<size_t>(c)] / mass;
            dm.total_variance += m2v[static_cast<size_t>(c)] / mass -
                                 (m1[static_cast<size_t>(c)] / mass) * (m1[static_cast<size_t>(c)] / mass);
        }
        dm.second_moment_sum = m2 / mass;
        return dm;
    };

    DensityMoments coarse = integrate(grid);
    DensityMoments fine = integrate(grid * 2);
    double drift_check = 0;
    for (int c = 0; c < 3; ++c)
        drift_check = std::max(drift_check, std::abs(fine.mean[static_cast<size_t>(c)] -
                                                     coarse.mean[static_cast<size_t>(c)]));
    if (drift_check > 1e-6)
        throw std::runtime_error("density_moments_3d: quadrature not Richardson-stable");
    return fine;
}

}  // namespace momentbound
