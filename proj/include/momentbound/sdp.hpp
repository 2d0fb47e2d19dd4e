#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace momentbound {

inline constexpr const char* kSolverBackend = "mbipm-1.0";

enum class SolveStatus { Optimal, Unbounded, Infeasible, Inaccurate, NumericalFailure };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Inaccurate: return "inaccurate";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "?";
}

struct SolverSettings {
    double tolerance = 1e-8;
    // Residual band above tolerance that still counts as a usable answer.
    double inaccurate_tolerance = 1e-5;
    // Objective magnitude treated as divergence while feasibility residuals
    // keep shrinking; documented fallback for runs without a certificate.
    double unbounded_threshold = 1e10;
    long max_iterations = 200000;  // cap on IPM iterations (converges in tens)
    double step_fraction = 0.98;
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalFailure;
    double value = std::numeric_limits<double>::quiet_NaN();
    double primal_residual = std::numeric_limits<double>::infinity();
    double dual_residual = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    long iterations = 0;
    double seconds = 0.0;
    std::string backend = kSolverBackend;

    bool has_value() const {
        return status == SolveStatus::Optimal || status == SolveStatus::Inaccurate;
    }
};

// Linear matrix inequality program
//     minimize  c^T w   subject to   F0_k + sum_j w_j Fj_k  PSD  per block k,
// solved as the dual side of the standard SDP pair by an infeasible-start
// Mehrotra predictor-corrector in the Nesterov-Todd scaling.
struct LmiProblem {
    int num_vars = 0;
    Eigen::VectorXd cost;                             // length num_vars
    std::vector<Eigen::MatrixXd> constant;            // F0 per block
    std::vector<std::vector<Eigen::MatrixXd>> coeff;  // [block][var]
};

class InteriorPointSolver {
public:
    explicit InteriorPointSolver(SolverSettings settings = {}) : opt_(settings) {}

    SolveOutcome minimize(const LmiProblem& prob) const {
        auto t0 = std::chrono::steady_clock::now();
        SolveOutcome out = run(prob);
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

private:
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;

    SolverSettings opt_;

    static double frob_inner(const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum(); }

    static long double frob_inner_l(const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>& a,
                                    const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>& b) {
        return a.cwiseProduct(b).sum();
    }

    // Largest step alpha keeping Lambda + alpha * D positive semidefinite for
    // diagonal Lambda > 0.
    static long double max_step_scaled(const Eigen::Matrix<long double, Eigen::Dynamic, 1>& lambda,
                                       const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>& d) {
        Eigen::Matrix<long double, Eigen::Dynamic, 1> inv_sqrt = lambda.cwiseSqrt().cwiseInverse();
        Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> m =
            inv_sqrt.asDiagonal() * d * inv_sqrt.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>> es(
            m, Eigen::EigenvaluesOnly);
        long double lmin = es.eigenvalues().minCoeff();
        if (lmin >= -1e-18L) return std::numeric_limits<long double>::infinity();
        return -1.0L / lmin;
    }

    SolveOutcome run(const LmiProblem& in) const {
        // Equilibrate: unit Frobenius norm per coefficient matrix and a unit
        // objective scale; both are undone on the reported value.
        LmiProblem prob = in;
        const size_t nblocks = prob.constant.size();
        for (int j = 0; j < prob.num_vars; ++j) {
            double norm = 0.0;
            for (size_t k = 0; k < nblocks; ++k) norm = std::hypot(norm, prob.coeff[k][j].norm());
            if (norm > 1e-300) {
                for (size_t k = 0; k < nblocks; ++k) prob.coeff[k][j] /= norm;
                prob.cost(j) /= norm;
            }
        }
        double obj_scale = prob.num_vars > 0 ? prob.cost.cwiseAbs().maxCoeff() : 0.0;
        if (obj_scale <= 1e-300) obj_scale = 1.0;
        prob.cost /= obj_scale;

        SolveOutcome out = run_scaled(prob);
        if (out.has_value()) out.value *= obj_scale;
        return out;
    }

    // The iteration runs in extended precision: near convergence the NT
    // scaling products amplify roundoff by the condition of W, and the extra
    // mantissa bits keep the primal residual from regressing before the
    // duality gap reaches tolerance.
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

    SolveOutcome run_scaled(const LmiProblem& prob_d) const {
        const int m = prob_d.num_vars;
        const size_t nb = prob_d.constant.size();
        SolveOutcome out;

        struct LProblem {
            LVec cost;
            std::vector<LMat> constant;
            std::vector<std::vector<LMat>> coeff;
        } prob;
        prob.cost = prob_d.cost.cast<long double>();
        prob.constant.reserve(nb);
        prob.coeff.resize(nb);
        for (size_t k = 0; k < nb; ++k) {
            prob.constant.push_back(prob_d.constant[k].cast<long double>());
            prob.coeff[k].reserve(static_cast<size_t>(m));
            for (int j = 0; j < m; ++j)
                prob.coeff[k].push_back(prob_d.coeff[k][j].cast<long double>());
        }

        if (m == 0) {
            double worst = 0.0;
            for (const auto& f : prob_d.constant) {
                if (f.rows() == 0) continue;
                Eigen::SelfAdjointEigenSolver<Mat> es(f, Eigen::EigenvaluesOnly);
                worst = std::min(worst,
                                 es.eigenvalues().minCoeff() / (1.0 + f.cwiseAbs().maxCoeff()));
            }
            out.iterations = 0;
            out.primal_residual = out.dual_residual = out.gap = 0.0;
            if (worst >= -1e-7) {
                out.status = SolveStatus::Optimal;
                out.value = 0.0;
            } else {
                out.status = SolveStatus::Infeasible;
            }
            return out;
        }

        // Standard-form data: C = F0, A_j = -F_j, b = -c, so
        //   (P) min <C,X> s.t. <A_j,X> = b_j, X PSD
        //   (D) max b^T w s.t. C - sum_j w_j A_j = S PSD,  S = F0 + sum w_j F_j.
        const LVec b = -prob.cost;
        long double norm_b = 1.0L + b.norm();
        long double norm_c = 1.0L;
        long double max_coeff_norm = 1.0L;
        long kdim = 0;
        for (size_t k = 0; k < nb; ++k) {
            kdim += prob.constant[k].rows();
            norm_c = std::max(norm_c, prob.constant[k].norm());
            for (int j = 0; j < m; ++j)
                max_coeff_norm = std::max(max_coeff_norm, prob.coeff[k][j].norm());
        }
        if (kdim == 0) {
            out.status = SolveStatus::Optimal;
            out.value = 0.0;
            out.primal_residual = out.dual_residual = out.gap = 0.0;
            return out;
        }

        long double sqk = std::sqrt(static_cast<long double>(kdim));
        long double xi = std::max({10.0L, sqk, sqk * b.cwiseAbs().maxCoeff() / max_coeff_norm});
        long double eta = std::max({10.0L, sqk, norm_c, max_coeff_norm});

        std::vector<LMat> X(nb), S(nb);
        for (size_t k = 0; k < nb; ++k) {
            long s = prob.constant[k].rows();
            X[k] = xi * LMat::Identity(s, s);
            S[k] = eta * LMat::Identity(s, s);
        }
        LVec w = LVec::Zero(m);

        long double best_err = std::numeric_limits<long double>::infinity();
        long double best_dobj = std::numeric_limits<long double>::quiet_NaN();
        long last_improvement = 0;
        const long max_iter = std::min<long>(opt_.max_iterations, 500);
        long double tau = opt_.step_fraction;
        std::vector<LMat> bestX, bestS;
        LVec bestw;
        int recoveries = 0;

        // Constant Gram of the coefficient matrices; used to project the
        // primal iterate back onto A(X) = b, cancelling the roundoff the
        // scaled step reconstruction injects each iteration.
        LMat gram = LMat::Zero(m, m);
        for (size_t k = 0; k < nb; ++k)
            for (int i = 0; i < m; ++i)
                for (int j = i; j < m; ++j) {
                    long double v = frob_inner_l(prob.coeff[k][i], prob.coeff[k][j]);
                    gram(i, j) += v;
                    if (i != j) gram(j, i) += v;
                }
        Eigen::LLT<LMat> gram_llt(gram);
        const bool can_project = gram_llt.info() == Eigen::Success;

        for (long iter = 0; iter < max_iter; ++iter) {
            LVec rp = b;
            std::vector<LMat> rd(nb);
            long double pobj = 0.0, dobj = b.dot(w), mu = 0.0;
            for (size_t k = 0; k < nb; ++k) {
                const LMat& c = prob.constant[k];
                rd[k] = c - S[k];
                for (int j = 0; j < m; ++j) {
                    const LMat& f = prob.coeff[k][j];  // F_j = -A_j
                    rp(j) += frob_inner_l(f, X[k]);
                    rd[k] += w(j) * f;
                }
                pobj += frob_inner_l(c, X[k]);
                mu += frob_inner_l(X[k], S[k]);
            }
            mu /= static_cast<long double>(kdim);

            long double rel_p = rp.norm() / norm_b;
            long double rel_d = 0.0;
            for (size_t k = 0; k < nb; ++k) rel_d += rd[k].squaredNorm();
            rel_d = std::sqrt(rel_d) / (1.0L + norm_c);
            long double relgap = std::abs(pobj - dobj) / (1.0L + std::abs(pobj) + std::abs(dobj));
            long double err = std::max({rel_p, rel_d, relgap});

            out.iterations = iter;
            if (err < best_err * 0.99) last_improvement = iter;
            if (err < best_err) {
                best_err = err;
                best_dobj = dobj;
                bestX = X;
                bestS = S;
                bestw = w;
            }
            if (std::getenv("MB_IPM_TRACE")) {
                long double xn = 0, sn = 0;
                for (size_t k = 0; k < nb; ++k) {
                    xn += X[k].norm();
                    sn += S[k].norm();
                }
                std::fprintf(stderr,
                             "it=%3ld mu=%9.2Le rp=%9.2Le rd=%9.2Le gap=%9.2Le pobj=%12.5Le "
                             "dobj=%12.5Le |X|=%8.1Le |S|=%8.1Le |w|=%8.1Le\n",
                             iter, mu, rel_p, rel_d, relgap, pobj, dobj, xn, sn, w.norm());
            }

            if (err <= static_cast<long double>(opt_.tolerance)) {
                out.status = SolveStatus::Optimal;
                out.value = static_cast<double>(-dobj);  // min c^T w = -max b^T w
                out.primal_residual = static_cast<double>(rel_p);
                out.dual_residual = static_cast<double>(rel_d);
                out.gap = static_cast<double>(relgap);
                return out;
            }
            // Divergence handling: an improving-ray certificate when one can
            // be read off the normalized iterate, with the documented
            // magnitude threshold as fallback.
            long double wnorm = w.norm();
            if (dobj > 0 && wnorm > 1e4L) {
                // (mat(w) + S)/|w| -> 0 with b^T w/|w| bounded away from zero
                // certifies that the dual improves along the ray w, i.e. (P)
                // is infeasible. The objective clause separates a genuine ray
                // from an unbounded optimal face drifting at fixed value.
                long double ray_res = 0;
                for (size_t k = 0; k < nb; ++k)
                    ray_res += (prob.constant[k] - rd[k]).squaredNorm();
                ray_res = std::sqrt(ray_res) / wnorm;
                if (ray_res <= 1e-8L * (1.0L + norm_c) && dobj / wnorm >= 1e-4L * norm_b) {
                    out.status = SolveStatus::Unbounded;
                    out.value = -std::numeric_limits<double>::infinity();
                    out.primal_residual = static_cast<double>(rel_p);
                    out.dual_residual = static_cast<double>(rel_d);
                    out.gap = static_cast<double>(relgap);
                    return out;
                }
            }
            long double xnorm = 0;
            for (size_t k = 0; k < nb; ++k) xnorm += X[k].norm();
            if (pobj < 0 && xnorm > 1e6L) {
                // A(X)/|X| -> 0 with <C, X>/|X| < 0 is an improving ray for
                // the primal, i.e. the LMI system is infeasible.
                long double ax_res = (b - rp).norm() / xnorm;
                if (ax_res <= 1e-7L * (1.0L + norm_b) && pobj / xnorm <= -1e-7L) {
                    out.status = SolveStatus::Infeasible;
                    out.primal_residual = static_cast<double>(rel_p);
                    out.dual_residual = static_cast<double>(rel_d);
                    out.gap = static_cast<double>(relgap);
                    return out;
                }
            }
            if (dobj > static_cast<long double>(opt_.unbounded_threshold) && rel_d <= 1e-4L) {
                out.status = SolveStatus::Unbounded;
                out.value = -std::numeric_limits<double>::infinity();
                out.primal_residual = static_cast<double>(rel_p);
                out.dual_residual = static_cast<double>(rel_d);
                out.gap = static_cast<double>(relgap);
                return out;
            }
            if (pobj < -static_cast<long double>(opt_.unbounded_threshold) && rel_p <= 1e-4L) {
                out.status = SolveStatus::Infeasible;
                out.primal_residual = static_cast<double>(rel_p);
                out.dual_residual = static_cast<double>(rel_d);
                out.gap = static_cast<double>(relgap);
                return out;
            }
            bool diverging = std::abs(dobj) > 1e5L || std::abs(pobj) > 1e5L;
            if (!diverging && iter - last_improvement > 120) break;  // stalled
            if (err > 50.0L * best_err && best_err < 1e-3L) {
                // The late path can destabilize once the scaling matrices get
                // singular; restart from the best iterate with progressively
                // shorter steps before giving up.
                if (recoveries >= 3) break;
                ++recoveries;
                X = bestX;
                S = bestS;
                w = bestw;
                tau *= 0.7L;
                last_improvement = iter;
                continue;
            }

            // Nesterov-Todd scaling per block: R with R^T S R = R^-1 X R^-T
            // = diag(lambda); W = R R^T.
            std::vector<LMat> R(nb), W(nb);
            std::vector<LVec> lambda(nb);
            bool fact_ok = true;
            for (size_t k = 0; k < nb; ++k) {
                Eigen::LLT<LMat> lltX(X[k]), lltS(S[k]);
                if (lltX.info() != Eigen::Success || lltS.info() != Eigen::Success) {
                    fact_ok = false;
                    break;
                }
                LMat lX = lltX.matrixL();
                LMat lS = lltS.matrixL();
                Eigen::JacobiSVD<LMat> svd(lS.transpose() * lX,
                                           Eigen::ComputeFullU | Eigen::ComputeFullV);
                LVec sv = svd.singularValues();
                if (sv.minCoeff() <= 0) {
                    fact_ok = false;
                    break;
                }
                LVec inv_sqrt = sv.cwiseSqrt().cwiseInverse();
                R[k] = lX * svd.matrixV() * inv_sqrt.asDiagonal();
                W[k] = R[k] * R[k].transpose();
                lambda[k] = sv;
            }
            if (!fact_ok) break;

            // Schur complement M_ij = sum_k <F_i, W F_j W>
            LMat schur = LMat::Zero(m, m);
            for (size_t k = 0; k < nb; ++k) {
                std::vector<LMat> wfw(static_cast<size_t>(m));
                for (int j = 0; j < m; ++j) wfw[static_cast<size_t>(j)] = W[k] * prob.coeff[k][j] * W[k];
                for (int i = 0; i < m; ++i) {
                    for (int j = i; j < m; ++j) {
                        long double v = frob_inner_l(prob.coeff[k][i], wfw[static_cast<size_t>(j)]);
                        schur(i, j) += v;
                        if (i != j) schur(j, i) += v;
                    }
                }
            }

            Eigen::LDLT<LMat> ldlt;
            long double ridge = 0.0;
            for (int attempt = 0; attempt < 4; ++attempt) {
                LMat reg = schur;
                if (ridge > 0) reg += ridge * LMat::Identity(m, m);
                ldlt.compute(reg);
                if (ldlt.info() == Eigen::Success && ldlt.isPositive()) break;
                ridge = ridge == 0.0 ? 1e-18L * (1.0L + schur.trace() / m) : ridge * 100;
            }
            if (ldlt.info() != Eigen::Success) break;

            auto solve_refined = [&](const LVec& rhs) {
                LVec x = ldlt.solve(rhs);
                long double best_resid = (rhs - schur * x).norm();
                for (int round = 0; round < 3; ++round) {
                    if (best_resid <= 1e-18L * (1.0L + rhs.norm())) break;
                    LVec candidate = x + ldlt.solve(rhs - schur * x);
                    long double resid = (rhs - schur * candidate).norm();
                    if (resid >= best_resid) break;  // ridge dominates, stop
                    x = candidate;
                    best_resid = resid;
                }
                return x;
            };

            // rhs(D) = rp - A(R D R^T) + A(W Rd W) with A = -F
            auto assemble_rhs = [&](const std::vector<LMat>& dmat) {
                LVec rhs = rp;
                for (size_t k = 0; k < nb; ++k) {
                    LMat base = R[k] * dmat[k] * R[k].transpose() - W[k] * rd[k] * W[k];
                    for (int j = 0; j < m; ++j) rhs(j) += frob_inner_l(prob.coeff[k][j], base);
                }
                return rhs;
            };

            // predictor: D = -Lambda
            std::vector<LMat> dmat(nb);
            for (size_t k = 0; k < nb; ++k) {
                dmat[k] = LMat::Zero(lambda[k].size(), lambda[k].size());
                dmat[k].diagonal() = -lambda[k];
            }
            LVec dw = solve_refined(assemble_rhs(dmat));

            std::vector<LMat> dS(nb), dX(nb), dXs(nb), dSs(nb);
            auto finish_direction = [&](const LVec& dwv, const std::vector<LMat>& dm) {
                for (size_t k = 0; k < nb; ++k) {
                    dS[k] = rd[k];
                    for (int j = 0; j < m; ++j) dS[k] += dwv(j) * prob.coeff[k][j];
                    LMat dstilde = R[k].transpose() * dS[k] * R[k];
                    LMat dxtilde = dm[k] - dstilde;
                    dX[k] = R[k] * dxtilde * R[k].transpose();
                    dX[k] = 0.5 * (dX[k] + dX[k].transpose());
                    dXs[k] = 0.5 * (dxtilde + dxtilde.transpose());
                    dSs[k] = 0.5 * (dstilde + dstilde.transpose());
                }
            };
            finish_direction(dw, dmat);

            long double ap = 1.0, ad = 1.0;
            for (size_t k = 0; k < nb; ++k) {
                ap = std::min(ap, max_step_scaled(lambda[k], dXs[k]));
                ad = std::min(ad, max_step_scaled(lambda[k], dSs[k]));
            }

            long double mu_aff = 0.0;
            for (size_t k = 0; k < nb; ++k)
                mu_aff += frob_inner_l(X[k] + std::min(1.0L, ap) * dX[k],
                                       S[k] + std::min(1.0L, ad) * dS[k]);
            mu_aff /= static_cast<long double>(kdim);
            long double sigma = std::pow(std::max(0.0L, std::min(1.0L, mu_aff / mu)), 3);

            // corrector: D = L^-1(sigma mu I - Lambda^2 - sym(dX~ dS~))
            for (size_t k = 0; k < nb; ++k) {
                const LVec& lv = lambda[k];
                LMat cross = 0.5L * (dXs[k] * dSs[k] + dSs[k] * dXs[k]);
                LMat rc = -cross;
                rc.diagonal() += sigma * mu * LVec::Ones(lv.size());
                rc.diagonal() -= lv.cwiseProduct(lv);
                for (long i = 0; i < lv.size(); ++i)
                    for (long j = 0; j < lv.size(); ++j) rc(i, j) = 2.0L * rc(i, j) / (lv(i) + lv(j));
                dmat[k] = rc;
            }
            dw = solve_refined(assemble_rhs(dmat));
            finish_direction(dw, dmat);

            ap = std::numeric_limits<long double>::infinity();
            ad = std::numeric_limits<long double>::infinity();
            for (size_t k = 0; k < nb; ++k) {
                ap = std::min(ap, max_step_scaled(lambda[k], dXs[k]));
                ad = std::min(ad, max_step_scaled(lambda[k], dSs[k]));
            }
            ap = std::min(1.0L, tau * ap);
            ad = std::min(1.0L, tau * ad);

            auto backtrack_pd = [&](std::vector<LMat>& base, std::vector<LMat>& dir,
                                    long double& alpha) {
                for (int backtrack = 0; backtrack < 12; ++backtrack) {
                    bool ok = true;
                    for (size_t k = 0; k < nb && ok; ++k) {
                        Eigen::LLT<LMat> test(base[k] + alpha * dir[k]);
                        if (test.info() != Eigen::Success) ok = false;
                    }
                    if (ok) return;
                    alpha *= 0.7;
                }
                alpha = 0.0;
            };
            backtrack_pd(X, dX, ap);
            backtrack_pd(S, dS, ad);
            if (ap <= 0.0 && ad <= 0.0) break;  // pinned to the boundary

            for (size_t k = 0; k < nb; ++k) {
                X[k] += ap * dX[k];
                S[k] += ad * dS[k];
                X[k] = 0.5L * (X[k] + X[k].transpose());
                S[k] = 0.5L * (S[k] + S[k].transpose());
            }
            w += ad * dw;

            if (can_project) {
                // minimum-norm correction Delta = sum_j mu_j A_j restoring
                // A(X) = b; A_j = -F_j
                LVec resid = b;
                for (size_t k = 0; k < nb; ++k)
                    for (int j = 0; j < m; ++j) resid(j) += frob_inner_l(prob.coeff[k][j], X[k]);
                if (resid.norm() < 1e-4L * norm_b) {
                    LVec muv = gram_llt.solve(resid);
                    std::vector<LMat> candidate = X;
                    for (size_t k = 0; k < nb; ++k)
                        for (int j = 0; j < m; ++j) candidate[k] -= muv(j) * prob.coeff[k][j];
                    bool pd = true;
                    for (size_t k = 0; k < nb && pd; ++k) {
                        Eigen::LLT<LMat> test(candidate[k]);
                        if (test.info() != Eigen::Success) pd = false;
                    }
                    if (pd) X = std::move(candidate);
                }
            }
        }

        out.primal_residual = out.dual_residual = out.gap = static_cast<double>(best_err);
        if (best_err <= static_cast<long double>(opt_.inaccurate_tolerance)) {
            out.status = SolveStatus::Inaccurate;
            out.value = static_cast<double>(-best_dobj);
        } else {
            out.status = SolveStatus::NumericalFailure;
        }
        return out;
    }
};

}  // namespace momentbound
