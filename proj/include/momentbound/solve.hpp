#pragma once

#include "momentbound/conic.hpp"
#include "momentbound/sdp.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace momentbound {

// Certified interval around the stationary average: rho (lower) and eta
// (upper), with full solver outcomes and the fingerprint of the problem that
// produced them.
struct BoundPair {
    SolveOutcome lower;
    SolveOutcome upper;
    int degree = 0;
    std::string fingerprint;

    double rho() const {
        return lower.status == SolveStatus::Unbounded ? -std::numeric_limits<double>::infinity()
                                                      : lower.value;
    }
    double eta() const {
        return upper.status == SolveStatus::Unbounded ? std::numeric_limits<double>::infinity()
                                                      : upper.value;
    }
};

namespace detail {

// Exact Gauss-Jordan elimination of the equality rows. Produces a particular
// solution y_p (free variables at zero) and a nullspace basis, or flags the
// system as inconsistent. Pivot rows are chosen by sparsity to limit fill-in.
struct Elimination {
    bool infeasible = false;
    std::vector<Rat> particular;        // length n
    std::vector<std::vector<Rat>> nullspace;  // columns, each length n
};

inline Elimination eliminate_equalities(const ConicProblem& cp) {
    const long n = cp.num_vars;
    std::vector<std::map<long, Rat>> rows;
    std::vector<Rat> rhs;
    rows.reserve(cp.equalities.size());
    for (const auto& r : cp.equalities) {
        rows.push_back(r.coeffs);
        rhs.push_back(r.rhs);
    }

    std::vector<long> pivot_col;  // per reduced row
    std::vector<bool> used(rows.size(), false);
    std::vector<size_t> pivot_row;
    std::vector<char> is_pivot(static_cast<size_t>(n), 0);

    for (long col = 0; col < n; ++col) {
        size_t best = rows.size();
        size_t best_nnz = SIZE_MAX;
        for (size_t r = 0; r < rows.size(); ++r) {
            if (used[r]) continue;
            auto it = rows[r].find(col);
            if (it == rows[r].end() || it->second == 0) continue;
            if (rows[r].size() < best_nnz) {
                best_nnz = rows[r].size();
                best = r;
            }
        }
        if (best == rows.size()) continue;

        used[best] = true;
        pivot_row.push_back(best);
        pivot_col.push_back(col);
        is_pivot[static_cast<size_t>(col)] = 1;

        Rat inv = Rat(1) / rows[best].at(col);
        if (inv != 1) {
            for (auto& [c, v] : rows[best]) v *= inv;
            rhs[best] *= inv;
        }
        for (size_t r = 0; r < rows.size(); ++r) {
            if (r == best) continue;
            auto it = rows[r].find(col);
            if (it == rows[r].end() || it->second == 0) continue;
            Rat factor = it->second;
            for (const auto& [c, v] : rows[best]) {
                auto jt = rows[r].find(c);
                if (jt == rows[r].end()) {
                    rows[r][c] = -factor * v;
                } else {
                    jt->second -= factor * v;
                    if (jt->second == 0) rows[r].erase(jt);
                }
            }
            rhs[r] -= factor * rhs[best];
        }
    }

    Elimination out;
    for (size_t r = 0; r < rows.size(); ++r) {
        if (!used[r] && rows[r].empty() && rhs[r] != 0) {
            out.infeasible = true;
            return out;
        }
    }

    out.particular.assign(static_cast<size_t>(n), Rat(0));
    for (size_t k = 0; k < pivot_row.size(); ++k)
        out.particular[static_cast<size_t>(pivot_col[k])] = rhs[pivot_row[k]];

    for (long col = 0; col < n; ++col) {
        if (is_pivot[static_cast<size_t>(col)]) continue;
        std::vector<Rat> z(static_cast<size_t>(n), Rat(0));
        z[static_cast<size_t>(col)] = 1;
        for (size_t k = 0; k < pivot_row.size(); ++k) {
            auto it = rows[pivot_row[k]].find(col);
            if (it != rows[pivot_row[k]].end())
                z[static_cast<size_t>(pivot_col[k])] = -it->second;
        }
        // column rescaling keeps the double conversion well ranged
        Rat biggest(0);
        for (const auto& v : z)
            if (abs(v) > biggest) biggest = abs(v);
        if (biggest > 1)
            for (auto& v : z) v /= biggest;
        out.nullspace.push_back(std::move(z));
    }
    return out;
}

// Affine PSD maps restricted to the equality subspace, in floating point.
struct ReducedLmi {
    LmiProblem lmi;
    double objective_offset = 0.0;
    bool equalities_infeasible = false;
};

inline ReducedLmi build_reduced(const ConicProblem& cp) {
    ReducedLmi out;
    Elimination elim = eliminate_equalities(cp);
    if (elim.infeasible) {
        out.equalities_infeasible = true;
        return out;
    }
    const long n = cp.num_vars;
    const int m = static_cast<int>(elim.nullspace.size());

    // orthonormalize the nullspace basis for a well-scaled parametrization
    Eigen::MatrixXd q;
    if (m > 0) {
        Eigen::MatrixXd z(n, m);
        for (int j = 0; j < m; ++j)
            for (long i = 0; i < n; ++i) z(i, j) = to_double(elim.nullspace[static_cast<size_t>(j)][static_cast<size_t>(i)]);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
        q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    }

    std::vector<double> yp(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) yp[static_cast<size_t>(i)] = to_double(elim.particular[static_cast<size_t>(i)]);

    out.lmi.num_vars = m;
    out.lmi.cost = Eigen::VectorXd::Zero(m);
    for (const auto& [idx, c] : cp.objective) {
        double cd = to_double(c);
        out.objective_offset += cd * yp[static_cast<size_t>(idx)];
        for (int j = 0; j < m; ++j) out.lmi.cost(j) += cd * q(idx, j);
    }

    for (const auto& blk : cp.psd_blocks) {
        Eigen::MatrixXd f0 = Eigen::MatrixXd::Zero(blk.side, blk.side);
        std::vector<Eigen::MatrixXd> fj(static_cast<size_t>(m),
                                        Eigen::MatrixXd::Zero(blk.side, blk.side));
        for (const auto& [rc, form] : blk.entries) {
            double v0 = 0.0;
            Eigen::VectorXd vj = Eigen::VectorXd::Zero(m);
            for (const auto& [idx, c] : form) {
                double cd = to_double(c);
                v0 += cd * yp[static_cast<size_t>(idx)];
                if (m > 0) vj += cd * q.row(idx).transpose();
            }
            f0(rc.first, rc.second) = v0;
            f0(rc.second, rc.first) = v0;
            for (int j = 0; j < m; ++j) {
                fj[static_cast<size_t>(j)](rc.first, rc.second) = vj(j);
                fj[static_cast<size_t>(j)](rc.second, rc.first) = vj(j);
            }
        }

        // Facial reduction: variety and piece-equality rows force a common
        // nullspace on every matrix of the pencil; restricting to its
        // complement restores strict feasibility for the interior-point
        // method. Exact on the equality subspace, detected numerically.
        Eigen::MatrixXd gram = f0.transpose() * f0;
        for (const auto& f : fj) gram += f.transpose() * f;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
        // structural nulls sit at the eigensolver's noise floor (~eps * lmax)
        int keep = 0;
        for (int i = 0; i < blk.side; ++i)
            if (es.eigenvalues()(i) > 1e-11 * lmax) ++keep;
        if (keep == 0) continue;  // block identically zero on the subspace
        if (keep < blk.side) {
            Eigen::MatrixXd w = es.eigenvectors().rightCols(keep);
            f0 = (w.transpose() * f0 * w).eval();
            for (auto& f : fj) f = (w.transpose() * f * w).eval();
        }
        out.lmi.constant.push_back(std::move(f0));
        out.lmi.coeff.push_back(std::move(fj));
    }
    return out;
}

}  // namespace detail

// Solves both optimization senses of the assembled relaxation. The lower
// bound minimizes <y, f> over the spectrahedron, the upper bound maximizes.
inline BoundPair lower_and_upper(const ConicProblem& cp, const SolverSettings& settings = {},
                                 int degree = 0) {
    BoundPair out;
    out.degree = degree;
    out.fingerprint = fingerprint(cp);

    detail::ReducedLmi red = detail::build_reduced(cp);
    if (red.equalities_infeasible) {
        out.lower.status = SolveStatus::Infeasible;
        out.upper.status = SolveStatus::Infeasible;
        return out;
    }

    InteriorPointSolver solver(settings);
    out.lower = solver.minimize(red.lmi);
    if (out.lower.has_value()) out.lower.value += red.objective_offset;

    LmiProblem neg = red.lmi;
    neg.cost = -neg.cost;
    out.upper = solver.minimize(neg);
    if (out.upper.has_value()) out.upper.value = red.objective_offset - out.upper.value;
    if (out.upper.status == SolveStatus::Unbounded)
        out.upper.value = std::numeric_limits<double>::infinity();
    return out;
}

inline BoundPair lower_and_upper(const MomentProblem& mp, const SolverSettings& settings = {}) {
    return lower_and_upper(ConicProblem::from_moment_problem(mp), settings, mp.degree);
}

// Single-sense entry point used by tests and tools.
enum class Sense { Minimize, Maximize };

inline SolveOutcome solve(const ConicProblem& cp, Sense sense, const SolverSettings& settings = {}) {
    detail::ReducedLmi red = detail::build_reduced(cp);
    if (red.equalities_infeasible) {
        SolveOutcome out;
        out.status = SolveStatus::Infeasible;
        return out;
    }
    InteriorPointSolver solver(settings);
    if (sense == Sense::Minimize) {
        SolveOutcome out = solver.minimize(red.lmi);
        if (out.has_value()) out.value += red.objective_offset;
        if (out.status == SolveStatus::Unbounded)
            out.value = -std::numeric_limits<double>::infinity();
        return out;
    }
    LmiProblem neg = red.lmi;
    neg.cost = -neg.cost;
    SolveOutcome out = solver.minimize(neg);
    if (out.has_value()) out.value = red.objective_offset - out.value;
    if (out.status == SolveStatus::Unbounded) out.value = std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace momentbound
