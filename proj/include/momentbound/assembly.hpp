#pragma once

#include "momentbound/basis.hpp"
#include "momentbound/model.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace momentbound {

// One linear equality <y, c> = rhs over the problem's global variable space.
// Labels record provenance (stationarity alpha, variety (j, alpha), ...).
struct LinearRow {
    std::map<long, Rat> coeffs;
    Rat rhs;
    std::string label;

    void add(long idx, const Rat& c) {
        if (c == 0) return;
        auto [it, inserted] = coeffs.emplace(idx, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) coeffs.erase(it);
        }
    }
};

// Sparse linear form over problem variables; the value of one matrix entry.
using LinearForm = std::vector<std::pair<long, Rat>>;

// A PSD-valued affine map: a symmetric side x side matrix whose entries are
// linear forms in the moment variables. Moment matrices map entry (i,j) to
// the single variable y_{beta_i + beta_j}; localizing matrices map it to the
// shifted combination sum_delta q_delta y_{beta_i + beta_j + delta}.
struct PsdMap {
    int side = 0;
    int side_degree = 0;  // rows/columns are indexed by N^n_{side_degree}
    int block = 0;
    std::string id;
    // upper triangle only (i <= j); (i,j) identified with (j,i)
    std::map<std::pair<int, int>, LinearForm> entries;

    const LinearForm& entry(int i, int j) const {
        static const LinearForm empty;
        if (i > j) std::swap(i, j);
        auto it = entries.find({i, j});
        return it == entries.end() ? empty : it->second;
    }
};

struct Block {
    std::string id;
    MonomialBasis basis;
    long offset = 0;
};

// A single piece (f_i, K_i) of a piecewise polynomial objective. K_i is cut
// out of the ambient variety by equalities p_j and inequalities q_k >= 0.
struct Piece {
    Polynomial f;
    std::vector<Polynomial> equalities;
    std::vector<Polynomial> inequalities;
};

using PiecewiseObjective = std::vector<Piece>;

// Degree-d moment relaxation: measure blocks, equality rows, PSD maps and a
// linear objective. Immutable once assembled; safe to share across solver
// workers.
struct MomentProblem {
    std::vector<Block> blocks;
    std::vector<LinearRow> equalities;
    std::vector<PsdMap> psd_maps;
    std::map<long, Rat> objective;
    int degree = 0;
    std::string description;

    long num_vars() const {
        if (blocks.empty()) return 0;
        return blocks.back().offset + static_cast<long>(blocks.back().basis.size());
    }
};

namespace detail {

inline std::string exp_label(const Exponents& e) {
    std::string s = "(";
    for (size_t i = 0; i < e.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(e[i]);
    }
    return s + ")";
}

// Row <y, coeffs of p> = rhs on one block.
inline LinearRow row_from_polynomial(const Polynomial& p, const MonomialBasis& basis, long offset,
                                     const Rat& rhs, std::string label) {
    LinearRow row;
    row.rhs = rhs;
    row.label = std::move(label);
    for (const auto& [e, c] : p.terms()) row.add(offset + basis.index(e), c);
    return row;
}

}  // namespace detail

inline MonomialBasis basis(int n, int d) { return MonomialBasis(n, d); }

// Stationarity rows <y, A x^alpha> = 0 of the degree-d relaxation.
//
// The row for alpha = 0 is identically zero (A 1 = 0) and is omitted. For a
// general model, rows are indexed by nonconstant alpha in N^n_{d - d_A},
// giving r(d - d_A) - 1 rows. For a model asserting compact support every
// stationary measure has all moments finite, so the relation holds for every
// alpha; all rows whose polynomial A x^alpha fits in the degree-d basis are
// emitted.
inline std::vector<LinearRow> stationarity_rows(const SdeModel& model, int d, long offset = 0) {
    const int n = model.dimension();
    const int da = model.generator_degree();
    MonomialBasis full(n, d);
    std::vector<LinearRow> rows;

    if (model.compact_support()) {
        // On a compact variety pi(g_j h) = 0 holds for every polynomial h, so
        // A x^alpha may be reduced modulo the varieties before checking that
        // the row fits the degree-d basis.
        auto reduce = [&](Polynomial p) {
            bool changed = true;
            while (changed && !p.is_zero()) {
                changed = false;
                for (const auto& g : model.varieties()) {
                    Polynomial r = poly_divmod(p, g).remainder;
                    if (r != p) {
                        p = std::move(r);
                        changed = true;
                    }
                }
            }
            return p;
        };
        for (const auto& alpha : full.tuples()) {
            if (total_degree(alpha) == 0) continue;
            Polynomial h = Polynomial::monomial(n, alpha, Rat(1));
            Polynomial gh = reduce(apply_generator(h, model));
            if (gh.is_zero() || gh.degree() > d) continue;
            rows.push_back(detail::row_from_polynomial(gh, full, offset, Rat(0),
                                                       "stat:" + detail::exp_label(alpha)));
        }
        return rows;
    }

    if (d < da)
        throw std::invalid_argument("stationarity_rows: degree " + std::to_string(d) +
                                    " below generator degree " + std::to_string(da));
    MonomialBasis hb(n, d - da);
    for (const auto& alpha : hb.tuples()) {
        if (total_degree(alpha) == 0) continue;
        Polynomial h = Polynomial::monomial(n, alpha, Rat(1));
        Polynomial gh = apply_generator(h, model);
        rows.push_back(detail::row_from_polynomial(gh, full, offset, Rat(0),
                                                   "stat:" + detail::exp_label(alpha)));
    }
    return rows;
}

// Support rows <y, g x^alpha> = 0 for alpha in N^n_{d - d_g}; r(d - d_g) rows.
inline std::vector<LinearRow> variety_rows(const Polynomial& g, const MonomialBasis& basis,
                                           long offset = 0, const std::string& tag = "var") {
    if (g.is_zero()) throw std::invalid_argument("variety_rows: zero polynomial is degenerate");
    const int d = basis.degree();
    if (g.degree() > d)
        throw std::invalid_argument("variety_rows: deg g exceeds relaxation degree");
    MonomialBasis shifts(basis.dimension(), d - g.degree());
    std::vector<LinearRow> rows;
    rows.reserve(shifts.size());
    for (const auto& alpha : shifts.tuples()) {
        Polynomial shifted = g * Polynomial::monomial(g.num_vars(), alpha, Rat(1));
        rows.push_back(detail::row_from_polynomial(shifted, basis, offset, Rat(0),
                                                   tag + ":" + detail::exp_label(alpha)));
    }
    return rows;
}

// Moment matrix map M_{s(d)}(y): entry (beta, gamma) -> y_{beta + gamma},
// side r(s(d)) with s(d) = floor(d / 2).
inline PsdMap moment_matrix_map(const MonomialBasis& basis, long offset = 0, int block = 0) {
    const int s = basis.degree() / 2;
    MonomialBasis side(basis.dimension(), s);
    PsdMap map;
    map.side = static_cast<int>(side.size());
    map.side_degree = s;
    map.block = block;
    map.id = "moment:" + std::to_string(block);
    for (int i = 0; i < map.side; ++i)
        for (int j = i; j < map.side; ++j) {
            Exponents sum = exp_add(side.tuple(i), side.tuple(j));
            map.entries[{i, j}] = {{offset + basis.index(sum), Rat(1)}};
        }
    return map;
}

// Localizing matrix map M_{s(d - d_q)}(theta_q y) for the shift polynomial q.
inline PsdMap localizing_map(const Polynomial& q, const MonomialBasis& basis, long offset = 0,
                             int block = 0, const std::string& tag = "loc") {
    if (q.is_zero()) throw std::invalid_argument("localizing_map: zero shift polynomial");
    const int d = basis.degree();
    const int dq = q.degree();
    if (dq > d) throw std::invalid_argument("localizing_map: deg q exceeds relaxation degree");
    const int s = (d - dq) / 2;
    MonomialBasis side(basis.dimension(), s);
    PsdMap map;
    map.side = static_cast<int>(side.size());
    map.side_degree = s;
    map.block = block;
    map.id = tag;
    for (int i = 0; i < map.side; ++i)
        for (int j = i; j < map.side; ++j) {
            Exponents bg = exp_add(side.tuple(i), side.tuple(j));
            LinearForm form;
            form.reserve(q.terms().size());
            for (const auto& [delta, qc] : q.terms())
                form.emplace_back(offset + basis.index(exp_add(bg, delta)), qc);
            map.entries[{i, j}] = std::move(form);
        }
    return map;
}

// Single-measure outer approximation of the stationary-average set:
// normalisation y_0 = 1, stationarity rows, variety rows per g_j, and the
// moment matrix constraint, with objective <y, f>.
inline MomentProblem assemble_outer(const SdeModel& model, const Polynomial& f, int d) {
    const int n = model.dimension();
    if (f.num_vars() != n) throw std::invalid_argument("assemble_outer: objective arity mismatch");
    if (d < f.degree())
        throw std::invalid_argument("assemble_outer: degree below objective degree");
    if (!model.compact_support() && d < model.generator_degree())
        throw std::invalid_argument("assemble_outer: degree below generator degree d_A");

    MomentProblem prob;
    prob.degree = d;
    prob.blocks.push_back({"pi", MonomialBasis(n, d), 0});
    const MonomialBasis& basis = prob.blocks[0].basis;

    LinearRow norm;
    norm.rhs = 1;
    norm.label = "norm";
    norm.add(0, Rat(1));
    prob.equalities.push_back(std::move(norm));

    for (auto& row : stationarity_rows(model, d)) prob.equalities.push_back(std::move(row));
    for (size_t j = 0; j < model.varieties().size(); ++j)
        for (auto& row :
             variety_rows(model.varieties()[j], basis, 0, "var:" + std::to_string(j)))
            prob.equalities.push_back(std::move(row));

    prob.psd_maps.push_back(moment_matrix_map(basis));

    for (const auto& [e, c] : f.terms()) prob.objective[basis.index(e)] += c;
    return prob;
}

// Multi-block relaxation for piecewise objectives sum_i f_i 1_{K_i}. Block 0
// carries the complement measure pi_0 and receives only the ambient variety
// rows and its moment matrix; each piece block additionally gets equality
// rows for its p_j and localizing maps for its q_k. Stationarity couples the
// block sum; a single normalisation row fixes the total mass.
inline MomentProblem assemble_piecewise(const SdeModel& model, const PiecewiseObjective& pieces,
                                        int d) {
    const int n = model.dimension();
    if (!model.compact_support() && d < model.generator_degree())
        throw std::invalid_argument("assemble_piecewise: degree below generator degree d_A");
    for (const auto& piece : pieces) {
        if (piece.f.num_vars() != n)
            throw std::invalid_argument("assemble_piecewise: piece arity mismatch");
        if (piece.f.degree() > d)
            throw std::invalid_argument("assemble_piecewise: piece objective degree exceeds d");
        for (const auto& p : piece.equalities)
            if (p.degree() > d)
                throw std::invalid_argument("assemble_piecewise: piece equality degree exceeds d");
        for (const auto& q : piece.inequalities)
            if (q.degree() > d)
                throw std::invalid_argument(
                    "assemble_piecewise: piece inequality degree exceeds d");
    }

    const int num_blocks = static_cast<int>(pieces.size()) + 1;
    MomentProblem prob;
    prob.degree = d;
    long offset = 0;
    for (int i = 0; i < num_blocks; ++i) {
        Block b{i == 0 ? "pi0" : "piece" + std::to_string(i), MonomialBasis(n, d), offset};
        offset += static_cast<long>(b.basis.size());
        prob.blocks.push_back(std::move(b));
    }

    LinearRow norm;
    norm.rhs = 1;
    norm.label = "norm";
    for (const auto& b : prob.blocks) norm.add(b.offset, Rat(1));
    prob.equalities.push_back(std::move(norm));

    // stationarity of pi applies to the sum of the restricted measures
    for (const auto& row : stationarity_rows(model, d)) {
        LinearRow coupled;
        coupled.rhs = row.rhs;
        coupled.label = row.label;
        for (const auto& b : prob.blocks)
            for (const auto& [idx, c] : row.coeffs) coupled.add(b.offset + idx, c);
        prob.equalities.push_back(std::move(coupled));
    }

    for (int i = 0; i < num_blocks; ++i) {
        const Block& b = prob.blocks[static_cast<size_t>(i)];
        for (size_t j = 0; j < model.varieties().size(); ++j)
            for (auto& row : variety_rows(model.varieties()[j], b.basis, b.offset,
                                          "var:" + std::to_string(i) + ":" + std::to_string(j)))
                prob.equalities.push_back(std::move(row));
        prob.psd_maps.push_back(moment_matrix_map(b.basis, b.offset, i));
    }

    for (size_t i = 0; i < pieces.size(); ++i) {
        const Block& b = prob.blocks[i + 1];
        const Piece& piece = pieces[i];
        for (size_t j = 0; j < piece.equalities.size(); ++j)
            for (auto& row :
                 variety_rows(piece.equalities[j], b.basis, b.offset,
                              "piece:" + std::to_string(i + 1) + ":eq" + std::to_string(j)))
                prob.equalities.push_back(std::move(row));
        for (size_t k = 0; k < piece.inequalities.size(); ++k)
            prob.psd_maps.push_back(localizing_map(
                piece.inequalities[k], b.basis, b.offset, static_cast<int>(i + 1),
                "loc:" + std::to_string(i + 1) + ":q" + std::to_string(k)));
        for (const auto& [e, c] : piece.f.terms()) prob.objective[b.offset + b.basis.index(e)] += c;
    }
    return prob;
}

// Variable substitution y_alpha = z^alpha * y~_alpha from the scaling remark.
// Moment and localizing maps transform by diagonal congruence, so PSD
// feasibility and optimal objective values are unchanged in exact arithmetic.
struct RescaleResult {
    MomentProblem problem;
    std::vector<Rat> scale;

    // maps a rescaled moment vector back to original coordinates
    Rat unscale(const MomentProblem& p, long global_idx, const Rat& value) const {
        for (const auto& b : p.blocks) {
            if (global_idx >= b.offset &&
                global_idx < b.offset + static_cast<long>(b.basis.size())) {
                const Exponents& e = b.basis.tuple(static_cast<int>(global_idx - b.offset));
                Rat factor(1);
                for (size_t i = 0; i < scale.size(); ++i)
                    factor *= rat_pow(scale[i], static_cast<unsigned>(e[i]));
                return value * factor;
            }
        }
        throw std::out_of_range("RescaleResult::unscale: index outside problem");
    }
};

namespace detail {

// Shared core: per-block scale vectors. The public operation applies one
// vector to every block; piecewise pipelines may scale blocks individually
// (still a per-variable substitution, so rows that couple blocks just pick
// up mixed coefficients).
inline MomentProblem rescale_with(const MomentProblem& prob,
                                  const std::vector<std::vector<Rat>>& zs) {
    if (prob.blocks.empty()) throw std::invalid_argument("rescale: empty problem");
    const int n = prob.blocks[0].basis.dimension();
    if (zs.size() != prob.blocks.size())
        throw std::invalid_argument("rescale: need one scale vector per block");
    for (const auto& z : zs) {
        if (static_cast<int>(z.size()) != n)
            throw std::invalid_argument("rescale: scale vector arity mismatch");
        for (const auto& zi : z)
            if (zi <= 0) throw std::invalid_argument("rescale: scale entries must be positive");
    }

    auto block_of = [&](long idx) -> size_t {
        for (size_t b = 0; b < prob.blocks.size(); ++b)
            if (idx >= prob.blocks[b].offset &&
                idx < prob.blocks[b].offset + static_cast<long>(prob.blocks[b].basis.size()))
                return b;
        throw std::out_of_range("rescale: index outside problem");
    };
    auto z_pow = [&](size_t b, const Exponents& e) {
        Rat out(1);
        for (int i = 0; i < n; ++i) out *= rat_pow(zs[b][static_cast<size_t>(i)], static_cast<unsigned>(e[i]));
        return out;
    };
    auto factor_of = [&](long idx) {
        size_t b = block_of(idx);
        const Exponents& e = prob.blocks[b].basis.tuple(static_cast<int>(idx - prob.blocks[b].offset));
        return z_pow(b, e);
    };

    MomentProblem out = prob;
    for (auto& row : out.equalities) {
        std::map<long, Rat> scaled;
        for (const auto& [idx, c] : row.coeffs) scaled[idx] = c * factor_of(idx);
        row.coeffs = std::move(scaled);
    }
    std::map<long, Rat> obj;
    for (const auto& [idx, c] : out.objective) obj[idx] = c * factor_of(idx);
    out.objective = std::move(obj);

    // Each PSD entry (beta_i, beta_j) picks up z^alpha per referenced variable
    // and the congruence factor z^{-(beta_i + beta_j)}; moment matrices are
    // left invariant (the two factors cancel) while localizing maps scale
    // their shift coefficients by z^delta.
    for (auto& map : out.psd_maps) {
        MonomialBasis side(n, map.side_degree);
        size_t b = static_cast<size_t>(map.block);
        for (auto& [key, form] : map.entries) {
            Exponents bg = exp_add(side.tuple(key.first), side.tuple(key.second));
            Rat denom = z_pow(b, bg);
            for (auto& [idx, c] : form) c = c * factor_of(idx) / denom;
        }
    }
    return out;
}

}  // namespace detail

inline RescaleResult rescale(const MomentProblem& prob, const std::vector<Rat>& z) {
    if (prob.blocks.empty()) throw std::invalid_argument("rescale: empty problem");
    RescaleResult out{detail::rescale_with(prob, std::vector<std::vector<Rat>>(prob.blocks.size(), z)),
                      z};
    return out;
}

}  // namespace momentbound
