#pragma once

#include "momentbound/polynomial.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace momentbound {

// Polynomial diffusion dX = b(X) dt + sigma(X) dW with support restricted to
// the variety {g_1 = ... = g_l = 0}. The diffusion matrix a = sigma sigma^T
// may be supplied directly when only it is polynomial.
//
// compact_support is a caller assertion that the support variety is compact.
// Stationary measures on a compact variety have finite moments of every
// order, so the stationarity relation pi(A x^alpha) = 0 is valid for every
// alpha whose image stays inside the degree-d basis; without compactness the
// relation is only justified for |alpha| <= d - d_A. Assembly honours the
// flag when selecting rows.
class SdeModel {
public:
    SdeModel(int n, std::vector<Polynomial> drift,
             std::optional<std::vector<std::vector<Polynomial>>> sigma,
             std::optional<std::vector<std::vector<Polynomial>>> diffusion_matrix,
             std::vector<Polynomial> varieties = {}, bool compact_support = false)
        : n_(n),
          drift_(std::move(drift)),
          sigma_(std::move(sigma)),
          varieties_(std::move(varieties)),
          compact_support_(compact_support) {
        if (n_ <= 0) throw std::invalid_argument("SdeModel: dimension must be positive");
        if (static_cast<int>(drift_.size()) != n_)
            throw std::invalid_argument("SdeModel: drift must have n components");
        for (const auto& b : drift_) check_poly(b);

        if (sigma_) {
            if (static_cast<int>(sigma_->size()) != n_)
                throw std::invalid_argument("SdeModel: sigma must have n rows");
            m_ = sigma_->empty() ? 0 : static_cast<int>((*sigma_)[0].size());
            for (const auto& row : *sigma_) {
                if (static_cast<int>(row.size()) != m_)
                    throw std::invalid_argument("SdeModel: ragged sigma matrix");
                for (const auto& p : row) check_poly(p);
            }
            a_ = multiply_sigma_sigma_t(*sigma_);
            if (diffusion_matrix) {
                check_matrix(*diffusion_matrix);
                if (*diffusion_matrix != a_)
                    throw std::invalid_argument("SdeModel: supplied a does not equal sigma*sigma^T");
            }
        } else if (diffusion_matrix) {
            check_matrix(*diffusion_matrix);
            a_ = std::move(*diffusion_matrix);
            for (int i = 0; i < n_; ++i)
                for (int j = i + 1; j < n_; ++j)
                    if (a_[i][j] != a_[j][i])
                        throw std::invalid_argument("SdeModel: diffusion matrix not symmetric");
            m_ = n_;  // unknown factor width; only a enters the generator
        } else {
            throw std::invalid_argument("SdeModel: need sigma or diffusion matrix");
        }

        for (const auto& g : varieties_) {
            check_poly(g);
            if (g.is_zero())
                throw std::invalid_argument("SdeModel: zero polynomial is not a variety");
        }

        degree_a_ = 0;
        for (const auto& b : drift_)
            if (!b.is_zero()) degree_a_ = std::max(degree_a_, b.degree());
        for (const auto& row : a_)
            for (const auto& p : row)
                if (!p.is_zero()) degree_a_ = std::max(degree_a_, p.degree());
    }

    int dimension() const { return n_; }
    int noise_dimension() const { return m_; }
    const std::vector<Polynomial>& drift() const { return drift_; }
    const std::optional<std::vector<std::vector<Polynomial>>>& sigma() const { return sigma_; }
    const std::vector<std::vector<Polynomial>>& diffusion_matrix() const { return a_; }
    const std::vector<Polynomial>& varieties() const { return varieties_; }
    bool compact_support() const { return compact_support_; }

    // d_A = max degree over drift components and diffusion-matrix entries.
    int generator_degree() const { return degree_a_; }

private:
    void check_poly(const Polynomial& p) const {
        if (p.num_vars() != n_)
            throw std::invalid_argument("SdeModel: polynomial arity does not match dimension");
    }
    void check_matrix(const std::vector<std::vector<Polynomial>>& m) const {
        if (static_cast<int>(m.size()) != n_)
            throw std::invalid_argument("SdeModel: diffusion matrix must be n x n");
        for (const auto& row : m) {
            if (static_cast<int>(row.size()) != n_)
                throw std::invalid_argument("SdeModel: diffusion matrix must be n x n");
            for (const auto& p : row) check_poly(p);
        }
    }

    std::vector<std::vector<Polynomial>> multiply_sigma_sigma_t(
        const std::vector<std::vector<Polynomial>>& s) const {
        std::vector<std::vector<Polynomial>> a(n_, std::vector<Polynomial>(n_, Polynomial(n_)));
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) {
                Polynomial acc(n_);
                for (int k = 0; k < m_; ++k) acc += s[i][k] * s[j][k];
                a[i][j] = acc;
                a[j][i] = acc;
            }
        return a;
    }

    int n_;
    int m_ = 0;
    std::vector<Polynomial> drift_;
    std::optional<std::vector<std::vector<Polynomial>>> sigma_;
    std::vector<std::vector<Polynomial>> a_;
    std::vector<Polynomial> varieties_;
    bool compact_support_;
    int degree_a_ = 0;
};

// Infinitesimal generator applied to a polynomial:
//   A h = <grad h, b> + (1/2) <hess h, a>.
// Exact in rational arithmetic; deg(A h) <= deg h + d_A.
inline Polynomial apply_generator(const Polynomial& h, const SdeModel& model) {
    const int n = model.dimension();
    if (h.num_vars() != n)
        throw std::invalid_argument("apply_generator: arity mismatch with model");
    Polynomial out(n);
    std::vector<Polynomial> grad(n, Polynomial(n));
    for (int i = 0; i < n; ++i) {
        grad[i] = h.differentiate(i);
        out += grad[i] * model.drift()[i];
    }
    const auto& a = model.diffusion_matrix();
    Rat half(1, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Polynomial hij = grad[i].differentiate(j);
            if (!hij.is_zero() && !a[i][j].is_zero()) out += half * (hij * a[i][j]);
        }
    return out;
}

}  // namespace momentbound
