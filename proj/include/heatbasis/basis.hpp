#ifndef HEATBASIS_BASIS_HPP
#define HEATBASIS_BASIS_HPP

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "heatbasis/functionals.hpp"
#include "heatbasis/haar.hpp"

namespace heatbasis {

/// Pairing of a cell vector with every Haar element at once:
/// p_n = sum_i v_i e_n(i), via the dyadic sum tree.
inline std::vector<double> haar_pair_all(const std::vector<double>& v) {
    std::size_t dim = v.size();
    std::vector<double> sums = v, out(dim, 0.0);
    std::size_t len = dim;
    while (len > 1) {
        std::size_t half = len / 2;
        for (std::size_t b = 0; b < half; ++b) {
            double l = sums[2 * b], r = sums[2 * b + 1];
            out[half + b] = l - r;
            sums[b] = l + r;
        }
        len = half;
    }
    out[0] = sums[0];
    return out;
}

/// Support size (in cells) of Haar element n on a grid with `dim` cells.
inline double haar_support_cells(std::size_t n, std::size_t dim) {
    if (n <= 1) return static_cast<double>(dim);
    HaarIndex h(n);
    return static_cast<double>(dim >> h.k);
}

/// Fast transforms of a dyadic two-value system, either the plain Haar system
/// or its reweighting by the diagonal cell measure omega: the martingale
/// differences psi_B = alpha 1_L - beta 1_R that are orthonormal in the
/// omega inner product. Both share the Haar index numbering, so prefix
/// projections have the same block structure.
class DyadicTransforms {
public:
    /// Plain Haar on `dim` cells.
    explicit DyadicTransforms(std::size_t dim) : dim_(dim), weighted_(false) {}

    /// Weighted system, orthonormal under sum_i u_i v_i omega_i.
    explicit DyadicTransforms(const std::vector<double>& omega) : dim_(omega.size()), weighted_(true) {
        omega_ = omega;
        // mass tree: mass_[n-1] = total omega over the support block of node n
        mass_.assign(dim_, 0.0);
        alpha_.assign(dim_, 0.0);
        beta_.assign(dim_, 0.0);
        std::vector<double> level = omega; // block masses, finest first
        std::size_t len = dim_;
        while (len > 1) {
            std::size_t half = len / 2;
            for (std::size_t b = 0; b < half; ++b) {
                double ml = level[2 * b], mr = level[2 * b + 1];
                double mb = ml + mr;
                mass_[half + b] = mb;
                alpha_[half + b] = std::sqrt(mr / (ml * mb));
                beta_[half + b] = std::sqrt(ml / (mr * mb));
                level[b] = mb;
            }
            len = half;
        }
        mass_[0] = level[0];
    }

    std::size_t dim() const { return dim_; }
    bool weighted() const { return weighted_; }

    /// Coordinates of a cell vector in the system.
    std::vector<double> analyze(const std::vector<double>& cells) const {
        if (!weighted_) return haar_analyze(cells);
        std::vector<double> sums(dim_), out(dim_, 0.0);
        for (std::size_t i = 0; i < dim_; ++i) sums[i] = cells[i] * omega_[i];
        std::size_t len = dim_;
        while (len > 1) {
            std::size_t half = len / 2;
            for (std::size_t b = 0; b < half; ++b) {
                double l = sums[2 * b], r = sums[2 * b + 1];
                out[half + b] = alpha_[half + b] * l - beta_[half + b] * r;
                sums[b] = l + r;
            }
            len = half;
        }
        out[0] = sums[0] / std::sqrt(mass_[0]);
        return out;
    }

    std::vector<double> synthesize(const std::vector<double>& coords) const {
        if (!weighted_) return haar_synthesize(coords);
        std::vector<double> vals(dim_, 0.0);
        vals[0] = coords[0] / std::sqrt(mass_[0]);
        std::size_t len = 1;
        while (len < dim_) {
            for (std::size_t b = len; b-- > 0;) {
                double m = vals[b], c = coords[len + b];
                vals[2 * b] = m + c * alpha_[len + b];
                vals[2 * b + 1] = m - c * beta_[len + b];
            }
            len *= 2;
        }
        return vals;
    }

    /// p_n = v . e_n (plain dot with the n-th element) for all n.
    std::vector<double> pair_all(const std::vector<double>& v) const {
        if (!weighted_) return haar_pair_all(v);
        std::vector<double> sums = v, out(dim_, 0.0);
        std::size_t len = dim_;
        while (len > 1) {
            std::size_t half = len / 2;
            for (std::size_t b = 0; b < half; ++b) {
                double l = sums[2 * b], r = sums[2 * b + 1];
                out[half + b] = alpha_[half + b] * l - beta_[half + b] * r;
                sums[b] = l + r;
            }
            len = half;
        }
        out[0] = sums[0] / std::sqrt(mass_[0]);
        return out;
    }

    /// A^T z where A is the analysis map (coordinate functionals as rows).
    std::vector<double> adjoint_from_pairs(const std::vector<double>& z) const {
        if (!weighted_) {
            std::vector<double> scaled(dim_);
            for (std::size_t n = 1; n <= dim_; ++n)
                scaled[n - 1] = z[n - 1] / haar_support_cells(n, dim_);
            return haar_synthesize(scaled);
        }
        std::vector<double> out = synthesize(z);
        for (std::size_t i = 0; i < dim_; ++i) out[i] *= omega_[i];
        return out;
    }

    std::vector<double> element(std::size_t n) const {
        if (!weighted_) {
            std::vector<double> coords(dim_, 0.0);
            coords[n - 1] = 1.0;
            return haar_synthesize(coords);
        }
        std::vector<double> e(dim_, 0.0);
        if (n == 1) {
            double v = 1.0 / std::sqrt(mass_[0]);
            e.assign(dim_, v);
            return e;
        }
        HaarIndex h(n);
        std::size_t block = dim_ >> h.k;
        std::size_t start = (h.j - 1) * block;
        for (std::size_t i = 0; i < block / 2; ++i) e[start + i] = alpha_[n - 1];
        for (std::size_t i = block / 2; i < block; ++i) e[start + i] = -beta_[n - 1];
        return e;
    }

private:
    std::size_t dim_;
    bool weighted_;
    std::vector<double> omega_, mass_, alpha_, beta_;
};

/// One step of the rank-one basis perturbation: S f = f - (eta . f / d) x.
/// eta pairs with the part of f beyond the N-th basis projection, so S acts
/// as the identity on the first N elements and subtracts a multiple of the
/// norming element x from the rest. eta . x = 0, hence S^{-1} f = f + (eta . f / d) x.
struct RankOneUpdate {
    std::size_t affected_from = 0; // N
    std::vector<double> x;         // cell values, unit weighted norm
    std::vector<double> eta;       // cell pairing of y o (id - Q_N)
    double d = 1.0;                // y(x) > 0
    double step_norm = 0.0;        // exact ||id - S||
};

/// Ordered finite basis of the weighted model. Representations:
///  - a dyadic two-value system (plain Haar for p = 1, the omega-orthonormal
///    weighted Haar for p = 2), optionally re-ordered, held implicitly;
///  - the same composed with a chain of rank-one updates (annihilation build);
///  - a dense matrix of elements (Gram-Schmidt output, imported files).
class BasisState {
public:
    static BasisState haar_basis(std::shared_ptr<const WeightedModel> model) {
        BasisState b;
        b.model_ = std::move(model);
        b.transforms_ = std::make_shared<const DyadicTransforms>(b.model_->dim());
        return b;
    }

    /// Orthonormal basis of the p = 2 model: Haar-shaped martingale
    /// differences with respect to the frame weights. Basis constant 1.
    static BasisState weighted_haar_basis(std::shared_ptr<const WeightedModel> model) {
        BasisState b;
        b.model_ = std::move(model);
        b.transforms_ = std::make_shared<const DyadicTransforms>(b.model_->frame_weights());
        return b;
    }

    /// Haar elements re-ordered: element n is Haar index order[n-1].
    static BasisState permuted_haar(std::shared_ptr<const WeightedModel> model,
                                    std::vector<std::uint32_t> order) {
        BasisState b = haar_basis(std::move(model));
        if (order.size() != b.model_->dim()) throw DataError("permutation size mismatch");
        std::vector<bool> seen(order.size(), false);
        for (auto n : order) {
            if (n < 1 || n > order.size() || seen[n - 1]) throw DataError("invalid permutation");
            seen[n - 1] = true;
        }
        b.order_ = std::move(order);
        return b;
    }

    static BasisState dense(std::shared_ptr<const WeightedModel> model,
                            std::vector<std::vector<double>> columns, bool orthonormal) {
        BasisState b;
        b.model_ = std::move(model);
        if (columns.size() != b.model_->dim()) throw DataError("dense basis must be square");
        b.dense_ = std::move(columns);
        b.orthonormal_ = orthonormal;
        return b;
    }

    const WeightedModel& model() const { return *model_; }
    std::shared_ptr<const WeightedModel> model_ptr() const { return model_; }
    std::size_t dim() const { return model_->dim(); }
    bool is_dense() const { return dense_.has_value(); }
    bool is_orthonormal() const { return orthonormal_ || (transforms_ && transforms_->weighted()); }
    bool identity_order() const { return order_.empty(); }
    bool plain_haar_base() const { return transforms_ && !transforms_->weighted(); }
    const std::vector<RankOneUpdate>& updates() const { return updates_; }

    void push_update(RankOneUpdate u) {
        if (dense_) throw InternalError("cannot push updates onto a dense basis");
        updates_.push_back(std::move(u));
    }

    /// T v (the chain operator applied to a cell vector).
    void apply_chain(std::vector<double>& v) const {
        for (const auto& u : updates_) {
            double c = dot(u.eta, v) / u.d;
            if (c != 0.0) axpy(-c, u.x, v);
        }
    }

    /// T^{-1} v.
    void apply_chain_inverse(std::vector<double>& v) const {
        for (std::size_t k = updates_.size(); k-- > 0;) {
            const auto& u = updates_[k];
            double c = dot(u.eta, v) / u.d;
            if (c != 0.0) axpy(c, u.x, v);
        }
    }

    /// T^T v.
    void apply_chain_transpose(std::vector<double>& v) const {
        for (std::size_t k = updates_.size(); k-- > 0;) {
            const auto& u = updates_[k];
            double c = dot(u.x, v) / u.d;
            if (c != 0.0) axpy(-c, u.eta, v);
        }
    }

    /// T^{-T} v.
    void apply_chain_inverse_transpose(std::vector<double>& v) const {
        for (const auto& u : updates_) {
            double c = dot(u.x, v) / u.d;
            if (c != 0.0) axpy(c, u.eta, v);
        }
    }

    /// Element n (1-based) as cell values. Updates are gated by index, so the
    /// first N elements of each step stay bit-identical to their pre-step values.
    std::vector<double> element(std::size_t n) const {
        if (n < 1 || n > dim()) throw IndexError("basis element index out of range");
        if (dense_) return (*dense_)[n - 1];
        std::vector<double> e = transforms_->element(haar_index_of(n));
        for (const auto& u : updates_) {
            if (n <= u.affected_from) continue;
            double c = dot(u.eta, e) / u.d;
            axpy(-c, u.x, e);
        }
        return e;
    }

    /// Coordinates of a cell vector in this basis.
    std::vector<double> coords(const std::vector<double>& cells) const {
        if (dense_) return dense_coords(cells);
        std::vector<double> v = cells;
        apply_chain_inverse(v);
        std::vector<double> hc = transforms_->analyze(v);
        if (order_.empty()) return hc;
        std::vector<double> out(hc.size());
        for (std::size_t k = 0; k < order_.size(); ++k) out[k] = hc[order_[k] - 1];
        return out;
    }

    std::vector<double> synthesize(const std::vector<double>& coords) const {
        if (dense_) {
            std::vector<double> out(dim(), 0.0);
            for (std::size_t k = 0; k < coords.size(); ++k)
                if (coords[k] != 0.0) axpy(coords[k], (*dense_)[k], out);
            return out;
        }
        std::vector<double> hc(coords.size());
        if (order_.empty()) {
            hc = coords;
        } else {
            for (std::size_t k = 0; k < order_.size(); ++k) hc[order_[k] - 1] = coords[k];
        }
        std::vector<double> v = transforms_->synthesize(hc);
        apply_chain(v);
        return v;
    }

    /// Basis projection P_n f as cell values.
    std::vector<double> project(const std::vector<double>& cells, std::size_t n) const {
        if (n > dim()) throw IndexError("projection index exceeds dimension");
        if (n == dim()) return cells;
        std::vector<double> c = coords(cells);
        if (c.size() != cells.size()) throw InternalError("coordinate solve failed");
        for (std::size_t k = n; k < c.size(); ++k) c[k] = 0.0;
        return synthesize(c);
    }

    /// Cell pairing vector of f -> y(P_n f), given the pairing gamma of y:
    /// P_n^T gamma = T^{-T} A^T R_n Q^T T^T gamma.
    std::vector<double> head_pairing(const std::vector<double>& gamma, std::size_t n) const {
        if (dense_) {
            std::vector<double> out(dim(), 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                double c = dot((*dense_)[k], gamma);
                axpy(c, dual_row(k), out);
            }
            return out;
        }
        std::vector<double> g = gamma;
        apply_chain_transpose(g);
        std::vector<double> pair = transforms_->pair_all(g);
        std::vector<double> kept(pair.size(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t hn = haar_index_of(k + 1);
            kept[hn - 1] = pair[hn - 1];
        }
        std::vector<double> out = transforms_->adjoint_from_pairs(kept);
        apply_chain_inverse_transpose(out);
        return out;
    }

    /// Pairing vector of y o (id - P_n); exactly zero at n = dim.
    std::vector<double> tail_pairing(const std::vector<double>& gamma, std::size_t n) const {
        if (n >= dim()) return std::vector<double>(dim(), 0.0);
        std::vector<double> head = head_pairing(gamma, n);
        std::vector<double> out(gamma.size());
        for (std::size_t i = 0; i < gamma.size(); ++i) out[i] = gamma[i] - head[i];
        return out;
    }

    std::size_t haar_index_of(std::size_t n) const {
        return order_.empty() ? n : order_[n - 1];
    }

    /// Pairing vector u of the k-th coordinate functional: u . f = coords(f)[k-1].
    std::vector<double> biorth_pairing(std::size_t k) const {
        if (k < 1 || k > dim()) throw IndexError("coordinate functional index out of range");
        if (dense_) return dual_row(k - 1);
        std::vector<double> kept(dim(), 0.0);
        kept[haar_index_of(k) - 1] = 1.0;
        std::vector<double> out = transforms_->adjoint_from_pairs(kept);
        apply_chain_inverse_transpose(out);
        return out;
    }

    // --- metadata carried with the basis ---
    std::vector<std::size_t> thresholds;     // t_m: J^m vanishes beyond index t_m
    double basis_constant = 1.0;             // sampled lower-bound estimate
    double transform_distance = 0.0;         // upper bound on ||id - T||

    static void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
    }
    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    }

private:
    std::vector<double> dense_coords(const std::vector<double>& cells) const {
        if (orthonormal_) {
            std::vector<double> c(dim());
            const auto& fw = model_->frame_weights();
            for (std::size_t k = 0; k < dim(); ++k) {
                const auto& col = (*dense_)[k];
                double acc = 0.0;
                for (std::size_t i = 0; i < col.size(); ++i) acc += col[i] * cells[i] * fw[i];
                c[k] = acc;
            }
            return c;
        }
        ensure_lu();
        std::vector<double> b(dim());
        for (std::size_t i = 0; i < dim(); ++i) b[i] = cells[lu_perm_[i]];
        const std::size_t n = dim();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) b[i] -= lu_[i * n + j] * b[j];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = i + 1; j < n; ++j) b[i] -= lu_[i * n + j] * b[j];
            double piv = lu_[i * n + i];
            if (piv == 0.0) throw InternalError("singular basis matrix: coordinate solve failed");
            b[i] /= piv;
        }
        return b;
    }

    /// Biorthogonal pairing row for dense orthonormal bases.
    std::vector<double> dual_row(std::size_t k) const {
        if (!orthonormal_) throw InternalError("dual rows need an orthonormal dense basis");
        const auto& fw = model_->frame_weights();
        std::vector<double> r = (*dense_)[k];
        for (std::size_t i = 0; i < r.size(); ++i) r[i] *= fw[i];
        return r;
    }

    void ensure_lu() const {
        if (!lu_.empty()) return;
        const std::size_t n = dim();
        lu_.assign(n * n, 0.0);
        lu_perm_.resize(n);
        for (std::size_t i = 0; i < n; ++i) lu_perm_[i] = i;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) lu_[i * n + k] = (*dense_)[k][i];
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t piv = c;
            double best = std::abs(lu_[c * n + c]);
            for (std::size_t r = c + 1; r < n; ++r)
                if (std::abs(lu_[r * n + c]) > best) {
                    best = std::abs(lu_[r * n + c]);
                    piv = r;
                }
            if (best == 0.0) throw InternalError("basis elements are linearly dependent");
            if (piv != c) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_[c * n + j], lu_[piv * n + j]);
                std::swap(lu_perm_[c], lu_perm_[piv]);
            }
            for (std::size_t r = c + 1; r < n; ++r) {
                double f = lu_[r * n + c] / lu_[c * n + c];
                lu_[r * n + c] = f;
                for (std::size_t j = c + 1; j < n; ++j) lu_[r * n + j] -= f * lu_[c * n + j];
            }
        }
    }

    std::shared_ptr<const WeightedModel> model_;
    std::shared_ptr<const DyadicTransforms> transforms_;
    std::vector<RankOneUpdate> updates_;
    std::vector<std::uint32_t> order_;
    std::optional<std::vector<std::vector<double>>> dense_;
    bool orthonormal_ = false;
    mutable std::vector<double> lu_;
    mutable std::vector<std::size_t> lu_perm_;
};

/// Sampled lower bound on the basis constant sup_n ||P_n||: the maximum of
/// ||P_n f|| / ||f|| over a deterministic n-set (all dyadic cuts plus random
/// fills) and seeded random test functions.
struct BasisConstantEstimate {
    double value = 1.0;
    std::size_t samples = 0;
};

inline BasisConstantEstimate basis_constant_estimate(const BasisState& basis, std::size_t samples,
                                                     Rng rng) {
    const std::size_t dim = basis.dim();
    std::vector<std::size_t> ns;
    for (std::size_t n = 1; n < dim; n *= 2) ns.push_back(n);
    ns.push_back(dim);
    for (std::size_t t : basis.thresholds)
        for (std::size_t d : {std::size_t(0), std::size_t(1)})
            if (t + d >= 1 && t + d <= dim) ns.push_back(t + d);
    std::size_t extra = std::min<std::size_t>(samples, 32);
    for (std::size_t k = 0; k < extra; ++k) ns.push_back(1 + rng.index(dim));

    BasisConstantEstimate est;
    est.value = 1.0; // attained at n = dim
    const auto& model = basis.model();
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> f(dim);
        for (auto& v : f) v = rng.uniform(-1.0, 1.0);
        double nf = model.coeff_norm(f);
        if (nf == 0.0) continue;
        for (std::size_t n : ns) {
            double r = model.coeff_norm(basis.project(f, n)) / nf;
            if (r > est.value) est.value = r;
        }
        ++est.samples;
    }
    return est;
}

/// Reflection through psi(x) = -x: the same coefficients read on the positive
/// half-line. Reflecting twice restores the original orientation.
struct MirroredBasis {
    BasisState basis;
    bool positive_halfline = true;
};

inline MirroredBasis mirror_basis(const BasisState& b) { return MirroredBasis{b, true}; }
inline BasisState mirror_basis(const MirroredBasis& m) { return m.basis; }

} // namespace heatbasis

#endif
