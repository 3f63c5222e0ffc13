#ifndef HEATBASIS_TENSOR_HPP
#define HEATBASIS_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "heatbasis/basis.hpp"
#include "heatbasis/heat.hpp"

namespace heatbasis {

/// Product weight for several variables, derived from a one-variable weight
/// w through the growth suprema B_k: the per-axis factor of v-tilde, the
/// per-axis factor of w-tilde (they coincide for p = 1), and evaluators for
/// the assembled weights on R^N. The isotropic extension w(|x|) of the base
/// weight dominates v-tilde pointwise.
struct ProductWeight {
    Weight base;
    Weight per_axis_vtilde; // p = 1 factor
    Weight per_axis_w;      // factor of w-tilde
    int n_axes = 2;
    double p = 1.0;

    double vtilde(const std::vector<double>& x) const {
        double acc = 1.0;
        for (double xj : x) acc *= per_axis_vtilde(xj);
        return acc;
    }
    double wtilde(const std::vector<double>& x) const {
        double acc = 1.0;
        for (double xj : x) acc *= per_axis_w(xj);
        return acc;
    }
    double base_norm_weight(const std::vector<double>& x) const {
        double r2 = 0.0;
        for (double xj : x) r2 += xj * xj;
        return base(std::sqrt(r2));
    }
};

inline ProductWeight build_product_weight(const Weight& w, int n_axes, double p, int k_max = 40) {
    if (n_axes < 2) throw ConfigError("product weight needs N >= 2");
    if (p < 1.0) throw DomainError("p must be >= 1");
    if (!check_fast_growth(w, 5).pass)
        throw DataError("base weight fails the growth condition; refusing the product construction");
    std::vector<double> log_b = growth_suprema_log(w, k_max);
    ProductWeight pw;
    pw.base = w;
    pw.n_axes = n_axes;
    pw.p = p;
    pw.per_axis_vtilde = Weight::polynomial_product(1.0, n_axes, log_b);
    pw.per_axis_w = (p == 1.0) ? pw.per_axis_vtilde : Weight::polynomial_product(p, n_axes, log_b);
    return pw;
}

/// Pointwise domination v-tilde <= w on a seeded probe cloud in the ball of
/// radius `span`; returns the largest observed ratio.
inline double product_weight_domination(const ProductWeight& pw, std::size_t points, Rng rng,
                                        double span = 40.0) {
    double worst = 0.0;
    std::vector<double> x(static_cast<std::size_t>(pw.n_axes));
    for (std::size_t s = 0; s < points; ++s) {
        double r2 = 0.0;
        for (auto& xj : x) {
            xj = rng.uniform(-span, span);
            r2 += xj * xj;
        }
        double scale = std::sqrt(r2);
        if (scale > span) {
            for (auto& xj : x) xj *= span / scale;
        }
        worst = std::max(worst, pw.vtilde(x) / pw.base_norm_weight(x));
    }
    return worst;
}

/// Finite sum of separable functions sum_k lambda_k f_1k (x_1) ... f_Nk (x_N).
struct TensorTerm {
    double lambda = 1.0;
    std::vector<GridFunction> factors;
};

struct TensorFunction {
    std::vector<TensorTerm> terms;

    std::size_t n_axes() const { return terms.empty() ? 0 : terms.front().factors.size(); }

    double lambda_sum() const {
        double acc = 0.0;
        for (const auto& t : terms) acc += std::abs(t.lambda);
        return acc;
    }
};

/// Scale every factor to unit weighted norm, folding the scales into lambda;
/// terms with a vanishing factor are dropped.
inline TensorFunction normalize_terms(const TensorFunction& f,
                                      const std::vector<std::shared_ptr<const WeightedModel>>& models) {
    TensorFunction out;
    for (const auto& term : f.terms) {
        TensorTerm t = term;
        bool degenerate = false;
        for (std::size_t j = 0; j < t.factors.size(); ++j) {
            double nrm = models[j]->norm(t.factors[j]);
            if (nrm <= 0.0) {
                degenerate = true;
                break;
            }
            for (auto& v : t.factors[j].values) v /= nrm;
            t.lambda *= nrm;
        }
        if (!degenerate && t.lambda != 0.0) out.terms.push_back(std::move(t));
    }
    return out;
}

/// The 2^N - 1 components of the complementary projection applied termwise:
/// each component applies P_n or Q_n per axis, with at least one Q. `head`
/// is the remaining pure-P part, so head + sum(components) reconstructs the
/// input termwise.
struct TensorSplit {
    TensorFunction head;
    std::vector<std::pair<unsigned, TensorFunction>> components; // bit j set: Q on axis j
};

inline TensorSplit tensor_projection_split(const TensorFunction& f, std::size_t n,
                                           const std::vector<const BasisState*>& bases) {
    const std::size_t axes = f.n_axes();
    if (axes == 0) throw DataError("empty tensor function");
    if (bases.size() != axes) throw ConfigError("one basis per axis required");
    for (const auto* b : bases)
        if (b->dim() < n) throw IndexError("axis basis dimension below the projection index");
    for (const auto& term : f.terms)
        for (const auto& g : term.factors)
            if (g.side != Side::UnitInterval)
                throw DataError("projection split needs transferred-frame factors");

    TensorSplit split;
    const unsigned full = (1u << axes);
    for (unsigned mask = 0; mask < full; ++mask) {
        TensorFunction comp;
        for (const auto& term : f.terms) {
            TensorTerm t;
            t.lambda = term.lambda;
            for (std::size_t j = 0; j < axes; ++j) {
                std::vector<double> head = bases[j]->project(term.factors[j].values, n);
                GridFunction g(term.factors[j].grid, Side::UnitInterval);
                if (mask & (1u << j)) {
                    for (std::size_t i = 0; i < g.size(); ++i)
                        g[i] = term.factors[j][i] - head[i];
                } else {
                    g.values = std::move(head);
                }
                t.factors.push_back(std::move(g));
            }
            comp.terms.push_back(std::move(t));
        }
        if (mask == 0) {
            split.head = std::move(comp);
        } else {
            split.components.emplace_back(mask, std::move(comp));
        }
    }
    return split;
}

/// Separable heat evolution: each factor evolves on its own axis, and the
/// N-dimensional solution is the lambda-weighted sum of products. The sup is
/// taken over the tensor grid of per-axis sample points.
class TensorHeat {
public:
    TensorHeat(const TensorFunction& f,
               std::vector<std::shared_ptr<const WeightedModel>> models)
        : axes_(f.n_axes()), models_(std::move(models)) {
        if (axes_ == 0) throw DataError("empty tensor function");
        for (const auto& term : f.terms) {
            lambdas_.push_back(term.lambda);
            std::vector<HeatEvolver> evs;
            for (std::size_t j = 0; j < axes_; ++j) evs.emplace_back(term.factors[j], models_[j]);
            evolvers_.push_back(std::move(evs));
        }
        lo_ = 0.0;
        hi_ = 0.0;
        for (const auto& evs : evolvers_)
            for (const auto& ev : evs) {
                lo_ = std::min(lo_, ev.support_lo());
                hi_ = std::max(hi_, ev.support_hi());
            }
    }

    std::size_t axes() const { return axes_; }

    /// Sup over the axis-product grid with `per_length` samples per diffusion
    /// length (the default trades a little resolution for N = 3 feasibility).
    double sup_norm(double t, double per_length = 0.0) const {
        if (!(t >= 1.0)) throw DomainError("sup-norm schedule starts at t = 1");
        if (per_length == 0.0) per_length = axes_ >= 3 ? 20.0 : 50.0;
        const double pad = 8.0 * std::sqrt(t);
        const double lo = lo_ - pad, hi = hi_ + pad;
        const double h = std::sqrt(t) / per_length;
        const std::size_t n = static_cast<std::size_t>(std::ceil((hi - lo) / h));
        // per-term per-axis profiles
        std::vector<std::vector<std::vector<double>>> prof(evolvers_.size());
        for (std::size_t k = 0; k < evolvers_.size(); ++k) {
            prof[k].resize(axes_);
            for (std::size_t j = 0; j < axes_; ++j) {
                prof[k][j].resize(n + 1);
                for (std::size_t i = 0; i <= n; ++i)
                    prof[k][j][i] =
                        evolvers_[k][j].evaluate(lo + (hi - lo) * static_cast<double>(i) / n, t);
            }
        }
        double best = 0.0;
        std::vector<std::size_t> idx(axes_, 0);
        while (true) {
            double acc = 0.0;
            for (std::size_t k = 0; k < evolvers_.size(); ++k) {
                double prod = lambdas_[k];
                for (std::size_t j = 0; j < axes_; ++j) prod *= prof[k][j][idx[j]];
                acc += prod;
            }
            best = std::max(best, std::abs(acc));
            std::size_t j = 0;
            while (j < axes_ && ++idx[j] > n) {
                idx[j] = 0;
                ++j;
            }
            if (j == axes_) break;
        }
        return best;
    }

private:
    std::size_t axes_;
    std::vector<std::shared_ptr<const WeightedModel>> models_;
    std::vector<std::vector<HeatEvolver>> evolvers_;
    std::vector<double> lambdas_;
    double lo_ = 0.0, hi_ = 0.0;
};

/// Decay experiment for separable data whose every term carries at least one
/// tail factor beyond the per-axis threshold: the pure-head part of the
/// projection split must vanish, and the verdict compares the fitted slope
/// against the per-axis gain plus (N-1)/2 from the remaining axes.
inline DecayReport tensor_heat_decay(const TensorFunction& f, const TimeSchedule& schedule,
                                     const std::vector<const BasisState*>& bases,
                                     std::vector<std::shared_ptr<const WeightedModel>> models,
                                     std::size_t tail_from, int m, double per_length = 0.0) {
    const std::size_t axes = f.n_axes();
    if (axes == 0) throw DataError("empty tensor function");
    TensorFunction data = f;
    if (m >= 1) {
        TensorSplit split = tensor_projection_split(f, tail_from, bases);
        // precondition: no term may survive in the pure-head component
        for (std::size_t k = 0; k < split.head.terms.size(); ++k) {
            const auto& term = split.head.terms[k];
            double prod = std::abs(term.lambda);
            for (std::size_t j = 0; j < axes; ++j)
                prod *= models[j]->coeff_norm(term.factors[j].values);
            if (prod > 1e-10 * std::max(1.0, std::abs(f.terms[k].lambda)))
                throw DataError("term " + std::to_string(k + 1) +
                                " has no factor in the tail span of its axis basis");
        }
        data.terms.clear();
        for (auto& [mask, comp] : split.components)
            for (auto& term : comp.terms) data.terms.push_back(std::move(term));
    }

    TensorHeat heat(data, models);
    DecayReport rep;
    rep.schedule = schedule;
    rep.theoretical_exponent = -(1.0 + m) / 2.0 - (static_cast<double>(axes) - 1.0) / 2.0;
    for (double t : schedule.values()) {
        double s = heat.sup_norm(t, per_length);
        if (s < 1e-300 && !rep.sup_norms.empty()) {
            rep.truncated = true;
            break;
        }
        rep.times.push_back(t);
        rep.sup_norms.push_back(s);
    }
    finish_decay_report(rep);
    return rep;
}

} // namespace heatbasis

#endif
