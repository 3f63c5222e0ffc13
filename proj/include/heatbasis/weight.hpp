#ifndef HEATBASIS_WEIGHT_HPP
#define HEATBASIS_WEIGHT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "heatbasis/common.hpp"

namespace heatbasis {

enum class WeightKind { GaussExp, ExpLinear, PolynomialProduct, Tabulated };

/// Symmetric weight on the real line. The catalogue ships
///   gauss-exp    w(x) = exp(x^2/2)
///   exp-linear   w(x) = exp(|x|)
/// plus the per-axis factor of the product weight used for several variables,
/// and tabulated weights loaded from two-column CSV.
class Weight {
public:
    Weight() : kind_(WeightKind::ExpLinear) {}

    static Weight gauss_exp() { return Weight(WeightKind::GaussExp); }
    static Weight exp_linear() { return Weight(WeightKind::ExpLinear); }

    /// Per-axis factor v of the product weight: for p = 1
    ///   v(u) = sum_k 2^-k B_k^{-1/N} (1+|u|)^{k/N}
    /// and for p > 1 the same sum taken to the power 1/p times (1+|u|)^{-2/p'}.
    /// `log_b` holds log B_k, k = 1..k_max.
    static Weight polynomial_product(double p, int n_axes, std::vector<double> log_b) {
        if (p < 1.0) throw ConfigError("product weight requires p >= 1");
        if (n_axes < 2) throw ConfigError("product weight requires N >= 2");
        if (log_b.empty()) throw ConfigError("product weight requires at least one B_k");
        Weight w(WeightKind::PolynomialProduct);
        w.params_.push_back(p);
        w.params_.push_back(static_cast<double>(n_axes));
        for (double lb : log_b) w.params_.push_back(lb);
        return w;
    }

    static Weight tabulated(std::vector<double> x, std::vector<double> w) {
        if (x.size() != w.size() || x.size() < 2) throw DataError("tabulated weight needs >= 2 rows");
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!(x[i] > x[i - 1])) throw DataError("tabulated weight abscissae must be strictly increasing");
        for (double v : w)
            if (!(v > 0.0) || !std::isfinite(v)) throw DataError("tabulated weight values must be positive");
        Weight out(WeightKind::Tabulated);
        out.tab_x_ = std::move(x);
        out.tab_w_ = std::move(w);
        return out;
    }

    WeightKind kind() const { return kind_; }
    const std::vector<double>& parameters() const { return params_; }
    const std::vector<double>& table_x() const { return tab_x_; }
    const std::vector<double>& table_w() const { return tab_w_; }

    std::string kind_name() const {
        switch (kind_) {
            case WeightKind::GaussExp: return "gauss-exp";
            case WeightKind::ExpLinear: return "exp-linear";
            case WeightKind::PolynomialProduct: return "polynomial-product";
            case WeightKind::Tabulated: return "tabulated";
        }
        return "?";
    }

    double operator()(double x) const {
        switch (kind_) {
            case WeightKind::GaussExp: return std::exp(0.5 * x * x);
            case WeightKind::ExpLinear: return std::exp(std::abs(x));
            case WeightKind::PolynomialProduct: return product_factor(std::abs(x));
            case WeightKind::Tabulated: return interpolate(x);
        }
        return 1.0;
    }

    /// log w(x). The catalogue weights overflow the double range well inside
    /// the probe window (exp(x^2/2) at |x| > 37.6), so every growth check
    /// works on this form.
    double log_value(double x) const {
        switch (kind_) {
            case WeightKind::GaussExp: return 0.5 * x * x;
            case WeightKind::ExpLinear: return std::abs(x);
            default: return std::log((*this)(x));
        }
    }

    /// Symmetry and positivity on a symmetric probe grid, in the log domain.
    void validate(double span = 40.0, int half_points = 1024) const {
        for (int j = 0; j <= half_points; ++j) {
            double u = span * j / half_points;
            double a = log_value(u), b = log_value(-u);
            if (!std::isfinite(a)) throw DataError("weight not positive/finite at x=" + std::to_string(u));
            if (std::abs(a - b) > 1e-12 * std::max({std::abs(a), std::abs(b), 1.0}))
                throw DataError("weight not symmetric at x=" + std::to_string(u));
        }
    }

private:
    explicit Weight(WeightKind k) : kind_(k) {}

    double product_factor(double u) const {
        const double p = params_[0];
        const double n_axes = params_[1];
        const double log1u = std::log1p(u);
        const std::size_t k_max = params_.size() - 2;
        double sum = 0.0;
        for (std::size_t k = 1; k <= k_max; ++k) {
            double log_b = params_[k + 1];
            double kk = static_cast<double>(k);
            sum += std::exp(-kk * M_LN2 + (kk * log1u - log_b) / n_axes);
        }
        if (p == 1.0) return sum;
        const double pprime = p / (p - 1.0);
        return std::pow(sum, 1.0 / p) * std::pow(1.0 + u, -2.0 / pprime);
    }

    double interpolate(double x) const {
        if (x <= tab_x_.front()) return tab_w_.front();
        if (x >= tab_x_.back()) return tab_w_.back();
        auto it = std::upper_bound(tab_x_.begin(), tab_x_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - tab_x_.begin());
        double t = (x - tab_x_[i - 1]) / (tab_x_[i] - tab_x_[i - 1]);
        return tab_w_[i - 1] + t * (tab_w_[i] - tab_w_[i - 1]);
    }

    WeightKind kind_;
    std::vector<double> params_;
    std::vector<double> tab_x_, tab_w_;
};

/// One row of the fast-growth report: the probe supremum of (1+|x|)^m / w(x),
/// where it is attained, and whether the ratio keeps decreasing past the
/// argmax (the checkable finite-window form of sup < inf over the line).
struct FastGrowthEntry {
    int m = 0;
    double supremum = 0.0;
    double argmax = 0.0;
    bool interior = false;
    bool decreasing_tail = false;
    bool pass = false;
};

struct FastGrowthReport {
    std::vector<FastGrowthEntry> entries;
    bool pass = false;
};

inline FastGrowthReport check_fast_growth(const Weight& w, int m_max, double span = 40.0,
                                          int points = 2048) {
    if (m_max < 1) throw ConfigError("m_max must be >= 1");
    w.validate(span, points / 2);
    const int half = points / 2;
    FastGrowthReport report;
    report.pass = true;
    for (int m = 1; m <= m_max; ++m) {
        FastGrowthEntry e;
        e.m = m;
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = 0;
        std::vector<double> log_ratio(half + 1);
        for (int j = 0; j <= half; ++j) {
            double u = span * j / half;
            log_ratio[j] = m * std::log1p(u) - w.log_value(u);
            if (log_ratio[j] > best) {
                best = log_ratio[j];
                best_idx = j;
            }
        }
        e.supremum = std::exp(best);
        e.argmax = span * best_idx / half;
        e.interior = best_idx < half;
        // past the argmax the ratio must stay below the supremum; probe and
        // interpolation noise gets a small log-domain allowance
        e.decreasing_tail = true;
        for (int j = best_idx + 1; j <= half; ++j)
            if (log_ratio[j] > best + 1e-6) {
                e.decreasing_tail = false;
                break;
            }
        e.pass = std::isfinite(best) && e.interior && e.decreasing_tail;
        report.pass = report.pass && e.pass;
        report.entries.push_back(e);
    }
    return report;
}

/// B_k = sup (1+|x|)^k / w(x), in closed form for the catalogue weights and
/// from the probe grid (rounded up) otherwise. Returned as log B_k so the
/// product-weight series can be evaluated without overflow. Rounding B_k up
/// keeps the pointwise bound v-tilde <= w strict.
inline std::vector<double> growth_suprema_log(const Weight& w, int k_max) {
    std::vector<double> log_b(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        double lb;
        switch (w.kind()) {
            case WeightKind::ExpLinear: {
                double u = k - 1.0;
                lb = k * std::log1p(u) - u;
                break;
            }
            case WeightKind::GaussExp: {
                double u = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * k));
                lb = k * std::log1p(u) - 0.5 * u * u;
                break;
            }
            default: {
                double best = -std::numeric_limits<double>::infinity();
                const int half = 4096;
                for (int j = 0; j <= half; ++j) {
                    double u = 40.0 * j / half;
                    best = std::max(best, k * std::log1p(u) - w.log_value(u));
                }
                lb = best + 1e-2; // probe-resolution safety margin
                break;
            }
        }
        if (!std::isfinite(lb)) throw DataError("B_k infinite: weight fails the growth condition");
        log_b[static_cast<std::size_t>(k - 1)] = lb;
    }
    return log_b;
}

} // namespace heatbasis

#endif
