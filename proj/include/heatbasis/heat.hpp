#ifndef HEATBASIS_HEAT_HPP
#define HEATBASIS_HEAT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "heatbasis/functionals.hpp"

namespace heatbasis {

/// Physicists' Hermite polynomial H_k(u).
inline double hermite(int k, double u) {
    if (k == 0) return 1.0;
    double h0 = 1.0, h1 = 2.0 * u;
    for (int j = 1; j < k; ++j) {
        double h2 = 2.0 * u * h1 - 2.0 * j * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

/// Heat evolution of half-line data with the mass-conserving kernel
/// (4 pi t)^{-1/2} exp(-(x-y)^2 / 4t). Piecewise constants evolve in closed
/// form through error-function differences; transferred-frame data evolves by
/// cellwise quadrature of the cached measure f(y) dy.
class HeatEvolver {
public:
    HeatEvolver(GridFunction f, std::shared_ptr<const WeightedModel> model)
        : f_(std::move(f)), model_(std::move(model)) {
        f_.check_finite();
        const auto& grid = model_->grid();
        if (f_.side == Side::NegativeHalfline) {
            // erf route over the finite cells; cell 0 through the measure
            nodes_.resize(grid.cells() + 1);
            for (std::size_t i = 0; i <= grid.cells(); ++i) nodes_[i] = grid.log_node(i);
            if (f_[0] != 0.0) {
                GridFunction head(f_.grid, Side::UnitInterval);
                head[0] = f_[0];
                head_measure_ = halfline_measure(head, *model_);
            }
        } else {
            measure_ = halfline_measure(f_, *model_);
        }
        // support bounds of the data
        lo_ = 0.0;
        hi_ = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < f_.size(); ++i)
            if (f_[i] != 0.0) {
                double cell_lo = (i == 0) ? grid.x_min() - 50.0 : grid.log_node(i);
                if (!any) lo_ = cell_lo;
                hi_ = grid.log_node(i + 1);
                any = true;
            }
        if (!any) lo_ = hi_ = grid.x_min();
    }

    const GridFunction& data() const { return f_; }
    const WeightedModel& model() const { return *model_; }
    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }

    /// int f dy.
    double mass() const {
        if (f_.side == Side::UnitInterval) return measure_.integrate([](double) { return 1.0; });
        double acc = 0.0;
        for (std::size_t i = 1; i < f_.size(); ++i)
            if (f_[i] != 0.0) acc += f_[i] * (nodes_[i + 1] - nodes_[i]);
        acc += head_measure_.integrate([](double) { return 1.0; });
        return acc;
    }

    /// u(x,t).
    double evaluate(double x, double t) const {
        if (!(t > 0.0)) throw DomainError("heat evolution requires t > 0");
        const double root = 2.0 * std::sqrt(t);
        if (f_.side == Side::UnitInterval) {
            const double pref = 1.0 / std::sqrt(4.0 * M_PI * t);
            double acc = 0.0;
            for (std::size_t q = 0; q < measure_.points.size(); ++q) {
                double z = (x - measure_.points[q]) / root;
                acc += measure_.weights[q] * std::exp(-z * z);
            }
            return pref * acc;
        }
        double acc = 0.0;
        for (std::size_t i = 1; i < f_.size(); ++i) {
            if (f_[i] == 0.0) continue;
            double ea = std::erf((x - nodes_[i]) / root);
            double eb = std::erf((x - nodes_[i + 1]) / root);
            acc += 0.5 * f_[i] * (ea - eb);
        }
        if (!head_measure_.points.empty()) {
            const double pref = 1.0 / std::sqrt(4.0 * M_PI * t);
            for (std::size_t q = 0; q < head_measure_.points.size(); ++q) {
                double z = (x - head_measure_.points[q]) / root;
                acc += pref * head_measure_.weights[q] * std::exp(-z * z);
            }
        }
        return acc;
    }

private:
    GridFunction f_;
    std::shared_ptr<const WeightedModel> model_;
    std::vector<double> nodes_;
    HalflineMeasure measure_, head_measure_;
    double lo_ = 0.0, hi_ = 0.0;
};

inline double heat_evolve(const GridFunction& f, std::shared_ptr<const WeightedModel> model,
                          double t, double x) {
    if (!(t > 0.0)) throw DomainError("heat evolution requires t > 0");
    return HeatEvolver(f, std::move(model)).evaluate(x, t);
}

/// Sup norm of u(.,t) over the support dilated by 8 sqrt(t), sampled at 50
/// points per diffusion length sqrt(t); doubling the grid moves the result by
/// less than a tenth of a percent.
inline double sup_norm_at(const HeatEvolver& ev, double t, double refine = 1.0) {
    if (!(t >= 1.0)) throw DomainError("sup-norm schedule starts at t = 1");
    const double pad = 8.0 * std::sqrt(t);
    const double lo = ev.support_lo() - pad;
    const double hi = ev.support_hi() + pad;
    const double h = (std::sqrt(t) / 50.0) / refine;
    const std::size_t n = static_cast<std::size_t>(std::ceil((hi - lo) / h));
    double best = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        double u = std::abs(ev.evaluate(lo + (hi - lo) * static_cast<double>(i) / n, t));
        if (u > best) best = u;
    }
    return best;
}

/// Geometric time schedule t_i = t0 * ratio^i.
struct TimeSchedule {
    double t0 = 1.0;
    double ratio = 2.0;
    int count = 20;

    std::vector<double> values() const {
        if (t0 < 1.0) throw ConfigError("the decay bounds hold from t = 1; t0 must be >= 1");
        if (ratio <= 1.0 || count < 2) throw ConfigError("schedule needs ratio > 1 and count >= 2");
        std::vector<double> v(static_cast<std::size_t>(count));
        double t = t0;
        for (auto& e : v) {
            e = t;
            t *= ratio;
        }
        return v;
    }
};

/// Decay measurement: sup norms along the schedule, the log-log slope fitted
/// on the last half, and the plateau diagnostics of t^{(1+m)/2} ||u||_inf.
struct DecayReport {
    TimeSchedule schedule;
    std::vector<double> times;
    std::vector<double> sup_norms;
    double fitted_slope = 0.0;
    double theoretical_exponent = 0.0;
    double residual_of_fit = 0.0;
    double scaled_plateau_ratio = 1.0; // max over the fitted window of t^{(1+m)/2}||u||, relative to its end value
    bool degenerate = false; // identically zero data
    bool truncated = false;  // sup norm underflow cut the schedule
    bool verdict = false;
};

/// Least squares on (log t, log sup) over the last half of the schedule plus
/// the plateau diagnostic of t^{-exponent} ||u||_inf over the same window.
inline void finish_decay_report(DecayReport& rep) {
    bool all_zero = true;
    for (double s : rep.sup_norms) all_zero = all_zero && s == 0.0;
    if (all_zero || rep.times.size() < 2) {
        rep.degenerate = true;
        rep.verdict = true;
        return;
    }
    const std::size_t n = rep.times.size();
    const std::size_t start = n / 2;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = start; i < n; ++i) {
        double lx = std::log(rep.times[i]), ly = std::log(rep.sup_norms[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    double denom = cnt * sxx - sx * sx;
    rep.fitted_slope = (cnt * sxy - sx * sy) / denom;
    double intercept = (sy - rep.fitted_slope * sx) / cnt;
    double rss = 0.0;
    for (std::size_t i = start; i < n; ++i) {
        double e = std::log(rep.sup_norms[i]) - (intercept + rep.fitted_slope * std::log(rep.times[i]));
        rss += e * e;
    }
    rep.residual_of_fit = std::sqrt(rss / cnt);

    double scaled_max = 0.0, scaled_last = 0.0;
    for (std::size_t i = start; i < n; ++i) {
        double s = std::pow(rep.times[i], -rep.theoretical_exponent) * rep.sup_norms[i];
        scaled_max = std::max(scaled_max, s);
        scaled_last = s;
    }
    rep.scaled_plateau_ratio = scaled_last > 0.0 ? scaled_max / scaled_last : 1.0;
    rep.verdict = rep.fitted_slope <= rep.theoretical_exponent + 0.1 && rep.residual_of_fit <= 0.02;
}

inline DecayReport decay_fit(const HeatEvolver& ev, const TimeSchedule& schedule, int m_expected) {
    DecayReport rep;
    rep.schedule = schedule;
    rep.theoretical_exponent = -(1.0 + m_expected) / 2.0;
    for (double t : schedule.values()) {
        double s = sup_norm_at(ev, t);
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

/// Residual of the integration-by-parts expansion of the solution: after m
/// partial integrations the kernel turns into Hermite-weighted Gaussians
/// against I^m f. Requires J^k f = 0 for k <= m so the boundary terms vanish.
struct ExpansionCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    std::vector<int> violated_moments;
    bool pass = false;
};

inline ExpansionCheck verify_prop13_expansion(const GridFunction& f,
                                              std::shared_ptr<const WeightedModel> model, int m,
                                              double t, double x) {
    if (!(t > 0.0)) throw DomainError("expansion check requires t > 0");
    ExpansionCheck chk;
    const auto& grid = model->grid();
    double scale = std::max(1.0, model->norm(f));
    for (int k = 1; k <= m; ++k)
        if (std::abs(moment_functional(f, k, *model)) > 1e-8 * scale)
            chk.violated_moments.push_back(k);
    if (!chk.violated_moments.empty()) return chk;

    HeatEvolver ev(f, model);
    chk.lhs = ev.evaluate(x, t);

    const double root = 2.0 * std::sqrt(t);
    double acc = 0.0;
    if (m == 0) {
        // zero partial integrations: the expansion is the definition itself
        for (std::size_t i = 1; i < f.size(); ++i) {
            if (f[i] == 0.0) continue;
            acc += f[i] * gl_integrate(grid.log_node(i), grid.log_node(i + 1), [&](double y) {
                double u = (x - y) / root;
                return std::exp(-u * u);
            }, 12);
        }
        chk.rhs = acc / std::sqrt(4.0 * M_PI * t);
    } else {
        // I^m f vanishes left of the support and, by the vanishing moments,
        // right of it as well; integrate the Hermite-Gaussian kernel across it
        const double pref = ((m % 2 == 0) ? 1.0 : -1.0) /
                            (std::sqrt(4.0 * M_PI * t) * std::pow(root, m));
        auto integrand = [&](double y) {
            double u = (x - y) / root;
            return hermite(m, u) * std::exp(-u * u) * iterated_integral(f, m, y, *model);
        };
        for (std::size_t i = 1; i < f.size(); ++i) {
            double a = grid.log_node(i), b = grid.log_node(i + 1);
            if (b <= ev.support_lo()) continue;
            if (a >= ev.support_hi()) break;
            acc += gl_integrate(a, b, integrand, 12);
        }
        chk.rhs = pref * acc;
    }
    chk.residual = std::abs(chk.lhs - chk.rhs);
    chk.pass = chk.residual <= 1e-8 * (1.0 + std::abs(chk.lhs));
    return chk;
}

/// Piecewise-constant data with exactly vanishing moments J^1..J^m on the
/// grid: m+1 unit blocks on [-(m+2), -1] with coefficients solving the
/// moment system, the leading coefficient normalized to 1.
inline GridFunction balanced_multipole(std::shared_ptr<const DyadicGrid> grid,
                                       const WeightedModel& model, int m) {
    if (m < 0) throw ConfigError("multipole order must be >= 0");
    const int blocks = m + 1;
    if (grid->x_min() > -static_cast<double>(blocks + 1))
        throw ConfigError("grid truncation too shallow for this multipole order");
    std::vector<GridFunction> parts;
    for (int r = 0; r < blocks; ++r) {
        double b = -static_cast<double>(r + 1);
        double a = b - 1.0;
        parts.push_back(halfline_indicator(grid, a, b).f);
    }
    // moment matrix M_{k,r} = J^k(part_r), k = 1..m
    const int n = blocks;
    std::vector<double> mat(static_cast<std::size_t>(n) * n, 0.0), rhs(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k <= m; ++k)
        for (int r = 0; r < n; ++r)
            mat[static_cast<std::size_t>(k - 1) * n + r] = moment_functional(parts[static_cast<std::size_t>(r)], k, model);
    for (int r = 0; r < n; ++r) mat[static_cast<std::size_t>(n - 1) * n + r] = (r == 0) ? 1.0 : 0.0;
    rhs[static_cast<std::size_t>(n - 1)] = 1.0;
    // Gaussian elimination with partial pivoting
    std::vector<int> piv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) piv[static_cast<std::size_t>(i)] = i;
    for (int c = 0; c < n; ++c) {
        int pr = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(mat[static_cast<std::size_t>(r) * n + c]) >
                std::abs(mat[static_cast<std::size_t>(pr) * n + c]))
                pr = r;
        if (mat[static_cast<std::size_t>(pr) * n + c] == 0.0)
            throw InternalError("degenerate multipole moment system");
        if (pr != c) {
            for (int j = 0; j < n; ++j)
                std::swap(mat[static_cast<std::size_t>(c) * n + j], mat[static_cast<std::size_t>(pr) * n + j]);
            std::swap(rhs[static_cast<std::size_t>(c)], rhs[static_cast<std::size_t>(pr)]);
        }
        for (int r = c + 1; r < n; ++r) {
            double f = mat[static_cast<std::size_t>(r) * n + c] / mat[static_cast<std::size_t>(c) * n + c];
            for (int j = c; j < n; ++j)
                mat[static_cast<std::size_t>(r) * n + j] -= f * mat[static_cast<std::size_t>(c) * n + j];
            rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(c)];
        }
    }
    std::vector<double> coef(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        double v = rhs[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) v -= mat[static_cast<std::size_t>(i) * n + j] * coef[static_cast<std::size_t>(j)];
        coef[static_cast<std::size_t>(i)] = v / mat[static_cast<std::size_t>(i) * n + i];
    }
    GridFunction out(grid, Side::NegativeHalfline);
    for (int r = 0; r < n; ++r)
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += coef[static_cast<std::size_t>(r)] * parts[static_cast<std::size_t>(r)][i];
    return out;
}

} // namespace heatbasis

#endif
