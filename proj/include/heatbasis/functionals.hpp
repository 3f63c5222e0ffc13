#ifndef HEATBASIS_FUNCTIONALS_HPP
#define HEATBASIS_FUNCTIONALS_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "heatbasis/grid.hpp"
#include "heatbasis/quadrature.hpp"
#include "heatbasis/weight.hpp"

namespace heatbasis {

inline double inv_factorial(int m) {
    double f = 1.0;
    for (int k = 2; k <= m; ++k) f *= k;
    return 1.0 / f;
}

/// Grid + weight + exponent with every cell measure the operators need.
///
/// Two function families live on the same coefficient vectors:
///  - unit-interval values h_i: the half-line function sum h_i phi_i with
///    phi_i = (e^x / w(x)) 1_{x-cell i}, i.e. the inverse transfer of the
///    piecewise-constant h. Its weighted p-norm is the diagonal sum
///    (sum |h_i|^p omega_i)^{1/p} with omega_i = int_cell s^{p-1} w(log s)^{1-p} ds.
///    For p = 1, omega_i equals the cell width exactly, so the transfer is an
///    exact isometry onto L^1(0,1), matching the continuous statement.
///  - half-line values f_i: piecewise constant in x on the log cells; cell 0
///    (below the truncation point) is read in the transferred frame, which is
///    the only reading with finite weighted mass there.
class WeightedModel {
public:
    WeightedModel(std::shared_ptr<const DyadicGrid> grid, Weight weight, double p, int order = 8)
        : grid_(std::move(grid)), weight_(std::move(weight)), p_(p), order_(order) {
        if (p < 1.0) throw DomainError("p must be >= 1");
        const std::size_t dim = grid_->cells();
        const double ds = grid_->cell_width();
        frame_.assign(dim, 0.0);
        mass_.assign(dim, 0.0);
        tau_.assign(dim, 1.0);

        for (std::size_t i = 0; i < dim; ++i) {
            if (p_ == 1.0) {
                frame_[i] = ds;
            } else {
                double a = grid_->s_node(i), b = grid_->s_node(i + 1);
                frame_[i] = gl_integrate(a, b, [&](double s) {
                    return std::pow(s, p_ - 1.0) * std::pow(weight_(std::log(s)), 1.0 - p_);
                }, order_);
            }
        }
        mass_[0] = ds; // transferred-frame convention below the truncation point
        for (std::size_t i = 1; i < dim; ++i) {
            double a = grid_->log_node(i), b = grid_->log_node(i + 1);
            mass_[i] = gl_integrate(a, b, [&](double x) { return weight_(x); }, order_);
            tau_[i] = mass_[i] / ds;
        }
    }

    const DyadicGrid& grid() const { return *grid_; }
    std::shared_ptr<const DyadicGrid> grid_ptr() const { return grid_; }
    const Weight& weight() const { return weight_; }
    double p() const { return p_; }
    std::size_t dim() const { return grid_->cells(); }

    /// omega_i: coefficient weights of the transferred-frame p-norm.
    const std::vector<double>& frame_weights() const { return frame_; }
    /// W_i = int_{x-cell} w dx (W_0 = cell width by the truncation convention).
    const std::vector<double>& cell_masses() const { return mass_; }
    /// Transfer factors tau_i = W_i / cell width.
    const std::vector<double>& transfer_factors() const { return tau_; }

    /// Weighted p-norm of a coefficient vector in the transferred frame.
    double coeff_norm(const std::vector<double>& h) const {
        double acc = 0.0;
        if (p_ == 1.0) {
            for (std::size_t i = 0; i < h.size(); ++i) acc += std::abs(h[i]) * frame_[i];
            return acc;
        }
        for (std::size_t i = 0; i < h.size(); ++i) acc += std::pow(std::abs(h[i]), p_) * frame_[i];
        return std::pow(acc, 1.0 / p_);
    }

    double coeff_ip(const std::vector<double>& u, const std::vector<double>& v) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i] * frame_[i];
        return acc;
    }

    /// ||f||_{p,w} for either representation.
    double norm(const GridFunction& f) const {
        f.check_finite();
        if (f.side == Side::UnitInterval) return coeff_norm(f.values);
        double acc = std::pow(std::abs(f[0]), p_) * frame_[0];
        for (std::size_t i = 1; i < f.size(); ++i) acc += std::pow(std::abs(f[i]), p_) * mass_[i];
        return std::pow(acc, 1.0 / p_);
    }

    /// Pairing weights Gamma^{(m)}_i = int_{s-cell} g_m ds of the moment
    /// functional of order m, cached per order.
    const std::vector<double>& moment_pairing(int m) const {
        auto it = pairing_cache_.find(m);
        if (it != pairing_cache_.end()) return it->second;
        const std::size_t dim = grid_->cells();
        std::vector<double> gamma(dim, 0.0);
        const double c = inv_factorial(m - 1);
        gamma[0] = cell0_integral([&](double x) { return c * std::pow(-x, m - 1); });
        for (std::size_t i = 1; i < dim; ++i) {
            double a = grid_->s_node(i), b = grid_->s_node(i + 1);
            gamma[i] = gl_integrate(a, b, [&](double s) {
                double x = std::log(s);
                return c * std::pow(-x, m - 1) / weight_(x);
            }, order_);
        }
        return pairing_cache_.emplace(m, std::move(gamma)).first->second;
    }

    /// int_{-inf}^{x_min} phi(x) e^x / w(x) dx: the transferred-frame measure
    /// of cell 0 against phi; the integrand decays at least like e^x.
    template <typename F>
    double cell0_integral(F&& phi, double upper = 0.0) const {
        double hi = grid_->x_min();
        if (upper != 0.0) hi = std::min(hi, upper);
        double lo = grid_->x_min() - 50.0;
        if (hi <= lo) return 0.0;
        return gl_integrate_panels(lo, hi, 1.0, [&](double x) {
            return phi(x) * std::exp(x) / weight_(x);
        }, order_);
    }

private:
    std::shared_ptr<const DyadicGrid> grid_;
    Weight weight_;
    double p_;
    int order_;
    std::vector<double> frame_, mass_, tau_;
    mutable std::map<int, std::vector<double>> pairing_cache_;
};

/// Free-standing weighted norm with selectable quadrature order (the cached
/// model uses order 8; tests compare orders).
inline double weighted_norm(const GridFunction& f, double p, const Weight& w, int order = 8) {
    if (p < 1.0) throw DomainError("p must be >= 1");
    WeightedModel model(f.grid, w, p, order);
    return model.norm(f);
}

/// S f with (Sf)(s) = f(alpha(s)) w(alpha(s)) / s, realised per cell through
/// the exact cell masses so that ||Sf||_{L1(0,1)} = ||f||_{1,w} holds to
/// quadrature accuracy and the round trip with transfer_inverse is exact.
inline GridFunction transfer(const GridFunction& f, const WeightedModel& model) {
    if (f.side != Side::NegativeHalfline) throw DataError("transfer expects a half-line function");
    GridFunction h(f.grid, Side::UnitInterval);
    const auto& tau = model.transfer_factors();
    for (std::size_t i = 0; i < f.size(); ++i) h[i] = f[i] * tau[i];
    return h;
}

/// S^{-1} h with f(x) = h(e^x) e^x / w(x) sampled per cell.
inline GridFunction transfer_inverse(const GridFunction& h, const WeightedModel& model) {
    if (h.side != Side::UnitInterval) throw DataError("transfer_inverse expects a unit-interval function");
    GridFunction f(h.grid, Side::NegativeHalfline);
    const auto& tau = model.transfer_factors();
    for (std::size_t i = 0; i < h.size(); ++i) f[i] = h[i] / tau[i];
    return f;
}

/// Flattened quadrature representation of the measure f(y) dy on the
/// half-line: points y_q with weights mu_q such that
/// int phi f dy ~= sum mu_q phi(y_q). Built once per function, reused by the
/// convolution-type operators.
struct HalflineMeasure {
    std::vector<double> points;
    std::vector<double> weights;

    template <typename F>
    double integrate(F&& phi) const {
        double acc = 0.0;
        for (std::size_t q = 0; q < points.size(); ++q) acc += weights[q] * phi(points[q]);
        return acc;
    }

    template <typename F>
    double integrate_below(double x, F&& phi) const {
        double acc = 0.0;
        for (std::size_t q = 0; q < points.size(); ++q)
            if (points[q] <= x) acc += weights[q] * phi(points[q]);
        return acc;
    }
};

inline HalflineMeasure halfline_measure(const GridFunction& f, const WeightedModel& model, int order = 8) {
    const auto& grid = model.grid();
    const GaussRule& rule = gauss_legendre(order);
    HalflineMeasure m;
    m.points.reserve(f.size() * rule.nodes.size());
    m.weights.reserve(f.size() * rule.nodes.size());

    auto add_transferred_cell = [&](double lo, double hi, double coeff) {
        // measure coeff * e^y / w(y) dy over [lo, hi]
        if (coeff == 0.0) return;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            double y = mid + half * rule.nodes[q];
            m.points.push_back(y);
            m.weights.push_back(coeff * rule.weights[q] * half * std::exp(y) / model.weight()(y));
        }
    };

    // cell 0: transferred frame, panels below the truncation point
    if (f[0] != 0.0) {
        double hi = grid.x_min();
        for (int panel = 0; panel < 50; ++panel) add_transferred_cell(hi - panel - 1.0, hi - panel, f[0]);
    }
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (f[i] == 0.0) continue;
        double lo = grid.log_node(i), hi = grid.log_node(i + 1);
        if (f.side == Side::UnitInterval) {
            add_transferred_cell(lo, hi, f[i]);
        } else {
            // plain Lebesgue measure of a piecewise constant
            double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                m.points.push_back(mid + half * rule.nodes[q]);
                m.weights.push_back(f[i] * rule.weights[q] * half);
            }
        }
    }
    return m;
}

/// J^m f = (1/(m-1)!) int_{-inf}^0 (-y)^{m-1} f(y) dy, the direct route.
/// Piecewise constants integrate the polynomial kernel in closed form; the
/// transferred frame integrates in the y variable by cellwise quadrature
/// (independent of the s-variable pairing weights used by Phi_g).
inline double moment_functional(const GridFunction& f, int m, const WeightedModel& model) {
    if (m < 1) throw DomainError("moment order must be >= 1");
    const auto& grid = model.grid();
    const double c = inv_factorial(m);
    double acc = 0.0;
    if (f.side == Side::NegativeHalfline) {
        for (std::size_t i = 1; i < f.size(); ++i) {
            if (f[i] == 0.0) continue;
            double a = grid.log_node(i), b = grid.log_node(i + 1);
            acc += f[i] * c * (std::pow(-a, m) - std::pow(-b, m));
        }
        if (f[0] != 0.0) {
            double ci = inv_factorial(m - 1);
            acc += f[0] * model.cell0_integral([&](double y) { return ci * std::pow(-y, m - 1); });
        }
        return acc;
    }
    // transferred frame: quadrature in y per cell
    const double ci = inv_factorial(m - 1);
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (f[i] == 0.0) continue;
        double a = grid.log_node(i), b = grid.log_node(i + 1);
        acc += f[i] * gl_integrate(a, b, [&](double y) {
            return ci * std::pow(-y, m - 1) * std::exp(y) / model.weight()(y);
        }, 8);
    }
    if (f[0] != 0.0)
        acc += f[0] * model.cell0_integral([&](double y) { return ci * std::pow(-y, m - 1); });
    return acc;
}

/// I^m f(x) = (1/(m-1)!) int_{-inf}^x (x-y)^{m-1} f(y) dy for x <= 0.
inline double iterated_integral(const GridFunction& f, int m, double x, const WeightedModel& model) {
    if (m < 1) throw DomainError("iterated integral order must be >= 1");
    if (x > 0.0) throw DomainError("iterated_integral expects x <= 0; mirror the data for the positive half-line");
    const auto& grid = model.grid();
    const double cm = inv_factorial(m);
    const double ci = inv_factorial(m - 1);
    double acc = 0.0;
    if (f.side == Side::NegativeHalfline) {
        for (std::size_t i = 1; i < f.size(); ++i) {
            if (f[i] == 0.0) continue;
            double a = grid.log_node(i);
            if (a >= x) break;
            double b = std::min(grid.log_node(i + 1), x);
            acc += f[i] * cm * (std::pow(x - a, m) - std::pow(x - b, m));
        }
        if (f[0] != 0.0)
            acc += f[0] * model.cell0_integral([&](double y) { return ci * std::pow(x - y, m - 1); }, x);
        return acc;
    }
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (f[i] == 0.0) continue;
        double a = grid.log_node(i);
        if (a >= x) break;
        double b = std::min(grid.log_node(i + 1), x);
        acc += f[i] * gl_integrate(a, b, [&](double y) {
            return ci * std::pow(x - y, m - 1) * std::exp(y) / model.weight()(y);
        }, 8);
    }
    if (f[0] != 0.0)
        acc += f[0] * model.cell0_integral([&](double y) { return ci * std::pow(x - y, m - 1); }, x);
    return acc;
}

/// Moment functional of order m together with its representer g on [0,1]:
/// g(s) = (-log s)^{m-1} / ((m-1)! w(log s)), g(0) = 0. `g` holds midpoint
/// samples; `pairing` holds the exact per-cell integrals of g used when the
/// functional is applied to transferred-frame coefficients.
struct MomentFunctional {
    int order = 1;
    GridFunction g;
    std::vector<double> pairing;

    /// Phi_g(h) = int_0^1 h g ds with the midpoint-sampled representer.
    double phi_midpoint(const GridFunction& h) const {
        const double ds = h.grid->cell_width();
        double acc = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * g[i];
        return acc * ds;
    }

    /// Pairing with exact per-cell representer integrals.
    double phi(const std::vector<double>& h) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * pairing[i];
        return acc;
    }
};

inline double representer_value(int m, const Weight& w, double s) {
    if (s <= 0.0) return 0.0;
    double x = std::log(s);
    return inv_factorial(m - 1) * std::pow(-x, m - 1) / w(x);
}

inline MomentFunctional representer(int m, const WeightedModel& model) {
    if (m < 1) throw DomainError("moment order must be >= 1");
    MomentFunctional mf;
    mf.order = m;
    mf.g = GridFunction(model.grid_ptr(), Side::UnitInterval);
    for (std::size_t i = 0; i < mf.g.size(); ++i)
        mf.g[i] = representer_value(m, model.weight(), model.grid().s_mid(i));
    mf.pairing = model.moment_pairing(m);
    return mf;
}

/// Rapid-decrease report for I^m f: per k the probe supremum of
/// (1+|x|)^k |I^m f(x)| over the log nodes, its argmax, the ratio against
/// ||f||_{p,w}, and whether the supremum is stable under halving the node set.
struct RapidDecayEntry {
    int k = 0;
    double supremum = 0.0;
    double argmax = 0.0;
    double ratio_to_norm = 0.0;
    bool stable = false;
};

struct RapidDecayReport {
    std::vector<RapidDecayEntry> entries;
    bool pass = false;
};

inline RapidDecayReport rapid_decay_check(const GridFunction& f, int m, int k_max,
                                          const WeightedModel& model) {
    if (m < 1 || k_max < 1) throw DomainError("m and k_max must be >= 1");
    const auto& grid = model.grid();
    const std::size_t dim = grid.cells();
    std::vector<double> xs, vals;
    for (std::size_t i = 1; i <= dim; ++i) {
        double x = grid.log_node(i);
        xs.push_back(x);
        vals.push_back(iterated_integral(f, m, x, model));
    }
    double norm = model.norm(f);
    RapidDecayReport report;
    report.pass = true;
    for (int k = 1; k <= k_max; ++k) {
        RapidDecayEntry e;
        e.k = k;
        double sup_half = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double v = std::pow(1.0 + std::abs(xs[i]), k) * std::abs(vals[i]);
            if (v > e.supremum) {
                e.supremum = v;
                e.argmax = xs[i];
            }
            if (i % 2 == 0) sup_half = std::max(sup_half, v);
        }
        e.ratio_to_norm = norm > 0.0 ? e.supremum / norm : 0.0;
        e.stable = std::abs(e.supremum - sup_half) <= 1e-5 * (1.0 + e.supremum);
        report.pass = report.pass && std::isfinite(e.supremum) && e.stable;
        report.entries.push_back(e);
    }
    return report;
}

/// Vanishing-moment support check: verifies J^k f = 0 for k <= m, then
/// reports I^k f(0) (which the moment identities force to vanish, so the
/// polynomial continuation to x > 0 is identically zero) and ||I^k f||_1.
struct SupportCheckEntry {
    int k = 0;
    double moment = 0.0;
    double iterated_at_zero = 0.0;
    double l1_norm = 0.0;
};

struct SupportCheckResult {
    bool pass = false;
    std::vector<SupportCheckEntry> entries;
    std::vector<int> violated; // orders with J^k != 0
};

inline SupportCheckResult support_check(const GridFunction& f, int m, const WeightedModel& model,
                                        double tol = 1e-10) {
    SupportCheckResult res;
    double scale = std::max(1.0, model.norm(f));
    for (int k = 1; k <= m; ++k) {
        SupportCheckEntry e;
        e.k = k;
        e.moment = moment_functional(f, k, model);
        if (std::abs(e.moment) > tol * scale) res.violated.push_back(k);
        e.iterated_at_zero = iterated_integral(f, k, 0.0, model);
        const auto& grid = model.grid();
        double acc = 0.0;
        for (std::size_t i = 1; i < grid.cells(); ++i) {
            acc += gl_integrate(grid.log_node(i), grid.log_node(i + 1), [&](double x) {
                return std::abs(iterated_integral(f, k, x, model));
            }, 4);
        }
        e.l1_norm = acc;
        res.entries.push_back(e);
    }
    res.pass = res.violated.empty();
    if (res.pass)
        for (const auto& e : res.entries)
            if (std::abs(e.iterated_at_zero) > 1e-9 * scale) res.pass = false;
    return res;
}

} // namespace heatbasis

#endif
