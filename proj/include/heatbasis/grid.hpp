#ifndef HEATBASIS_GRID_HPP
#define HEATBASIS_GRID_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "heatbasis/common.hpp"

namespace heatbasis {

/// Where the cell values of a GridFunction are read.
///
/// UnitInterval: piecewise-constant on the dyadic cells of (0,1].
/// NegativeHalfline: piecewise-constant in x on the log-pullback cells
/// (log s_i, log s_{i+1}] of (-inf,0]. Cell 0 is the sub-truncation remnant
/// (-inf, log 2^-K]; a constant there is not integrable against a fast-growing
/// weight, so on cell 0 the value is read in the transferred frame (see
/// functionals.hpp). Constructors of half-line data leave cell 0 at zero.
enum class Side { UnitInterval, NegativeHalfline };

/// Dyadic partition of (0,1] at level K: 2^K half-open cells
/// A_i = (i 2^-K, (i+1) 2^-K], plus the pullback nodes log(s_i) on the
/// negative half-line. The x-grid is truncated at x_min = log 2^-K.
class DyadicGrid {
public:
    explicit DyadicGrid(int level) : level_(level) {
        if (level < 1 || level > 24)
            throw ConfigError("dyadic grid level must be in [1,24], got " + std::to_string(level));
        cells_ = std::size_t(1) << level;
    }

    int level() const { return level_; }
    std::size_t cells() const { return cells_; }
    double cell_width() const { return 1.0 / static_cast<double>(cells_); }

    /// s_i = i 2^-K, i = 0..2^K (exact in binary floating point).
    double s_node(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(cells_); }

    double s_mid(std::size_t i) const {
        return (static_cast<double>(i) + 0.5) / static_cast<double>(cells_);
    }

    /// log s_i; -inf for i = 0, exactly 0 for i = 2^K.
    double log_node(std::size_t i) const {
        if (i == 0) return -std::numeric_limits<double>::infinity();
        if (i == cells_) return 0.0;
        return std::log(s_node(i));
    }

    /// Truncation point of the half-line model.
    double x_min() const { return log_node(1); }

    /// Index of the cell containing s in (0,1] (half-open cells, ties to the
    /// lower cell so every point belongs to exactly one cell).
    std::size_t cell_of_s(double s) const {
        if (!(s > 0.0) || s > 1.0) throw IndexError("point outside (0,1]");
        double scaled = s * static_cast<double>(cells_);
        std::size_t i = static_cast<std::size_t>(std::ceil(scaled)) - 1;
        if (i >= cells_) i = cells_ - 1;
        return i;
    }

    std::size_t cell_of_x(double x) const {
        if (x > 0.0) throw IndexError("point outside (-inf,0]");
        return cell_of_s(std::exp(x));
    }

private:
    int level_;
    std::size_t cells_;
};

inline std::shared_ptr<const DyadicGrid> make_dyadic_grid(int level) {
    return std::make_shared<const DyadicGrid>(level);
}

/// Piecewise-constant function on a dyadic grid, tagged with the side its
/// values are read on.
struct GridFunction {
    std::shared_ptr<const DyadicGrid> grid;
    Side side = Side::UnitInterval;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(std::shared_ptr<const DyadicGrid> g, Side s)
        : grid(std::move(g)), side(s), values(grid->cells(), 0.0) {}
    GridFunction(std::shared_ptr<const DyadicGrid> g, Side s, std::vector<double> v)
        : grid(std::move(g)), side(s), values(std::move(v)) {
        if (values.size() != grid->cells()) throw DataError("value count does not match grid");
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    void check_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) throw DataError("grid function has non-finite values");
    }
};

inline GridFunction zero_function(std::shared_ptr<const DyadicGrid> g, Side s) {
    return GridFunction(std::move(g), s);
}

/// Indicator of [a,b] on the half-line, snapped to the log grid: a cell gets
/// value 1 when its x-interval is contained in [a,b]. Cell 0 stays 0 (the
/// model truncates at x_min). Returns the snapped support [lo,hi] so callers
/// can build exact oracles on the realized support.
struct SnappedIndicator {
    GridFunction f;
    double lo = 0.0, hi = 0.0;
};

inline SnappedIndicator halfline_indicator(std::shared_ptr<const DyadicGrid> g, double a, double b) {
    if (a >= b || b > 0.0) throw DataError("indicator interval must satisfy a < b <= 0");
    SnappedIndicator out;
    out.f = GridFunction(g, Side::NegativeHalfline);
    out.lo = 0.0;
    out.hi = 0.0;
    bool any = false;
    const double eps = 1e-12;
    for (std::size_t i = 1; i < g->cells(); ++i) {
        double lo = g->log_node(i), hi = g->log_node(i + 1);
        if (lo >= a - eps && hi <= b + eps) {
            out.f[i] = 1.0;
            if (!any) out.lo = lo;
            out.hi = hi;
            any = true;
        }
    }
    if (!any) throw DataError("indicator interval resolves to no whole cell at this level");
    return out;
}

/// Random piecewise-constant function with values uniform in [-1,1].
/// For half-line data cell 0 is left at zero.
inline GridFunction random_function(std::shared_ptr<const DyadicGrid> g, Side side, Rng& rng) {
    GridFunction f(g, side);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform(-1.0, 1.0);
    if (side == Side::NegativeHalfline) f[0] = 0.0;
    return f;
}

/// Plain L^p(0,1) norm of a unit-interval grid function.
inline double unit_lp_norm(const GridFunction& f, double p) {
    if (p < 1.0) throw DataError("p must be >= 1");
    const double w = f.grid->cell_width();
    double acc = 0.0;
    for (double v : f.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * w, 1.0 / p);
}

inline double unit_l1_norm(const GridFunction& f) {
    const double w = f.grid->cell_width();
    double acc = 0.0;
    for (double v : f.values) acc += std::abs(v);
    return acc * w;
}

} // namespace heatbasis

#endif
