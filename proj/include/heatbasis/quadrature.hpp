#ifndef HEATBASIS_QUADRATURE_HPP
#define HEATBASIS_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "heatbasis/common.hpp"

namespace heatbasis {

/// Gauss-Legendre rule on [-1,1]. Nodes are computed once by Newton iteration
/// on the Legendre polynomial (deterministic: fixed initial guesses, fixed
/// iteration count) and cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline const GaussRule& gauss_legendre(int order) {
    static std::map<int, GaussRule> cache;
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    GaussRule r;
    r.nodes.resize(order);
    r.weights.resize(order);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                // two polishing steps after convergence
                for (int j = 0; j < 2; ++j) {
                    p0 = 1.0;
                    p1 = x;
                    for (int k = 2; k <= n; ++k) {
                        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                        p0 = p1;
                        p1 = p2;
                    }
                    pp = n * (x * p1 - p0) / (x * x - 1.0);
                    x -= p1 / pp;
                }
                break;
            }
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.nodes[i] = -x;
        r.weights[i] = w;
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return cache.emplace(order, std::move(r)).first->second;
}

/// Integrate f over [a,b] with a single Gauss-Legendre panel.
template <typename F>
double gl_integrate(double a, double b, F&& f, int order = 8) {
    const GaussRule& r = gauss_legendre(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k)
        acc += r.weights[k] * f(mid + half * r.nodes[k]);
    return acc * half;
}

/// Composite rule: [a,b] split into panels of width at most h.
template <typename F>
double gl_integrate_panels(double a, double b, double h, F&& f, int order = 8) {
    if (b <= a) return 0.0;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
    const double step = (b - a) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += gl_integrate(a + i * step, a + (i + 1) * step, f, order);
    return acc;
}

} // namespace heatbasis

#endif
