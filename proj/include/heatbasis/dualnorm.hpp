#ifndef HEATBASIS_DUALNORM_HPP
#define HEATBASIS_DUALNORM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "heatbasis/basis.hpp"

namespace heatbasis {

/// Dual norm of a cell-pairing functional over the whole space: the weighted
/// coefficient norm is diagonal, so this is exact for every p >= 1.
inline double dual_norm_full(const std::vector<double>& z, const WeightedModel& model) {
    const auto& w = model.frame_weights();
    const double p = model.p();
    if (p == 1.0) {
        double best = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) best = std::max(best, std::abs(z[i]) / w[i]);
        return best;
    }
    if (p == 2.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) acc += z[i] * z[i] / w[i];
        return std::sqrt(acc);
    }
    const double q = p / (p - 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) acc += std::pow(std::abs(z[i]) / w[i], q) * w[i];
    return std::pow(acc, 1.0 / q);
}

/// Subspace selector for restricted dual norms over a basis:
///   Full          the whole space
///   Tail          span of elements with index > N      ((id - Q_N) Y)
///   Block         span of elements L+1 .. N            ((Q_N - Q_L) Y)
///   ComposedTail  the composed functional y o (id - P_N) over the whole space
///   Span          an explicit list of cell vectors
struct SubspaceSpec {
    enum class Kind { Full, Tail, Block, ComposedTail, Span } kind = Kind::Full;
    std::size_t L = 0;
    std::size_t N = 0;
    std::vector<std::vector<double>> span;

    static SubspaceSpec full() { return {}; }
    static SubspaceSpec tail(std::size_t n) { return {Kind::Tail, 0, n, {}}; }
    static SubspaceSpec block(std::size_t l, std::size_t n) { return {Kind::Block, l, n, {}}; }
    static SubspaceSpec composed_tail(std::size_t n) { return {Kind::ComposedTail, 0, n, {}}; }
    static SubspaceSpec explicit_span(std::vector<std::vector<double>> v) {
        return {Kind::Span, 0, 0, std::move(v)};
    }
};

/// Result of a restricted dual-norm computation. `exact` marks the closed
/// routes (p = 2 always; p = 1 on the diagonal, on dyadic Haar blocks and on
/// disjoint-support spans); otherwise [lower, upper] bracket the value and
/// `value` is the certified lower bound from sampling.
struct DualNormResult {
    double value = 0.0;
    bool exact = true;
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> maximizer; // cell values, unit norm, pairing = value (when exact)
};

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Exact p=1 dual norm over the Haar tail span {zero means on the N dyadic
/// blocks}: half the largest intra-block oscillation of gamma_i / omega_i.
inline DualNormResult haar_tail_cheb(const std::vector<double>& gamma, const WeightedModel& model,
                                     std::size_t n_blocks) {
    const std::size_t dim = model.dim();
    const auto& w = model.frame_weights();
    const std::size_t bs = dim / n_blocks;
    DualNormResult r;
    std::size_t bi = 0, bj = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        std::size_t lo = b * bs;
        std::size_t imax = lo, imin = lo;
        for (std::size_t i = lo; i < lo + bs; ++i) {
            if (gamma[i] > gamma[imax]) imax = i;
            if (gamma[i] < gamma[imin]) imin = i;
        }
        double v = 0.5 * (gamma[imax] - gamma[imin]) / w[lo];
        if (v > r.value) {
            r.value = v;
            bi = imax;
            bj = imin;
        }
    }
    r.lower = r.upper = r.value;
    r.maximizer.assign(dim, 0.0);
    if (r.value > 0.0) {
        r.maximizer[bi] = 0.5 / w[bi];
        r.maximizer[bj] = -0.5 / w[bj];
    }
    return r;
}

/// Exact p=1 dual norm over the Haar block span (Q_N - Q_L)Y with dyadic
/// L < N: level-N piecewise constants, zero means on the L coarse blocks.
/// For L = 0 the span is unconstrained and normalized block indicators are
/// the extreme points; otherwise two-spike differences within a coarse block.
inline DualNormResult haar_block_cheb(const std::vector<double>& gamma, const WeightedModel& model,
                                      std::size_t l_blocks, std::size_t n_blocks) {
    const std::size_t dim = model.dim();
    const double ds = model.grid().cell_width();
    const std::size_t bs = dim / n_blocks;          // cells per fine block
    const double bw = ds * static_cast<double>(bs); // fine block width
    std::vector<double> sums(n_blocks, 0.0);
    for (std::size_t b = 0; b < n_blocks; ++b)
        for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) sums[b] += gamma[i];

    DualNormResult r;
    r.maximizer.assign(dim, 0.0);
    if (l_blocks == 0) {
        std::size_t best = 0;
        for (std::size_t b = 0; b < n_blocks; ++b)
            if (std::abs(sums[b]) > std::abs(sums[best])) best = b;
        r.value = std::abs(sums[best]) / bw;
        for (std::size_t i = best * bs; i < (best + 1) * bs; ++i)
            r.maximizer[i] = (sums[best] >= 0.0 ? 1.0 : -1.0) / bw;
    } else {
        const std::size_t per = n_blocks / l_blocks; // fine blocks per coarse block
        std::size_t ba = 0, bb = 0;
        for (std::size_t c = 0; c < l_blocks; ++c) {
            std::size_t lo = c * per;
            std::size_t imax = lo, imin = lo;
            for (std::size_t b = lo; b < lo + per; ++b) {
                if (sums[b] > sums[imax]) imax = b;
                if (sums[b] < sums[imin]) imin = b;
            }
            double v = 0.5 * (sums[imax] - sums[imin]) / bw;
            if (v > r.value) {
                r.value = v;
                ba = imax;
                bb = imin;
            }
        }
        if (r.value > 0.0) {
            for (std::size_t i = ba * bs; i < (ba + 1) * bs; ++i) r.maximizer[i] = 0.5 / bw;
            for (std::size_t i = bb * bs; i < (bb + 1) * bs; ++i) r.maximizer[i] = -0.5 / bw;
        }
    }
    r.lower = r.upper = r.value;
    return r;
}

/// Dense SPD solve (Cholesky) for the p=2 Gram routes.
inline std::vector<double> spd_solve(std::vector<double>& g, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t c = 0; c < n; ++c) {
        double d = g[c * n + c];
        for (std::size_t k = 0; k < c; ++k) d -= g[c * n + k] * g[c * n + k];
        if (d <= 0.0) throw InternalError("Gram matrix not positive definite");
        d = std::sqrt(d);
        g[c * n + c] = d;
        for (std::size_t r = c + 1; r < n; ++r) {
            double v = g[r * n + c];
            for (std::size_t k = 0; k < c; ++k) v -= g[r * n + k] * g[c * n + k];
            g[r * n + c] = v / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) rhs[i] -= g[i * n + k] * rhs[k];
        rhs[i] /= g[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) rhs[i] -= g[k * n + i] * rhs[k];
        rhs[i] /= g[i * n + i];
    }
    return rhs;
}

/// Exact p=2 dual norm over the span of the given cell vectors:
/// ||y|_V|| = sqrt(g^T G^{-1} g) with the weighted Gram G; the maximizer is
/// the normalized projection of the Riesz representer onto V.
inline DualNormResult span_gram_p2(const std::vector<double>& gamma, const WeightedModel& model,
                                   const std::vector<std::vector<double>>& cols) {
    const std::size_t q = cols.size();
    DualNormResult r;
    if (q == 0) {
        r.maximizer.assign(model.dim(), 0.0);
        return r;
    }
    std::vector<double> g(q * q, 0.0), rhs(q, 0.0);
    for (std::size_t a = 0; a < q; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            double acc = model.coeff_ip(cols[a], cols[b]);
            g[a * q + b] = acc;
            g[b * q + a] = acc;
        }
        rhs[a] = BasisState::dot(cols[a], gamma);
    }
    std::vector<double> c = spd_solve(g, rhs);
    double val2 = 0.0;
    for (std::size_t a = 0; a < q; ++a) val2 += c[a] * rhs[a];
    r.value = std::sqrt(std::max(0.0, val2));
    r.lower = r.upper = r.value;
    r.maximizer.assign(model.dim(), 0.0);
    for (std::size_t a = 0; a < q; ++a) BasisState::axpy(c[a], cols[a], r.maximizer);
    double nrm = model.coeff_norm(r.maximizer);
    if (nrm > 0.0)
        for (auto& v : r.maximizer) v /= nrm;
    return r;
}

/// Exact p=2 dual norm over the tail span {f : coords(f)_k = 0, k <= N} via
/// the complement: ||y||^2 minus the Gram projection onto the span of the
/// first N coordinate functionals.
inline DualNormResult tail_complement_p2(const std::vector<double>& gamma, const BasisState& basis,
                                         std::size_t n_head) {
    const auto& model = basis.model();
    const auto& w = model.frame_weights();
    DualNormResult r;
    double full2 = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) full2 += gamma[i] * gamma[i] / w[i];
    if (n_head == 0) {
        r.value = std::sqrt(full2);
        r.lower = r.upper = r.value;
        return r;
    }
    std::vector<std::vector<double>> u(n_head);
    for (std::size_t k = 0; k < n_head; ++k) u[k] = basis.biorth_pairing(k + 1);
    std::vector<double> g(n_head * n_head, 0.0), rhs(n_head, 0.0);
    for (std::size_t a = 0; a < n_head; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) acc += u[a][i] * u[b][i] / w[i];
            g[a * n_head + b] = acc;
            g[b * n_head + a] = acc;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) acc += u[a][i] * gamma[i] / w[i];
        rhs[a] = acc;
    }
    std::vector<double> c = spd_solve(g, rhs);
    double proj2 = 0.0;
    for (std::size_t a = 0; a < n_head; ++a) proj2 += c[a] * rhs[a];
    r.value = std::sqrt(std::max(0.0, full2 - proj2));
    r.lower = r.upper = r.value;
    return r;
}

/// Seeded random-direction lower bound over the span of `cols`.
inline double sampled_lower_bound(const std::vector<double>& gamma, const WeightedModel& model,
                                  const std::vector<std::vector<double>>& cols, Rng& rng,
                                  std::size_t samples) {
    if (cols.empty()) return 0.0;
    const std::size_t dim = model.dim();
    double best = 0.0;
    std::vector<double> v(dim);
    // single elements first, then random combinations
    for (const auto& c : cols) {
        double nrm = model.coeff_norm(c);
        if (nrm > 0.0) best = std::max(best, std::abs(BasisState::dot(c, gamma)) / nrm);
    }
    for (std::size_t s = 0; s < samples; ++s) {
        std::fill(v.begin(), v.end(), 0.0);
        for (const auto& c : cols) BasisState::axpy(rng.uniform(-1.0, 1.0), c, v);
        double nrm = model.coeff_norm(v);
        if (nrm > 0.0) best = std::max(best, std::abs(BasisState::dot(v, gamma)) / nrm);
    }
    return best;
}

inline bool disjoint_supports(const std::vector<std::vector<double>>& cols) {
    if (cols.empty()) return true;
    std::vector<bool> used(cols[0].size(), false);
    for (const auto& c : cols)
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i] != 0.0) {
                if (used[i]) return false;
                used[i] = true;
            }
    return true;
}

} // namespace detail

/// sup |y(f)| over the unit ball of the selected subspace in the weighted
/// p-norm. Exact routes: the diagonal full-space norm (every p), p = 2 via
/// Gram solves, p = 1 on dyadic blocks of the pure Haar basis and on spans
/// with disjoint supports. Anything else returns a sampled lower bound with
/// an explicit approximate flag and a sound upper bound.
inline DualNormResult restricted_dual_norm(const std::vector<double>& gamma, const BasisState& basis,
                                           const SubspaceSpec& spec, Rng rng,
                                           std::size_t samples = 10000) {
    const auto& model = basis.model();
    const double p = model.p();
    const std::size_t dim = basis.dim();
    const auto& w = model.frame_weights();

    auto full_diag = [&](const std::vector<double>& z) {
        DualNormResult r;
        r.value = dual_norm_full(z, model);
        r.lower = r.upper = r.value;
        r.maximizer.assign(dim, 0.0);
        if (r.value > 0.0) {
            if (p == 1.0) {
                std::size_t best = 0;
                for (std::size_t i = 0; i < dim; ++i)
                    if (std::abs(z[i]) / w[i] > std::abs(z[best]) / w[best]) best = i;
                r.maximizer[best] = (z[best] >= 0.0 ? 1.0 : -1.0) / w[best];
            } else {
                const double q = p / (p - 1.0);
                for (std::size_t i = 0; i < dim; ++i)
                    r.maximizer[i] = (z[i] >= 0.0 ? 1.0 : -1.0) * std::pow(std::abs(z[i]) / w[i], q - 1.0);
                double nrm = model.coeff_norm(r.maximizer);
                if (nrm > 0.0)
                    for (auto& v : r.maximizer) v /= nrm;
            }
        }
        return r;
    };

    switch (spec.kind) {
        case SubspaceSpec::Kind::Full:
            return full_diag(gamma);
        case SubspaceSpec::Kind::ComposedTail:
            return full_diag(basis.tail_pairing(gamma, spec.N));
        case SubspaceSpec::Kind::Tail: {
            if (spec.N >= dim) {
                DualNormResult r;
                r.maximizer.assign(dim, 0.0);
                return r;
            }
            bool pure = !basis.is_dense() && basis.updates().empty() && basis.identity_order() &&
                        basis.plain_haar_base();
            if (p == 1.0 && pure && detail::is_pow2(spec.N))
                return detail::haar_tail_cheb(gamma, model, spec.N);
            if (p == 2.0 && basis.is_orthonormal() && basis.updates().empty()) {
                // tail norm of the representer coordinates, exact for an
                // orthonormal basis
                std::vector<double> r(dim);
                for (std::size_t i = 0; i < dim; ++i) r[i] = gamma[i] / w[i];
                std::vector<double> c = basis.coords(r);
                double acc = 0.0;
                for (std::size_t k = spec.N; k < dim; ++k) acc += c[k] * c[k];
                DualNormResult res;
                res.value = std::sqrt(acc);
                res.lower = res.upper = res.value;
                for (std::size_t k = 0; k < spec.N; ++k) c[k] = 0.0;
                res.maximizer = basis.synthesize(c);
                double nrm = model.coeff_norm(res.maximizer);
                if (nrm > 0.0)
                    for (auto& v : res.maximizer) v /= nrm;
                return res;
            }
            if (p == 2.0) return detail::tail_complement_p2(gamma, basis, spec.N);
            // certified bracket
            DualNormResult r;
            r.exact = false;
            std::vector<std::vector<double>> cols;
            for (std::size_t n = spec.N + 1; n <= dim; ++n) cols.push_back(basis.element(n));
            Rng local = rng.fork("tail-lb");
            r.lower = detail::sampled_lower_bound(gamma, model, cols, local, samples);
            r.upper = dual_norm_full(basis.tail_pairing(gamma, spec.N), model);
            r.value = r.lower;
            return r;
        }
        case SubspaceSpec::Kind::Block: {
            if (spec.L >= spec.N) throw IndexError("block subspace needs L < N");
            bool pure = !basis.is_dense() && basis.updates().empty() && basis.identity_order() &&
                        basis.plain_haar_base();
            bool dyadic = (spec.L == 0 || detail::is_pow2(spec.L)) && detail::is_pow2(spec.N);
            if (p == 1.0 && pure && dyadic)
                return detail::haar_block_cheb(gamma, model, spec.L, spec.N);
            std::vector<std::vector<double>> cols;
            for (std::size_t n = spec.L + 1; n <= spec.N; ++n) cols.push_back(basis.element(n));
            if (p == 2.0) return detail::span_gram_p2(gamma, model, cols);
            DualNormResult r;
            r.exact = false;
            Rng local = rng.fork("block-lb");
            r.lower = detail::sampled_lower_bound(gamma, model, cols, local, samples);
            std::vector<double> hn = basis.head_pairing(gamma, spec.N);
            std::vector<double> hl = basis.head_pairing(gamma, spec.L);
            for (std::size_t i = 0; i < hn.size(); ++i) hn[i] -= hl[i];
            r.upper = dual_norm_full(hn, model);
            r.value = r.lower;
            return r;
        }
        case SubspaceSpec::Kind::Span: {
            if (p == 2.0) return detail::span_gram_p2(gamma, model, spec.span);
            if (p == 1.0 && detail::disjoint_supports(spec.span)) {
                DualNormResult r;
                r.maximizer.assign(dim, 0.0);
                for (const auto& c : spec.span) {
                    double nrm = model.coeff_norm(c);
                    if (nrm == 0.0) continue;
                    double v = std::abs(BasisState::dot(c, gamma)) / nrm;
                    if (v > r.value) {
                        r.value = v;
                        r.maximizer = c;
                        double sgn = BasisState::dot(c, gamma) >= 0.0 ? 1.0 : -1.0;
                        for (auto& e : r.maximizer) e *= sgn / nrm;
                    }
                }
                r.lower = r.upper = r.value;
                return r;
            }
            DualNormResult r;
            r.exact = false;
            Rng local = rng.fork("span-lb");
            r.lower = detail::sampled_lower_bound(gamma, model, spec.span, local, samples);
            r.upper = dual_norm_full(gamma, model);
            r.value = r.lower;
            return r;
        }
    }
    throw InternalError("unreachable subspace kind");
}

} // namespace heatbasis

#endif
