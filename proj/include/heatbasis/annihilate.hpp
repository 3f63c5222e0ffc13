#ifndef HEATBASIS_ANNIHILATE_HPP
#define HEATBASIS_ANNIHILATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "heatbasis/dualnorm.hpp"

namespace heatbasis {

/// Delta schedule and candidate blocks for the annihilation induction.
/// The defaults take delta_m = epsilon 2^{-2m} / K with K the running basis
/// constant, which satisfies both schedule conditions of the induction with
/// a factor-2 margin; candidate N values are the dyadic block boundaries.
struct PerturbationPlan {
    double epsilon = 0.5;
    int m_max = 1;
    std::vector<std::size_t> candidates;

    static PerturbationPlan defaults(double epsilon, int m_max, std::size_t dim) {
        if (!(epsilon > 0.0) || epsilon >= 1.0)
            throw ConfigError("epsilon must lie in (0,1)");
        if (m_max < 0) throw ConfigError("m_max must be >= 0");
        PerturbationPlan p;
        p.epsilon = epsilon;
        p.m_max = m_max;
        for (std::size_t n = 2; n < dim; n *= 2) p.candidates.push_back(n);
        p.candidates.push_back(dim);
        return p;
    }

    double delta(int m, double k_hat) const {
        return epsilon * std::pow(2.0, -2.0 * m) / std::max(1.0, k_hat);
    }

    /// The two schedule conditions: sum_n K 2^{n-1} delta_n <= epsilon and
    /// (1 + K 2^{n-1} delta_n) / (1 - K 2^{n-1} delta_n) <= 2.
    void validate(double k_hat) const {
        double sum = 0.0;
        for (int m = 1; m <= m_max; ++m) {
            double term = std::max(1.0, k_hat) * std::pow(2.0, m - 1) * delta(m, k_hat);
            sum += term;
            if (term >= 1.0 || (1.0 + term) / (1.0 - term) > 2.0 + 1e-12)
                throw ConfigError("delta schedule violates the per-step growth condition");
        }
        if (sum > epsilon + 1e-12)
            throw ConfigError("delta schedule exceeds the epsilon budget");
    }
};

struct StepRecord {
    int m = 0;
    std::size_t L = 0;
    std::size_t N = 0;
    double delta = 0.0;
    double rho_bound = 0.0;
    double denominator = 0.0;
    double step_norm = 0.0;
    bool vanished = false;
    bool saturated = false;
};

struct ResidualBlock {
    int k = 0;
    std::size_t from = 0;               // first index with guaranteed J^k = 0
    std::vector<double> residual;       // |J^k(e_n)|, n = from..dim
    std::vector<double> element_norm;   // ||e_n||_{p,w}
};

/// Everything needed to re-verify an annihilating basis without rebuilding:
/// thresholds, the full residual matrix, the measured operator distances and
/// the basis-constant bookkeeping of the induction.
struct AnnihilationCertificate {
    std::string method = "perturbation";
    double p = 1.0;
    int level = 0;
    double epsilon = 0.0;
    int m_max = 0;
    std::string weight_kind;
    std::vector<double> weight_params;
    std::uint64_t seed = 0;
    std::vector<std::size_t> thresholds;   // t_m
    std::vector<StepRecord> steps;
    double basis_constant_before = 1.0;
    double basis_constant_after = 1.0;
    double lemma_bound = 1.0;
    double distance_lower = 0.0;
    double distance_upper = 0.0;
    std::vector<ResidualBlock> residuals;

    static constexpr double residual_tolerance = 1e-10;

    /// First violated invariant as a diagnostic string, empty when sound.
    std::string first_violation() const {
        for (const auto& blk : residuals)
            for (std::size_t i = 0; i < blk.residual.size(); ++i)
                if (blk.residual[i] > residual_tolerance * std::max(blk.element_norm[i], 1e-300))
                    return "residual bound violated at (k=" + std::to_string(blk.k) +
                           ", n=" + std::to_string(blk.from + i) + ")";
        if (method == "perturbation") {
            if (!(distance_upper < epsilon)) return "transform distance reaches epsilon";
            if (basis_constant_after > lemma_bound + 1e-9)
                return "basis constant exceeds the cumulative perturbation bound";
        }
        std::size_t prev = 0;
        for (std::size_t idx = 0; idx < thresholds.size(); ++idx) {
            std::size_t t = thresholds[idx];
            if (t > dimension_hint()) return "threshold exceeds the dimension";
            if (idx > 0) {
                bool degenerate = t == dimension_hint() ||
                                  (idx < steps.size() && (steps[idx].vanished || steps[idx].saturated));
                if (t < prev) return "thresholds decrease";
                if (t == prev && !degenerate) return "thresholds not strictly increasing";
            }
            prev = t;
        }
        return "";
    }

    std::size_t dimension_hint() const { return std::size_t(1) << level; }
};

/// Decreasing-norm report for the order-m functional restricted beyond the
/// n-th basis projection, over a schedule of n. `strictly` is the refinement
/// property the Haar-transferred bases exhibit; `quantitative` is the desk
/// form of the limit statement (three decades down by half the dimension).
struct ShrinkingReport {
    std::vector<std::size_t> schedule;
    std::vector<double> norms;
    double initial = 0.0;
    bool non_increasing = false;
    bool strictly = false;
    bool vanishes_at_dim = false;
    bool quantitative = false;
    bool pass = false;
};

inline ShrinkingReport shrinking_check(const BasisState& basis, const std::vector<double>& gamma,
                                       std::vector<std::size_t> schedule) {
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1]) throw ConfigError("shrinking schedule must increase");
    ShrinkingReport rep;
    rep.schedule = std::move(schedule);
    rep.initial = dual_norm_full(gamma, basis.model());
    rep.non_increasing = true;
    rep.strictly = true;
    rep.vanishes_at_dim = true;
    rep.quantitative = true;
    double prev = rep.initial;
    bool quantitative_seen = false;
    Rng rng(0x5eed);
    for (std::size_t n : rep.schedule) {
        double v = restricted_dual_norm(gamma, basis, SubspaceSpec::tail(n), rng, 200).value;
        rep.norms.push_back(v);
        if (v > prev * (1.0 + 1e-9) + 1e-15) rep.non_increasing = false;
        if (v >= prev * (1.0 - 1e-9)) rep.strictly = false;
        prev = v;
        if (!quantitative_seen && n >= basis.dim() / 2) {
            quantitative_seen = true;
            if (v > 1e-3 * rep.initial) rep.quantitative = false;
        }
        if (n >= basis.dim() && v != 0.0) rep.vanishes_at_dim = false;
    }
    rep.pass = rep.non_increasing && rep.vanishes_at_dim && rep.quantitative;
    return rep;
}

inline ShrinkingReport shrinking_check(const BasisState& basis, const MomentFunctional& mf,
                                       std::vector<std::size_t> schedule) {
    return shrinking_check(basis, mf.pairing, std::move(schedule));
}

namespace detail {

inline bool detail_is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Candidate norming directions inside the block span (Q_N - Q_L)Y, built in
/// the underlying two-value system and mapped through the chain. Block
/// indicators for L = 0, measure-balanced two-spikes within a coarse block
/// otherwise, plus the blockwise projection of the Riesz representer and a
/// few basis elements.
inline std::vector<std::vector<double>> norming_candidates(const BasisState& basis,
                                                           const std::vector<double>& gamma,
                                                           std::size_t L, std::size_t N, Rng& rng) {
    const auto& model = basis.model();
    const std::size_t dim = basis.dim();
    const auto& w = model.frame_weights();
    std::vector<std::vector<double>> out;

    // fine-block sums of the pulled-back pairing and of the measure
    std::vector<double> gt = gamma;
    basis.apply_chain_transpose(gt);
    if (detail_is_pow2(N) && (L == 0 || detail_is_pow2(L)) && basis.identity_order() && !basis.is_dense()) {
        const std::size_t bs = dim / N;
        std::vector<double> gsum(N, 0.0), msum(N, 0.0);
        for (std::size_t b = 0; b < N; ++b)
            for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) {
                gsum[b] += gt[i];
                msum[b] += w[i];
            }
        auto push_mapped = [&](std::vector<double> v) {
            basis.apply_chain(v);
            out.push_back(std::move(v));
        };
        if (L == 0) {
            std::size_t best = 0, second = 0;
            for (std::size_t b = 0; b < N; ++b)
                if (std::abs(gsum[b]) / msum[b] > std::abs(gsum[best]) / msum[best]) best = b;
            for (std::size_t b = 0; b < N; ++b)
                if (b != best && std::abs(gsum[b]) > std::abs(gsum[second])) second = b;
            for (std::size_t b : {best, second}) {
                std::vector<double> v(dim, 0.0);
                for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) v[i] = 1.0;
                push_mapped(std::move(v));
            }
        } else {
            const std::size_t per = N / L;
            double best_val = -1.0;
            std::size_t ba = 0, bb = 0;
            for (std::size_t c = 0; c < L; ++c) {
                std::size_t lo = c * per, imax = lo, imin = lo;
                for (std::size_t b = lo; b < lo + per; ++b) {
                    if (gsum[b] / msum[b] > gsum[imax] / msum[imax]) imax = b;
                    if (gsum[b] / msum[b] < gsum[imin] / msum[imin]) imin = b;
                }
                double v = gsum[imax] / msum[imax] - gsum[imin] / msum[imin];
                if (v > best_val) {
                    best_val = v;
                    ba = imax;
                    bb = imin;
                }
            }
            if (ba != bb) {
                // measure-balanced two-spike: in the span for both systems
                std::vector<double> v(dim, 0.0);
                for (std::size_t i = ba * bs; i < (ba + 1) * bs; ++i) v[i] = 1.0 / msum[ba];
                for (std::size_t i = bb * bs; i < (bb + 1) * bs; ++i) v[i] = -1.0 / msum[bb];
                push_mapped(std::move(v));
            }
        }
    }

    // blockwise coordinate projection of the Riesz representer
    {
        std::vector<double> r(dim);
        for (std::size_t i = 0; i < dim; ++i) r[i] = gamma[i] / w[i];
        std::vector<double> c = basis.coords(r);
        for (std::size_t k = 0; k < dim; ++k)
            if (k < L || k >= N) c[k] = 0.0;
        out.push_back(basis.synthesize(c));
    }
    // a few basis elements across the block
    for (std::size_t n : {L + 1, (L + N) / 2, N}) {
        if (n >= L + 1 && n <= N) out.push_back(basis.element(n));
    }
    // seeded random combinations
    for (int t = 0; t < 4; ++t) {
        std::vector<double> c(dim, 0.0);
        for (std::size_t k = L; k < N; ++k) c[k] = rng.uniform(-1.0, 1.0);
        out.push_back(basis.synthesize(c));
    }
    return out;
}

} // namespace detail

/// Outcome of one annihilation step (the rank-one perturbation of the basis).
struct PerturbationOutcome {
    std::size_t N = 0;
    bool vanished = false;   // functional already vanishes beyond Q_L
    bool saturated = false;  // N = dim: the tail is empty in the finite model
    double rho_bound = 0.0;
    double denominator = 0.0;
    double step_norm = 0.0;
    std::optional<RankOneUpdate> update;
};

/// The rank-one annihilation step: find the smallest dyadic N > L whose
/// tail-to-block ratio (bounded soundly from above) drops below delta, pick
/// the norming element x in the block span, and perturb every later element by
/// its x-component so the new functional vanishes beyond N. The measured
/// ||id - S|| equals ||y o (id - Q_N)||_* / y(x), exact because the
/// perturbation has rank one.
inline PerturbationOutcome perturbation_step(const BasisState& basis,
                                             const std::vector<double>& gamma, std::size_t L,
                                             double delta, double k_hat,
                                             const std::vector<std::size_t>& candidates, Rng rng) {
    const auto& model = basis.model();
    const std::size_t dim = basis.dim();
    const double scale = dual_norm_full(gamma, model);
    PerturbationOutcome out;

    if (L >= dim || dual_norm_full(basis.tail_pairing(gamma, L), model) <= 1e-13 * scale) {
        out.N = L;
        out.vanished = true;
        return out;
    }

    double chain_inverse_bound = 1.0;
    for (const auto& u : basis.updates()) chain_inverse_bound /= (1.0 - u.step_norm);

    for (std::size_t N : candidates) {
        if (N <= L) continue;
        if (N >= dim) {
            out.N = dim;
            out.saturated = true;
            out.rho_bound = 0.0;
            out.step_norm = 0.0;
            return out;
        }
        std::vector<double> eta = basis.tail_pairing(gamma, N);
        double num_full = dual_norm_full(eta, model);
        double num_ub = num_full;
        if (model.p() == 1.0 && basis.plain_haar_base() && basis.identity_order() &&
            detail::detail_is_pow2(N)) {
            std::vector<double> gt = gamma;
            basis.apply_chain_transpose(gt);
            double cheb = detail::haar_tail_cheb(gt, model, N).value * chain_inverse_bound;
            num_ub = std::min(num_ub, cheb);
        }

        Rng cand_rng = rng.fork("cand" + std::to_string(N));
        auto cands = detail::norming_candidates(basis, gamma, L, N, cand_rng);
        double best_score = 0.0;
        std::vector<double> best;
        for (auto& x : cands) {
            double nrm = model.coeff_norm(x);
            if (!(nrm > 0.0)) continue;
            double d = BasisState::dot(gamma, x);
            double score = std::abs(d) / nrm;
            if (score > best_score) {
                best_score = score;
                double s = (d >= 0.0 ? 1.0 : -1.0) / nrm;
                best = x;
                for (auto& v : best) v *= s;
            }
        }
        if (best_score <= 1e-13 * scale) continue;

        double rho = num_ub / best_score;
        double step_norm = num_full / best_score;
        if (rho < delta && k_hat * rho < 1.0 && step_norm < 1.0) {
            out.N = N;
            out.rho_bound = rho;
            out.denominator = best_score;
            out.step_norm = step_norm;
            RankOneUpdate u;
            u.affected_from = N;
            u.x = std::move(best);
            u.eta = std::move(eta);
            u.d = BasisState::dot(gamma, u.x);
            u.step_norm = step_norm;
            out.update = std::move(u);
            return out;
        }
    }
    throw ResolutionExhausted(
        "no dyadic block reaches the delta target; increase the grid level");
}

/// Spec-shaped wrapper returning the perturbed basis.
inline std::pair<BasisState, std::size_t> perturbation_step(const BasisState& basis,
                                                            const std::vector<MomentFunctional>& priors,
                                                            const MomentFunctional& next, std::size_t L,
                                                            double delta, Rng rng) {
    for (const auto& mf : priors) {
        double t = dual_norm_full(basis.tail_pairing(mf.pairing, L), basis.model());
        if (t > 1e-8 * std::max(1.0, dual_norm_full(mf.pairing, basis.model())))
            throw DataError("prior functional of order " + std::to_string(mf.order) +
                            " does not vanish beyond the starting block");
    }
    double k_hat = basis.basis_constant;
    std::vector<std::size_t> candidates;
    for (std::size_t n = 2; n < basis.dim(); n *= 2) candidates.push_back(n);
    candidates.push_back(basis.dim());
    PerturbationOutcome o =
        perturbation_step(basis, next.pairing, L, delta, k_hat, candidates, rng);
    BasisState next_basis = basis;
    if (o.update) next_basis.push_update(*o.update);
    return {std::move(next_basis), o.N};
}

/// Exact ||id - T|| of the chain in the weighted coefficient norm: for p = 1
/// the column maximum over normalized cells (the extreme points), for p = 2
/// power iteration plus the compositional upper bound.
struct DistanceEstimate {
    double lower = 0.0;
    double upper = 0.0;
};

inline DistanceEstimate transform_distance(const BasisState& basis, Rng rng) {
    const auto& model = basis.model();
    const std::size_t dim = basis.dim();
    DistanceEstimate d;
    double composition = 0.0;
    for (const auto& u : basis.updates()) composition += u.step_norm * (1.0 + composition);
    if (basis.updates().empty()) return d;

    if (model.p() == 1.0) {
        const auto& w = model.frame_weights();
        double best = 0.0;
        std::vector<double> col(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            std::fill(col.begin(), col.end(), 0.0);
            col[j] = 1.0;
            basis.apply_chain(col);
            col[j] -= 1.0;
            double nrm = 0.0;
            for (std::size_t i = 0; i < dim; ++i) nrm += std::abs(col[i]) * w[i];
            best = std::max(best, nrm / w[j]);
        }
        d.lower = best;
        d.upper = std::min(best, composition);
        d.upper = std::max(d.upper, d.lower);
        return d;
    }

    // p = 2: power iteration on (id-T)^* (id-T) in the weighted inner product
    const auto& w = model.frame_weights();
    std::vector<double> v(dim);
    for (auto& e : v) e = rng.uniform(-1.0, 1.0);
    double sigma = 0.0;
    for (int it = 0; it < 80; ++it) {
        std::vector<double> u = v;
        basis.apply_chain(u);
        for (std::size_t i = 0; i < dim; ++i) u[i] = v[i] - u[i]; // (id-T) v
        // adjoint in the omega inner product: Omega^{-1} (id-T)^T Omega
        for (std::size_t i = 0; i < dim; ++i) u[i] *= w[i];
        std::vector<double> t = u;
        basis.apply_chain_transpose(t);
        for (std::size_t i = 0; i < dim; ++i) u[i] = (u[i] - t[i]) / w[i];
        double nrm = std::sqrt(model.coeff_ip(u, u));
        if (nrm == 0.0) break;
        sigma = std::sqrt(nrm);
        for (std::size_t i = 0; i < dim; ++i) v[i] = u[i] / nrm;
    }
    d.lower = sigma;
    d.upper = std::max(composition, d.lower);
    return d;
}

/// Residual audit: |J^k(e_n)| and ||e_n|| for every k <= m_max and every
/// element beyond its threshold, recomputed directly from the elements.
inline std::vector<ResidualBlock> audit_residuals(const BasisState& basis,
                                                  const std::vector<std::size_t>& thresholds) {
    const auto& model = basis.model();
    const std::size_t dim = basis.dim();
    std::vector<ResidualBlock> blocks;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        ResidualBlock blk;
        blk.k = static_cast<int>(k + 1);
        blk.from = thresholds[k] + 1;
        const auto& gamma = model.moment_pairing(blk.k);
        for (std::size_t n = blk.from; n <= dim; ++n) {
            std::vector<double> e = basis.element(n);
            blk.residual.push_back(std::abs(BasisState::dot(gamma, e)));
            blk.element_norm.push_back(model.coeff_norm(e));
        }
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

struct BuildResult {
    BasisState basis;
    AnnihilationCertificate certificate;
};

/// The annihilation induction: step m applies the rank-one perturbation to
/// the current basis with L = t_{m-1}, annihilating J^m beyond the returned
/// block boundary. Elements up to each threshold never change afterwards,
/// the measured operator distances accumulate below epsilon, and the final
/// residual matrix is re-derived from scratch.
inline BuildResult build_annihilating_basis(BasisState initial, const PerturbationPlan& plan,
                                            Rng rng) {
    const auto& model = initial.model();
    if (model.p() != 1.0 && model.p() != 2.0)
        throw ConfigError("annihilation build certifies only p in {1,2}");

    AnnihilationCertificate cert;
    cert.p = model.p();
    cert.level = model.grid().level();
    cert.epsilon = plan.epsilon;
    cert.m_max = plan.m_max;
    cert.weight_kind = model.weight().kind_name();
    cert.weight_params = model.weight().parameters();

    double k_hat = basis_constant_estimate(initial, 64, rng.fork("constant-before")).value;
    cert.basis_constant_before = k_hat;
    cert.lemma_bound = k_hat;
    plan.validate(k_hat);

    // shrinking precondition: tail norms must fall off and vanish at the
    // dimension; a basis that keeps the functional concentrated in its tail
    // (still half the initial norm at half the dimension) is refused
    std::vector<std::size_t> schedule;
    for (std::size_t n = 2; n <= initial.dim(); n *= 2) schedule.push_back(n);
    for (int m = 1; m <= plan.m_max; ++m) {
        ShrinkingReport rep = shrinking_check(initial, model.moment_pairing(m), schedule);
        double at_half = rep.initial;
        for (std::size_t i = 0; i < rep.schedule.size(); ++i)
            if (rep.schedule[i] >= initial.dim() / 2) {
                at_half = rep.norms[i];
                break;
            }
        if (!rep.non_increasing || !rep.vanishes_at_dim || at_half > 0.5 * rep.initial) {
            std::string diag = "tail norms:";
            for (double v : rep.norms) diag += " " + std::to_string(v);
            throw DataError("initial basis is not shrinking for the order-" + std::to_string(m) +
                            " functional; " + diag);
        }
    }

    BasisState basis = std::move(initial);
    for (int m = 1; m <= plan.m_max; ++m) {
        std::size_t L = cert.thresholds.empty() ? 0 : cert.thresholds.back();
        double delta = plan.delta(m, k_hat);
        PerturbationOutcome o = perturbation_step(basis, model.moment_pairing(m), L, delta, k_hat,
                                                  plan.candidates, rng.fork("step" + std::to_string(m)));
        StepRecord rec;
        rec.m = m;
        rec.L = L;
        rec.N = o.N;
        rec.delta = delta;
        rec.rho_bound = o.rho_bound;
        rec.denominator = o.denominator;
        rec.step_norm = o.step_norm;
        rec.vanished = o.vanished;
        rec.saturated = o.saturated;
        cert.steps.push_back(rec);
        cert.thresholds.push_back(o.N);
        if (o.update) {
            basis.push_update(std::move(*o.update));
            cert.lemma_bound *= (1.0 + rec.step_norm) / (1.0 - rec.step_norm);
            k_hat = basis_constant_estimate(basis, 64, rng.fork("constant" + std::to_string(m))).value;
        }
    }

    basis.thresholds = cert.thresholds;
    DistanceEstimate dist = transform_distance(basis, rng.fork("distance"));
    cert.distance_lower = dist.lower;
    cert.distance_upper = dist.upper;
    cert.basis_constant_after =
        basis_constant_estimate(basis, 64, rng.fork("constant-after")).value;
    cert.residuals = audit_residuals(basis, cert.thresholds);
    basis.basis_constant = cert.basis_constant_after;
    basis.transform_distance = cert.distance_upper;

    std::string violation = cert.first_violation();
    if (!violation.empty()) throw InternalError("freshly built certificate unsound: " + violation);
    return BuildResult{std::move(basis), std::move(cert)};
}

/// p = 2 construction from the Riesz representers: QR/Householder in the
/// coordinates of the orthonormal weighted Haar system. The first m_max
/// elements span the representers of J^1..J^m_max in nested order, so
/// J^k (e_n) = 0 for every n > k; the remaining elements complete an
/// orthonormal basis.
inline BasisState gram_schmidt_annihilating(std::shared_ptr<const WeightedModel> model, int m_max,
                                            double pivot_tol = 1e-10) {
    if (model->p() != 2.0) throw ConfigError("the orthonormal construction requires p = 2");
    const std::size_t dim = model->dim();
    if (m_max < 0 || static_cast<std::size_t>(m_max) > dim)
        throw ConfigError("m_max out of range for this grid");

    BasisState base = BasisState::weighted_haar_basis(model);
    const auto& fw = model->frame_weights();

    // coordinates of the representers in the orthonormal system
    std::vector<std::vector<double>> rho(static_cast<std::size_t>(m_max));
    for (int k = 1; k <= m_max; ++k) {
        const auto& gamma = model->moment_pairing(k);
        std::vector<double> r(dim);
        for (std::size_t i = 0; i < dim; ++i) r[i] = gamma[i] / fw[i];
        rho[static_cast<std::size_t>(k - 1)] = base.coords(r);
    }

    // Householder QR of [rho_1 .. rho_m]: reflectors v_k, applied left to right
    std::vector<std::vector<double>> reflectors;
    double scale = 0.0;
    for (const auto& r : rho) scale = std::max(scale, std::sqrt(BasisState::dot(r, r)));
    for (std::size_t k = 0; k < rho.size(); ++k) {
        std::vector<double> c = rho[k];
        for (const auto& v : reflectors) {
            double t = 2.0 * BasisState::dot(v, c);
            BasisState::axpy(-t, v, c);
        }
        double tail2 = 0.0;
        for (std::size_t i = k; i < dim; ++i) tail2 += c[i] * c[i];
        double alpha = std::sqrt(tail2);
        if (alpha <= pivot_tol * std::max(scale, 1e-300))
            throw DataError("moment representers linearly dependent at this resolution");
        if (c[k] > 0.0) alpha = -alpha;
        std::vector<double> v(dim, 0.0);
        for (std::size_t i = k; i < dim; ++i) v[i] = c[i];
        v[k] -= alpha;
        double vn = std::sqrt(BasisState::dot(v, v));
        for (auto& e : v) e /= vn;
        reflectors.push_back(std::move(v));
    }

    // basis element n = synthesize(H_1 ... H_m e_n)
    std::vector<std::vector<double>> columns(dim);
    std::vector<double> unit(dim, 0.0);
    for (std::size_t n = 0; n < dim; ++n) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[n] = 1.0;
        for (std::size_t k = reflectors.size(); k-- > 0;) {
            double t = 2.0 * BasisState::dot(reflectors[k], unit);
            BasisState::axpy(-t, reflectors[k], unit);
        }
        columns[n] = base.synthesize(unit);
    }

    BasisState out = BasisState::dense(model, std::move(columns), true);
    for (int k = 1; k <= m_max; ++k) out.thresholds.push_back(static_cast<std::size_t>(k));
    out.basis_constant = 1.0;
    return out;
}

} // namespace heatbasis

#endif
