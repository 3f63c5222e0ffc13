#include <doctest.h>

#include <cmath>

#include "heatbasis/dualnorm.hpp"
#include "oracles.hpp"

using namespace heatbasis;

namespace {
std::shared_ptr<const WeightedModel> model_for(int level, double p) {
    return std::make_shared<const WeightedModel>(make_dyadic_grid(level), Weight::exp_linear(), p);
}
} // namespace

TEST_CASE("full-space dual norms are attained by their maximizers") {
    for (double p : {1.0, 2.0}) {
        auto model = model_for(6, p);
        BasisState basis = p == 2.0 ? BasisState::weighted_haar_basis(model)
                                    : BasisState::haar_basis(model);
        Rng rng(5);
        std::vector<double> gamma(model->dim());
        for (auto& v : gamma) v = rng.uniform(-1.0, 1.0);

        DualNormResult r = restricted_dual_norm(gamma, basis, SubspaceSpec::full(), Rng(1));
        CHECK(r.exact);
        CHECK(model->coeff_norm(r.maximizer) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(BasisState::dot(gamma, r.maximizer) == doctest::Approx(r.value).epsilon(1e-12));

        // no random direction beats the claimed supremum
        Rng probe(9);
        for (int t = 0; t < 500; ++t) {
            std::vector<double> v(model->dim());
            for (auto& e : v) e = probe.uniform(-1.0, 1.0);
            double ratio = std::abs(BasisState::dot(gamma, v)) / model->coeff_norm(v);
            CHECK(ratio <= r.value * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("zero functional has zero dual norm") {
    auto model = model_for(5, 1.0);
    BasisState basis = BasisState::haar_basis(model);
    std::vector<double> zero(model->dim(), 0.0);
    for (auto spec : {SubspaceSpec::full(), SubspaceSpec::tail(4), SubspaceSpec::block(2, 8)}) {
        DualNormResult r = restricted_dual_norm(zero, basis, spec, Rng(1));
        CHECK(r.value == 0.0);
    }
}

TEST_CASE("p=2 span norm equals the dense normal-equation oracle") {
    auto model = model_for(6, 2.0);
    BasisState basis = BasisState::weighted_haar_basis(model);
    Rng rng(3);

    // pairing with e_2: the dual norm over the whole space is the norm of the
    // Riesz representer; over a span it matches the dense solve
    GridFunction e2 = haar(2, model->grid_ptr());
    std::vector<double> gamma(model->dim());
    const auto& fw = model->frame_weights();
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma[i] = e2[i] * fw[i];

    DualNormResult full = restricted_dual_norm(gamma, basis, SubspaceSpec::full(), Rng(1));
    double rep_norm = std::sqrt(model->coeff_ip(e2.values, e2.values));
    CHECK(full.value == doctest::Approx(rep_norm).epsilon(1e-12));

    std::vector<std::vector<double>> span;
    for (std::size_t n = 3; n <= 10; ++n) span.push_back(basis.element(n));
    span.push_back(e2.values);
    DualNormResult snorm = restricted_dual_norm(gamma, basis, SubspaceSpec::explicit_span(span), Rng(1));
    CHECK(snorm.exact);
    CHECK(snorm.value == doctest::Approx(oracles::brute_dual_norm_p2(gamma, *model, span)).epsilon(1e-10));
    CHECK(BasisState::dot(gamma, snorm.maximizer) == doctest::Approx(snorm.value).epsilon(1e-9));
}

TEST_CASE("p=1 haar tail and block norms: exact Chebyshev with witnesses") {
    auto model = model_for(7, 1.0);
    BasisState basis = BasisState::haar_basis(model);
    Rng rng(7);
    std::vector<double> gamma = model->moment_pairing(2);

    for (std::size_t n : {std::size_t(4), std::size_t(16), std::size_t(64)}) {
        DualNormResult r = restricted_dual_norm(gamma, basis, SubspaceSpec::tail(n), Rng(1));
        CHECK(r.exact);
        // witness attains the value inside the subspace
        CHECK(model->coeff_norm(r.maximizer) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(BasisState::dot(gamma, r.maximizer) == doctest::Approx(r.value).epsilon(1e-12));
        auto coords = basis.coords(r.maximizer);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(coords[k]) < 1e-12);
        // sampled combinations never beat it
        for (int t = 0; t < 200; ++t) {
            std::vector<double> c(model->dim(), 0.0);
            for (std::size_t k = n; k < model->dim(); ++k) c[k] = rng.uniform(-1.0, 1.0);
            auto v = basis.synthesize(c);
            CHECK(std::abs(BasisState::dot(gamma, v)) <=
                  r.value * model->coeff_norm(v) * (1.0 + 1e-10));
        }
    }

    DualNormResult rb = restricted_dual_norm(gamma, basis, SubspaceSpec::block(8, 32), Rng(1));
    CHECK(rb.exact);
    CHECK(BasisState::dot(gamma, rb.maximizer) == doctest::Approx(rb.value).epsilon(1e-12));
    auto coords = basis.coords(rb.maximizer);
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(coords[k]) < 1e-12);
    for (std::size_t k = 32; k < model->dim(); ++k) CHECK(std::abs(coords[k]) < 1e-12);

    // tail at the full dimension is exactly zero
    DualNormResult rz = restricted_dual_norm(gamma, basis, SubspaceSpec::tail(model->dim()), Rng(1));
    CHECK(rz.value == 0.0);
}

TEST_CASE("p=1 disjoint-indicator span: enumeration oracle") {
    auto model = model_for(6, 1.0);
    BasisState basis = BasisState::haar_basis(model);
    std::vector<double> gamma = representer(1, *model).pairing;

    // disjoint normalized indicators: extreme points are the blocks themselves
    std::vector<std::vector<double>> span;
    const std::size_t dim = model->dim();
    for (std::size_t b = 0; b < 4; ++b) {
        std::vector<double> v(dim, 0.0);
        for (std::size_t i = b * (dim / 4); i < (b + 1) * (dim / 4); ++i) v[i] = 1.0;
        span.push_back(std::move(v));
    }
    DualNormResult r = restricted_dual_norm(gamma, basis, SubspaceSpec::explicit_span(span), Rng(1));
    CHECK(r.exact);
    double oracle = 0.0;
    for (const auto& v : span)
        oracle = std::max(oracle, std::abs(BasisState::dot(gamma, v)) / model->coeff_norm(v));
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-13));

    // overlapping spans fall back to a certified bracket
    std::vector<std::vector<double>> overlap = span;
    overlap.push_back(std::vector<double>(dim, 1.0));
    DualNormResult ra =
        restricted_dual_norm(gamma, basis, SubspaceSpec::explicit_span(overlap), Rng(1), 500);
    CHECK_FALSE(ra.exact);
    CHECK(ra.lower <= ra.upper * (1.0 + 1e-12));
    CHECK(ra.value == ra.lower);
    CHECK(ra.lower >= oracle - 1e-12); // contains the single-element bound
}

TEST_CASE("p=2 tail norms agree between complement and orthonormal routes") {
    auto model = model_for(6, 2.0);
    BasisState on = BasisState::weighted_haar_basis(model);
    std::vector<double> gamma = model->moment_pairing(1);

    for (std::size_t n : {std::size_t(2), std::size_t(8), std::size_t(32)}) {
        DualNormResult fast = restricted_dual_norm(gamma, on, SubspaceSpec::tail(n), Rng(1));
        // general complement route through the biorthogonal functionals
        DualNormResult slow = detail::tail_complement_p2(gamma, on, n);
        CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-10));
        // and against a dense span oracle
        std::vector<std::vector<double>> span;
        for (std::size_t k = n + 1; k <= model->dim(); ++k) span.push_back(on.element(k));
        CHECK(fast.value ==
              doctest::Approx(oracles::brute_dual_norm_p2(gamma, *model, span)).epsilon(1e-9));
    }
}

TEST_CASE("composed tail vanishes exactly at the dimension") {
    auto model = model_for(6, 1.0);
    BasisState basis = BasisState::haar_basis(model);
    std::vector<double> gamma = model->moment_pairing(3);
    DualNormResult r =
        restricted_dual_norm(gamma, basis, SubspaceSpec::composed_tail(model->dim()), Rng(1));
    CHECK(r.value == 0.0);
}
