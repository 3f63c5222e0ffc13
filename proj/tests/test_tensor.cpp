#include <doctest.h>

#include <cmath>

#include "heatbasis/annihilate.hpp"
#include "heatbasis/tensor.hpp"

using namespace heatbasis;

namespace {
std::shared_ptr<const WeightedModel> axis_model(int level, const Weight& w) {
    return std::make_shared<const WeightedModel>(make_dyadic_grid(level), w, 1.0);
}
} // namespace

TEST_CASE("product weight construction") {
    ProductWeight pw1 = build_product_weight(Weight::exp_linear(), 2, 1.0);
    // p = 1: the w-tilde factor is the v-tilde factor itself
    for (double x : {0.0, 1.0, 5.0, 20.0})
        CHECK(pw1.per_axis_w(x) == pw1.per_axis_vtilde(x));

    // p = 2: the factor carries (1+|x|)^{-2/p'} against the p-th root
    ProductWeight pw2 = build_product_weight(Weight::exp_linear(), 2, 2.0);
    for (double x : {0.5, 2.0, 7.0}) {
        double expected = std::sqrt(pw2.per_axis_vtilde(x)) * std::pow(1.0 + x, -1.0);
        CHECK(pw2.per_axis_w(x) == doctest::Approx(expected).epsilon(1e-12));
    }

    // pointwise domination on the probe cloud
    CHECK(product_weight_domination(pw1, 10000, Rng(3)) <= 1.0 + 1e-9);
    ProductWeight pw3 = build_product_weight(Weight::gauss_exp(), 3, 1.0);
    CHECK(product_weight_domination(pw3, 10000, Rng(4)) <= 1.0 + 1e-9);

    // the per-axis factor is itself a fast-growing weight
    CHECK(check_fast_growth(pw1.per_axis_w, 4).pass);
    CHECK_THROWS_AS(build_product_weight(Weight::exp_linear(), 1, 1.0), ConfigError);
}

TEST_CASE("embedding of the p-norm into the product-weight L1") {
    // ||f||_{1,w-tilde} <= C ||f||_{p,v-tilde} on random separable functions
    ProductWeight pw = build_product_weight(Weight::exp_linear(), 2, 2.0);
    auto grid = make_dyadic_grid(7);
    WeightedModel m_w(grid, pw.per_axis_w, 1.0);
    WeightedModel m_v(grid, pw.per_axis_vtilde, 2.0);
    Rng rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        GridFunction f1 = random_function(grid, Side::UnitInterval, rng);
        GridFunction f2 = random_function(grid, Side::UnitInterval, rng);
        double lhs = m_w.norm(f1) * m_w.norm(f2);
        double rhs = m_v.norm(f1) * m_v.norm(f2);
        worst = std::max(worst, lhs / rhs);
    }
    // Hoelder constant: (int (1+|x|)^{-2} dx)^{N/p'} = 2^{... }; anything
    // uniformly bounded certifies the embedding at desk scale
    CHECK(worst < 4.0);
}

TEST_CASE("projection split: counts, reconstruction, head range") {
    Weight v = build_product_weight(Weight::exp_linear(), 2, 1.0).per_axis_w;
    auto model = axis_model(6, v);
    BasisState basis = BasisState::haar_basis(model);
    std::vector<const BasisState*> bases{&basis, &basis};
    auto grid = model->grid_ptr();
    Rng rng(5);

    TensorFunction f;
    for (int k = 0; k < 3; ++k) {
        TensorTerm t;
        t.lambda = rng.uniform(-2.0, 2.0);
        t.factors.push_back(random_function(grid, Side::UnitInterval, rng));
        t.factors.push_back(random_function(grid, Side::UnitInterval, rng));
        f.terms.push_back(std::move(t));
    }

    TensorSplit split = tensor_projection_split(f, 8, bases);
    CHECK(split.components.size() == 3); // 2^2 - 1

    // termwise pointwise reconstruction
    for (std::size_t k = 0; k < f.terms.size(); ++k)
        for (int s = 0; s < 40; ++s) {
            std::size_t i = rng.index(grid->cells()), j = rng.index(grid->cells());
            double orig = f.terms[k].factors[0][i] * f.terms[k].factors[1][j];
            double rec = split.head.terms[k].factors[0][i] * split.head.terms[k].factors[1][j];
            for (const auto& [mask, comp] : split.components)
                rec += comp.terms[k].factors[0][i] * comp.terms[k].factors[1][j];
            CHECK(rec == doctest::Approx(orig).epsilon(1e-12));
        }

    // data already inside the head range: all Q components vanish
    TensorFunction hf;
    TensorTerm ht;
    ht.lambda = 1.0;
    std::vector<double> c(grid->cells(), 0.0);
    c[1] = 1.0;
    c[3] = -0.5;
    ht.factors.emplace_back(grid, Side::UnitInterval, basis.synthesize(c));
    ht.factors.emplace_back(grid, Side::UnitInterval, basis.synthesize(c));
    hf.terms.push_back(std::move(ht));
    TensorSplit hs = tensor_projection_split(hf, 8, bases);
    for (const auto& [mask, comp] : hs.components) {
        for (const auto& term : comp.terms) {
            double prod = std::abs(term.lambda);
            for (std::size_t j = 0; j < 2; ++j) prod *= model->coeff_norm(term.factors[j].values);
            CHECK(prod < 1e-12);
        }
    }

    // side guard
    TensorFunction xf;
    TensorTerm xt;
    xt.factors.push_back(halfline_indicator(grid, -1.0, 0.0).f);
    xt.factors.push_back(halfline_indicator(grid, -1.0, 0.0).f);
    xf.terms.push_back(std::move(xt));
    CHECK_THROWS_AS(tensor_projection_split(xf, 4, bases), DataError);
}

TEST_CASE("normalization bounds the factor norms by one") {
    auto model = axis_model(6, Weight::exp_linear());
    std::vector<std::shared_ptr<const WeightedModel>> models{model, model};
    Rng rng(9);
    TensorFunction f;
    for (int k = 0; k < 2; ++k) {
        TensorTerm t;
        t.lambda = 3.0;
        t.factors.push_back(random_function(model->grid_ptr(), Side::UnitInterval, rng));
        t.factors.push_back(random_function(model->grid_ptr(), Side::UnitInterval, rng));
        f.terms.push_back(std::move(t));
    }
    TensorFunction g = normalize_terms(f, models);
    CHECK(g.lambda_sum() > 0.0);
    for (const auto& term : g.terms)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(models[j]->norm(term.factors[j]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("separable sup factorizes and cancellation degenerates") {
    auto model = axis_model(7, Weight::exp_linear());
    std::vector<std::shared_ptr<const WeightedModel>> models{model, model};
    auto ind = halfline_indicator(model->grid_ptr(), -1.0, 0.0);

    TensorFunction f;
    TensorTerm t;
    t.lambda = 1.0;
    t.factors.push_back(ind.f);
    t.factors.push_back(ind.f);
    f.terms.push_back(t);
    TensorHeat th(f, models);
    HeatEvolver ev(ind.f, model);
    for (double tt : {1.0, 16.0}) {
        double lhs = th.sup_norm(tt, 50.0);
        double axis = sup_norm_at(ev, tt);
        CHECK(lhs == doctest::Approx(axis * axis).epsilon(1e-10));
    }

    TensorFunction zf;
    zf.terms.push_back({1.0, {ind.f, ind.f}});
    zf.terms.push_back({-1.0, {ind.f, ind.f}});
    BasisState basis = BasisState::haar_basis(model);
    std::vector<const BasisState*> bases{&basis, &basis};
    DecayReport rz = tensor_heat_decay(zf, TimeSchedule{1.0, 2.0, 6}, bases, models, 0, 0);
    CHECK(rz.degenerate);
    CHECK(rz.verdict);
}

TEST_CASE("tensor decay rates and the tail precondition") {
    Weight v = build_product_weight(Weight::exp_linear(), 2, 1.0).per_axis_w;
    auto model = axis_model(9, v);
    BasisState init = BasisState::haar_basis(model);
    BuildResult res =
        build_annihilating_basis(init, PerturbationPlan::defaults(0.5, 1, model->dim()), Rng(42));
    BasisState& basis = res.basis;
    std::vector<const BasisState*> bases{&basis, &basis};
    std::vector<std::shared_ptr<const WeightedModel>> models{model, model};
    std::size_t t1 = res.certificate.thresholds[0];
    REQUIRE(t1 < model->dim());

    auto grid = model->grid_ptr();
    GridFunction ind_t = transfer(halfline_indicator(grid, -1.0, 0.0).f, *model);
    TimeSchedule sched{1.0, 2.0, 17};

    // baseline: two plain factors, rate N/2
    TensorFunction base;
    base.terms.push_back({1.0, {ind_t, ind_t}});
    base = normalize_terms(base, models);
    DecayReport rb = tensor_heat_decay(base, sched, bases, models, 0, 0);
    CHECK(std::abs(rb.fitted_slope + 1.0) <= 0.1);
    CHECK(rb.verdict);

    // one annihilated axis: the exponents add
    Rng rng(8);
    std::vector<double> c(model->dim(), 0.0);
    for (std::size_t n = t1 + 1; n <= model->dim(); ++n) c[n - 1] = rng.uniform(-1.0, 1.0);
    GridFunction tail(grid, Side::UnitInterval, basis.synthesize(c));
    TensorFunction f1;
    f1.terms.push_back({1.0, {tail, ind_t}});
    f1 = normalize_terms(f1, models);
    DecayReport r1 = tensor_heat_decay(f1, sched, bases, models, t1, 1);
    CHECK(r1.fitted_slope <= -1.4);
    CHECK(r1.verdict);

    // a term with no tail factor is refused with a diagnostic naming it
    TensorFunction badf;
    badf.terms.push_back({1.0, {ind_t, ind_t}});
    CHECK_THROWS_WITH_AS(tensor_heat_decay(badf, sched, bases, models, t1, 1),
                         doctest::Contains("term 1"), DataError);
}

TEST_CASE("three axes: split count and decay run") {
    auto model = axis_model(6, Weight::exp_linear());
    BasisState basis = BasisState::haar_basis(model);
    std::vector<const BasisState*> bases{&basis, &basis, &basis};
    std::vector<std::shared_ptr<const WeightedModel>> models{model, model, model};
    Rng rng(21);

    TensorFunction f;
    TensorTerm t;
    t.lambda = 1.0;
    for (int j = 0; j < 3; ++j)
        t.factors.push_back(random_function(model->grid_ptr(), Side::UnitInterval, rng));
    f.terms.push_back(std::move(t));
    TensorSplit split = tensor_projection_split(f, 8, bases);
    CHECK(split.components.size() == 7); // 2^3 - 1

    // single separable term: the sup factorizes across all three axes
    auto ind = halfline_indicator(model->grid_ptr(), -1.0, 0.0);
    TensorFunction base;
    base.terms.push_back({1.0, {ind.f, ind.f, ind.f}});
    TensorHeat th(base, models);
    HeatEvolver ev(ind.f, model);
    double axis = sup_norm_at(ev, 4.0);
    CHECK(th.sup_norm(4.0, 50.0) == doctest::Approx(axis * axis * axis).epsilon(1e-10));

    // baseline rate N/2 = 3/2 on a short schedule
    base = normalize_terms(base, models);
    DecayReport rb = tensor_heat_decay(base, TimeSchedule{1.0, 4.0, 8}, bases, models, 0, 0, 10.0);
    CHECK(rb.theoretical_exponent == doctest::Approx(-1.5));
    CHECK(std::abs(rb.fitted_slope + 1.5) < 0.15);
}

TEST_CASE("product weight refuses a weight without fast growth") {
    std::vector<double> xs, ws;
    for (int i = -400; i <= 400; ++i) {
        double x = i / 10.0;
        xs.push_back(x);
        ws.push_back((1.0 + std::abs(x)) * (1.0 + std::abs(x)));
    }
    CHECK_THROWS_AS(build_product_weight(Weight::tabulated(xs, ws), 2, 1.0), DataError);
}
