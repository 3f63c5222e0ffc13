#include <doctest.h>

#include <cmath>
#include <fstream>

#include "heatbasis/grid.hpp"
#include "heatbasis/weight.hpp"
#include "heatbasis/functionals.hpp"
#include "oracles.hpp"

using namespace heatbasis;

TEST_CASE("dyadic grid levels and cells") {
    auto g1 = make_dyadic_grid(1);
    CHECK(g1->cells() == 2);
    CHECK(g1->s_node(0) == 0.0);
    CHECK(g1->s_node(1) == 0.5);
    CHECK(g1->s_node(2) == 1.0);

    CHECK_THROWS_AS(make_dyadic_grid(0), ConfigError);
    CHECK_THROWS_AS(make_dyadic_grid(25), ConfigError);

    auto g3 = make_dyadic_grid(3);
    CHECK(g3->cells() == 8);
    double total = 0.0;
    for (std::size_t i = 0; i < 8; ++i) total += g3->s_node(i + 1) - g3->s_node(i);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g3->cell_width() == 0.125);

    // log nodes strictly increasing, last node exactly 0
    auto g = make_dyadic_grid(6);
    for (std::size_t i = 1; i < g->cells(); ++i) CHECK(g->log_node(i) < g->log_node(i + 1));
    CHECK(g->log_node(g->cells()) == 0.0);
    CHECK(g->x_min() == doctest::Approx(-6.0 * std::log(2.0)));

    // half-open cells: every point in exactly one cell
    CHECK(g->cell_of_s(0.5) == g->cells() / 2 - 1);
    CHECK(g->cell_of_s(1.0) == g->cells() - 1);
    CHECK_THROWS_AS(g->cell_of_s(0.0), IndexError);
}

TEST_CASE("weighted norm against analytic antiderivative") {
    auto grid = make_dyadic_grid(10);
    Weight w = Weight::exp_linear();
    auto ind = halfline_indicator(grid, -1.0, 0.0);

    // int_{lo}^{hi} e^{-x} dx = e^{-lo} - e^{-hi} on the snapped support
    double oracle = std::exp(-ind.lo) - std::exp(-ind.hi);
    double norm = weighted_norm(ind.f, 1.0, w);
    CHECK(norm == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(norm == doctest::Approx(std::exp(1.0) - 1.0).epsilon(3e-3));

    GridFunction zero = zero_function(grid, Side::NegativeHalfline);
    CHECK(weighted_norm(zero, 1.0, w) == 0.0);

    // unit tabulated weight: the p=2 norm of the indicator is the root of its length
    Weight one = Weight::tabulated({-50.0, 0.0, 50.0}, {1.0, 1.0, 1.0});
    double len = ind.hi - ind.lo;
    CHECK(weighted_norm(ind.f, 2.0, one) == doctest::Approx(std::sqrt(len)).epsilon(1e-12));

    CHECK_THROWS_AS(weighted_norm(ind.f, 0.5, w), DomainError);
    GridFunction bad = ind.f;
    bad[5] = std::nan("");
    CHECK_THROWS_AS(weighted_norm(bad, 1.0, w), DataError);
}

TEST_CASE("quadrature order consistency and scaling") {
    auto grid = make_dyadic_grid(8);
    Rng rng(21);
    for (Weight w : {Weight::exp_linear(), Weight::gauss_exp()}) {
        GridFunction f = random_function(grid, Side::NegativeHalfline, rng);
        double n8 = weighted_norm(f, 1.0, w, 8);
        double n16 = weighted_norm(f, 1.0, w, 16);
        CHECK(n8 == doctest::Approx(n16).epsilon(1e-10));

        double n = weighted_norm(f, 2.0, w);
        GridFunction g = f;
        for (auto& v : g.values) v *= -3.5;
        CHECK(weighted_norm(g, 2.0, w) == doctest::Approx(3.5 * n).epsilon(1e-14));
    }
}

TEST_CASE("norm unchanged under exact grid refinement") {
    auto coarse = make_dyadic_grid(7);
    auto fine = make_dyadic_grid(8);
    Rng rng(5);
    GridFunction f = random_function(coarse, Side::NegativeHalfline, rng);
    GridFunction g(fine, Side::NegativeHalfline);
    for (std::size_t i = 0; i < f.size(); ++i) {
        g[2 * i] = f[i];
        g[2 * i + 1] = f[i];
    }
    // the refinement splits each cell in two in s, which matches the half-line
    // cells exactly; cell 0 splits into the new cell 0 and cell 1
    Weight w = Weight::exp_linear();
    CHECK(weighted_norm(g, 1.0, w) == doctest::Approx(weighted_norm(f, 1.0, w)).epsilon(1e-13));
}

TEST_CASE("fast growth check with calculus oracles") {
    // gauss-exp: argmax of (1+u)^m e^{-u^2/2} solves u^2 + u = m
    FastGrowthReport r = check_fast_growth(Weight::gauss_exp(), 3);
    CHECK(r.pass);
    for (const auto& e : r.entries) {
        double u = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * e.m));
        double sup = std::pow(1.0 + u, e.m) * std::exp(-0.5 * u * u);
        CHECK(e.supremum == doctest::Approx(sup).epsilon(1e-3));
        CHECK(e.argmax == doctest::Approx(u).epsilon(0.05));
        CHECK(e.interior);
    }

    // exp-linear: argmax at u = m-1
    FastGrowthReport r2 = check_fast_growth(Weight::exp_linear(), 5);
    CHECK(r2.pass);
    CHECK(r2.entries[4].argmax == doctest::Approx(4.0).epsilon(0.02));

    // a polynomial weight declared tabulated fails at m = 3
    std::vector<double> xs, ws;
    for (int i = -400; i <= 400; ++i) {
        double x = i / 10.0;
        xs.push_back(x);
        ws.push_back((1.0 + std::abs(x)) * (1.0 + std::abs(x)));
    }
    FastGrowthReport r3 = check_fast_growth(Weight::tabulated(xs, ws), 3);
    CHECK_FALSE(r3.pass);
    CHECK(r3.entries[0].pass);
    CHECK(r3.entries[1].pass);
    CHECK_FALSE(r3.entries[2].pass);
}

TEST_CASE("weight invariants") {
    Weight w = Weight::gauss_exp();
    w.validate();
    for (double x : {0.0, 0.7, 3.3, 17.0}) CHECK(w(x) == w(-x));

    CHECK_THROWS_AS(Weight::tabulated({0.0, 0.0}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(Weight::tabulated({0.0, 1.0}, {1.0, -1.0}), DataError);

    // asymmetric table flagged by validate
    Weight bad = Weight::tabulated({-1.0, 0.0, 1.0}, {2.0, 1.0, 3.0});
    CHECK_THROWS_AS(bad.validate(1.0, 8), DataError);
}

TEST_CASE("growth suprema in closed form dominate the probe") {
    for (Weight w : {Weight::exp_linear(), Weight::gauss_exp()}) {
        std::vector<double> log_b = growth_suprema_log(w, 20);
        for (int k = 1; k <= 20; ++k) {
            double probe = 0.0;
            for (int j = 0; j <= 2000; ++j) {
                double u = 40.0 * j / 2000.0;
                probe = std::max(probe, k * std::log1p(u) - std::log(w(u)));
            }
            CHECK(log_b[k - 1] >= probe - 1e-9);
            CHECK(log_b[k - 1] <= probe + 1e-2 + 1e-9);
        }
    }
}

TEST_CASE("cell masses match brute quadrature") {
    auto grid = make_dyadic_grid(7);
    for (Weight w : {Weight::exp_linear(), Weight::gauss_exp()}) {
        WeightedModel model(grid, w, 1.0);
        Rng rng(9);
        GridFunction f = random_function(grid, Side::NegativeHalfline, rng);
        double brute = oracles::brute_weighted_norm(f, model);
        CHECK(model.norm(f) == doctest::Approx(brute).epsilon(1e-10));

        WeightedModel model2(grid, w, 2.0);
        GridFunction h = random_function(grid, Side::UnitInterval, rng);
        CHECK(model2.norm(h) == doctest::Approx(oracles::brute_weighted_norm(h, model2)).epsilon(1e-10));
    }
}
