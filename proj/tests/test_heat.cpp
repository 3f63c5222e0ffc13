#include <doctest.h>

#include <cmath>

#include "heatbasis/heat.hpp"
#include "oracles.hpp"

using namespace heatbasis;

namespace {
std::shared_ptr<const WeightedModel> model_for(int level, double p = 1.0) {
    return std::make_shared<const WeightedModel>(make_dyadic_grid(level), Weight::exp_linear(), p);
}
} // namespace

TEST_CASE("heat evolution of an indicator: error-function profile") {
    auto model = model_for(9);
    auto grid = model->grid_ptr();
    auto ind = halfline_indicator(grid, -1.0, 0.0);
    HeatEvolver ev(ind.f, model);

    for (double t : {0.5, 1.0, 4.0}) {
        for (double x : {-3.0, -1.0, -0.2, 0.0, 1.5}) {
            // closed convolution of the snapped indicator
            double oracle = 0.0;
            for (std::size_t i = 1; i < ind.f.size(); ++i) {
                if (ind.f[i] == 0.0) continue;
                double a = grid->log_node(i), b = grid->log_node(i + 1);
                oracle += 0.5 * (std::erf((x - a) / (2.0 * std::sqrt(t))) -
                                 std::erf((x - b) / (2.0 * std::sqrt(t))));
            }
            CHECK(ev.evaluate(x, t) == doctest::Approx(oracle).epsilon(1e-13));
            // and the quadrature oracle agrees
            CHECK(ev.evaluate(x, t) ==
                  doctest::Approx(oracles::brute_heat(ind.f, *model, t, x)).epsilon(1e-10));
        }
    }

    GridFunction zero = zero_function(grid, Side::NegativeHalfline);
    HeatEvolver evz(zero, model);
    CHECK(evz.evaluate(0.3, 2.0) == 0.0);
    CHECK_THROWS_AS(ev.evaluate(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(heat_evolve(ind.f, model, -1.0, 0.0), DomainError);
}

TEST_CASE("short-time limit recovers the cell value") {
    auto model = model_for(9);
    auto ind = halfline_indicator(model->grid_ptr(), -1.0, 0.0);
    HeatEvolver ev(ind.f, model);
    CHECK(ev.evaluate(-0.5, 1e-6) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(ev.evaluate(-3.0, 1e-6) == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("transferred-frame evolution agrees with brute quadrature") {
    auto model = model_for(8);
    Rng rng(3);
    GridFunction f = random_function(model->grid_ptr(), Side::UnitInterval, rng);
    HeatEvolver ev(f, model);
    for (double t : {1.0, 16.0})
        for (double x : {-4.0, -1.0, 0.5})
            CHECK(ev.evaluate(x, t) ==
                  doctest::Approx(oracles::brute_heat(f, *model, t, x)).epsilon(1e-9));
}

TEST_CASE("mass conservation along the schedule") {
    auto model = model_for(9);
    auto ind = halfline_indicator(model->grid_ptr(), -1.0, 0.0);
    HeatEvolver ev(ind.f, model);
    double mass = ev.mass();
    for (double t : {1.0, 4.0, 64.0, 1024.0}) {
        // integrate u(.,t) over a window holding all but < 1e-12 of the mass
        double lo = ev.support_lo() - 10.0 * std::sqrt(t) - 10.0;
        double hi = ev.support_hi() + 10.0 * std::sqrt(t) + 10.0;
        double got = gl_integrate_panels(lo, hi, std::sqrt(t) / 2.0,
                                         [&](double x) { return ev.evaluate(x, t); }, 12);
        CHECK(got == doctest::Approx(mass).epsilon(1e-10));
    }
}

TEST_CASE("semigroup property") {
    auto model = model_for(8);
    auto ind = halfline_indicator(model->grid_ptr(), -1.0, 0.0);
    HeatEvolver ev(ind.f, model);
    double t = 2.0, s = 3.0;
    for (double x : {-2.0, -0.5, 0.4, 3.0}) {
        // evolve to t, then convolve the profile with the kernel for s
        double lo = ev.support_lo() - 10.0 * std::sqrt(t) - 12.0;
        double hi = ev.support_hi() + 10.0 * std::sqrt(t) + 12.0 + std::abs(x);
        double two_step = gl_integrate_panels(lo, hi, 0.4, [&](double z) {
            double d = x - z;
            return std::exp(-d * d / (4.0 * s)) * ev.evaluate(z, t) / std::sqrt(4.0 * M_PI * s);
        }, 12);
        CHECK(two_step == doctest::Approx(ev.evaluate(x, t + s)).epsilon(1e-8));
    }
}

TEST_CASE("maximum principle and baseline rate") {
    auto model = model_for(9);
    auto ind = halfline_indicator(model->grid_ptr(), -1.0, 0.0);
    HeatEvolver ev(ind.f, model);
    double prev = sup_norm_at(ev, 1.0);
    for (double t : {2.0, 8.0, 64.0, 4096.0}) {
        double cur = sup_norm_at(ev, t);
        CHECK(cur <= prev * (1.0 + 1e-12));
        prev = cur;
    }
    // for unit-mass data, sqrt(t) ||u||_inf approaches (4 pi)^{-1/2}
    double mass = ev.mass();
    double t = 1048576.0;
    double scaled = std::sqrt(t) * sup_norm_at(ev, t) / mass;
    CHECK(scaled == doctest::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(0.02));
}

TEST_CASE("sup-norm grid refinement stability") {
    auto model = model_for(9);
    auto ind = halfline_indicator(model->grid_ptr(), -1.0, 0.0);
    HeatEvolver ev(ind.f, model);
    for (double t : {1.0, 37.0, 4096.0}) {
        double s1 = sup_norm_at(ev, t);
        double s2 = sup_norm_at(ev, t, 2.0);
        CHECK(std::abs(s1 - s2) <= 1e-3 * s2);
    }
}

TEST_CASE("balanced multipoles and their decay slopes") {
    auto model = model_for(10);
    auto grid = model->grid_ptr();
    TimeSchedule sched{1.0, 2.0, 19};

    GridFunction base = halfline_indicator(grid, -1.0, 0.0).f;
    DecayReport r0 = decay_fit(HeatEvolver(base, model), sched, 0);
    CHECK(r0.fitted_slope == doctest::Approx(-0.5).epsilon(0.1));
    CHECK(std::abs(r0.fitted_slope + 0.5) <= 0.05);
    CHECK(r0.verdict);

    GridFunction dip = balanced_multipole(grid, *model, 1);
    CHECK(std::abs(moment_functional(dip, 1, *model)) < 1e-13);
    DecayReport r1 = decay_fit(HeatEvolver(dip, model), sched, 1);
    CHECK(std::abs(r1.fitted_slope + 1.0) <= 0.1);
    CHECK(r1.verdict);
    CHECK(r1.scaled_plateau_ratio <= 1.05);

    GridFunction quad = balanced_multipole(grid, *model, 2);
    CHECK(std::abs(moment_functional(quad, 1, *model)) < 1e-12);
    CHECK(std::abs(moment_functional(quad, 2, *model)) < 1e-12);
    DecayReport r2 = decay_fit(HeatEvolver(quad, model), sched, 2);
    CHECK(r2.fitted_slope <= -1.4);
    CHECK(r2.verdict);

    GridFunction zero = zero_function(grid, Side::NegativeHalfline);
    DecayReport rz = decay_fit(HeatEvolver(zero, model), sched, 0);
    CHECK(rz.degenerate);
    CHECK(rz.verdict);
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS((TimeSchedule{0.5, 2.0, 10}.values()), ConfigError);
    CHECK_THROWS_AS((TimeSchedule{1.0, 1.0, 10}.values()), ConfigError);
    CHECK_THROWS_AS((TimeSchedule{1.0, 2.0, 1}.values()), ConfigError);
    auto v = TimeSchedule{1.0, 2.0, 5}.values();
    CHECK(v.size() == 5);
    CHECK(v.back() == 16.0);
}

TEST_CASE("integration-by-parts expansion") {
    auto model = model_for(9);
    auto grid = model->grid_ptr();

    GridFunction dip = balanced_multipole(grid, *model, 1);
    ExpansionCheck c1 = verify_prop13_expansion(dip, model, 1, 4.0, 0.0);
    CHECK(c1.pass);
    CHECK(c1.residual <= 1e-8 * (1.0 + std::abs(c1.lhs)));

    // m = 0: the expansion is the definition itself
    GridFunction ind = halfline_indicator(grid, -1.0, 0.0).f;
    ExpansionCheck c0 = verify_prop13_expansion(ind, model, 0, 2.0, -0.5);
    CHECK(c0.pass);
    CHECK(c0.residual <= 1e-12 * (1.0 + std::abs(c0.lhs)));

    GridFunction quad = balanced_multipole(grid, *model, 2);
    Rng rng(17);
    for (int trial = 0; trial < 6; ++trial) {
        double x = rng.uniform(-6.0, 2.0);
        double t = std::exp(rng.uniform(0.0, std::log(64.0)));
        ExpansionCheck c2 = verify_prop13_expansion(quad, model, 2, t, x);
        CHECK(c2.pass);
    }

    GridFunction zero = zero_function(grid, Side::NegativeHalfline);
    ExpansionCheck cz = verify_prop13_expansion(zero, model, 1, 2.0, 0.0);
    CHECK(cz.lhs == 0.0);
    CHECK(cz.rhs == 0.0);

    // violated moments are reported, not silently accepted
    ExpansionCheck bad = verify_prop13_expansion(ind, model, 1, 2.0, 0.0);
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.violated_moments.size() == 1);
    CHECK(bad.violated_moments[0] == 1);
}

TEST_CASE("hermite recurrence") {
    for (double u : {-1.3, 0.0, 0.7, 2.4}) {
        CHECK(hermite(0, u) == 1.0);
        CHECK(hermite(1, u) == 2.0 * u);
        CHECK(hermite(2, u) == doctest::Approx(4.0 * u * u - 2.0));
        CHECK(hermite(3, u) == doctest::Approx(8.0 * u * u * u - 12.0 * u));
    }
}

TEST_CASE("multipole construction needs enough truncated depth") {
    auto grid = make_dyadic_grid(2); // x_min ~ -1.39, blocks need [-3,-1]
    WeightedModel model(grid, Weight::exp_linear(), 1.0);
    CHECK_THROWS_AS(balanced_multipole(grid, model, 1), ConfigError);
}
