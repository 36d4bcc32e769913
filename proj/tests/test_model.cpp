#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "tddebif/errors.hpp"
#include "tddebif/model.hpp"
#include "tddebif/numeric.hpp"

using namespace tddebif;
using doctest::Approx;

TEST_CASE("hill value") {
    Nonlinearity g{1.0, 0.5, 1.0, 50.0};
    CHECK(eval_nl(g, 1.0) == Approx(0.75).epsilon(1e-15));
    Nonlinearity c{0.7, 0.7, 2.0, 9.0};
    for (double x : {0.0, 0.3, 2.0, 40.0}) CHECK(eval_nl(c, x) == 0.7);
    Nonlinearity step{1.0, 0.5, 1.0, kInfinity};
    CHECK(eval_nl(step, 2.0) == 0.5);
    CHECK(eval_nl(step, 0.5) == 1.0);
    CHECK_THROWS_AS(eval_nl(step, 1.0), DomainError);
}

TEST_CASE("hill value stays finite for huge exponents") {
    Nonlinearity g{1.0, 0.1, 1.0, 1e4};
    for (double x : {1e-6, 0.999, 1.0, 1.001, 1e6}) {
        double y = eval_nl(g, x);
        CHECK(std::isfinite(y));
        CHECK(y >= 0.1);
        CHECK(y <= 1.0);
    }
    CHECK(std::isfinite(eval_dnl(g, 1.0001)));
}

TEST_CASE("hill derivative matches central differences") {
    Nonlinearity g{1.0, 0.5, 1.0, 2.0};
    auto fd = [&](double x) {
        double h = 1e-5 * x;
        return (eval_nl(g, x + h) - eval_nl(g, x - h)) / (2 * h);
    };
    for (double x : {1.0, 0.3, 2.7}) CHECK(eval_dnl(g, x) == Approx(fd(x)).epsilon(1e-8));
    Nonlinearity up{0.2, 3.0, 0.7, 13.0};
    for (double x : {0.5, 0.7, 0.75, 1.1}) CHECK(eval_dnl(up, x) == Approx([&] {
        double h = 1e-6 * x;
        return (eval_nl(up, x + h) - eval_nl(up, x - h)) / (2 * h);
    }()).epsilon(1e-7));
    CHECK_THROWS_AS(eval_dnl(Nonlinearity{1, 0.5, 1, kInfinity}, 2.0), DomainError);
}

TEST_CASE("log slope") {
    CHECK(log_slope(1.0, 7.0, 1.0) == 0.0);
    CHECK(log_slope(1.0, 4.0, 3.0) == Approx(-1.0).epsilon(1e-14));
    // Closed form at the threshold.
    for (double p : {2.0, 5.0, 40.0})
        for (double r : {0.1, 0.5, 4.0}) CHECK(log_slope(1.0, p, r) == Approx(p * (1 - r) / (2 * (1 + r))));
}

TEST_CASE("log slope peak location and height by grid scan") {
    for (double p : {2.0, 6.0, 30.0}) {
        for (double r : {0.05, 0.4, 2.5, 20.0}) {
            auto grid = log_grid(1e-3, 1e3, 200001);
            double best_x = 0, best = -1;
            for (double x : grid) {
                double f = std::abs(log_slope(x, p, r));
                if (f > best) best = f, best_x = x;
            }
            double x_star = std::pow(r, 1.0 / (2 * p));
            double f_star = p * std::abs(1 - std::sqrt(r)) / (1 + std::sqrt(r));
            CHECK(best_x == Approx(x_star).epsilon(2e-4));
            CHECK(best == Approx(f_star).epsilon(1e-7));
        }
    }
}

TEST_CASE("log slope identity with the derivative") {
    fixtures::Draw d(11);
    for (int i = 0; i < 50; ++i) {
        Nonlinearity nl = d.hill(i % 2 ? 1 : -1, 0.5, 60.0);
        for (double x : log_grid(nl.theta * 1e-3, nl.theta * 1e3, 61)) {
            double lhs = eval_dnl(nl, x) * x / eval_nl(nl, x);
            double rhs = log_slope(x / nl.theta, nl.exponent, nl.lo / nl.hi);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1e-300, std::abs(rhs)) + 1e-300);
            CHECK(nl_log_slope(nl, x) == Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("log slope tails and decay in the exponent") {
    for (double p : {2.0, 5.0, 20.0}) {
        for (double r : {0.1, 3.0}) {
            CHECK(std::abs(log_slope(1e-3 * 1e-3, p, r)) < 1e-6);
            CHECK(std::abs(log_slope(1e6, p, r)) < 1e-6);
        }
    }
    for (double x : {0.8, 1.25}) {
        double a = std::abs(log_slope(x, 10, 0.2)), b = std::abs(log_slope(x, 100, 0.2)),
               c = std::abs(log_slope(x, 1000, 0.2));
        CHECK(a > b);
        CHECK(b > c);
        CHECK(c < 1e-60);
    }
}

TEST_CASE("hill bounds hold on random draws") {
    fixtures::Draw d(3);
    for (int i = 0; i < 200; ++i) {
        Nonlinearity nl = d.hill(i % 3 - 1, 0.2, 500.0);
        for (double x : log_grid(1e-4, 1e4, 101)) {
            double y = eval_nl(nl, x);
            CHECK(y >= nl.min_value());
            CHECK(y <= nl.max_value());
        }
        CHECK(eval_nl(nl, nl.theta) == Approx(0.5 * (nl.lo + nl.hi)).epsilon(1e-15));
    }
}

TEST_CASE("steady delay, residual and decay rate") {
    auto p = fixtures::slowing_slow_growth();
    CHECK(steady_delay(p, 1.0) == Approx(60.0 / 7.0).epsilon(1e-14));
    CHECK(gamma_of_xi(p, 1.0) == Approx(0.2293).epsilon(5e-4 / 0.2293));

    auto trivial = fixtures::make(1.0, 0.0, 1.0, 1.0, fixtures::constant(1.0), fixtures::constant(1.0));
    CHECK(h_residual(trivial, 1.0) == 0.0);
    CHECK(fold_discriminant(trivial, 0.3) == -1.0);

    for (double xi : {0.2, 0.9, 1.0, 1.7}) {
        auto q = p;
        q.gamma = gamma_of_xi(p, xi);
        CHECK(std::abs(h_residual(q, xi)) < 1e-14);
    }
}

TEST_CASE("decay-rate slope has the sign of the fold discriminant") {
    fixtures::Draw d(5);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        auto p = d.params(d.uniform(-1, 1) > 0 ? 1 : -1, d.uniform(-1, 1) > 0 ? 1 : -1, 1.0, 30.0);
        for (double s : {0.3, 0.9, 1.0, 1.1, 3.0}) {
            double xi = s * p.v.theta;
            double M = fold_discriminant(p, xi);
            if (std::abs(M) < 1e-4) continue;
            double h = 1e-6 * xi;
            double slope = (gamma_of_xi(p, xi + h) - gamma_of_xi(p, xi - h)) / (2 * h);
            CHECK((slope > 0) == (M > 0));
            ++checked;
        }
    }
    CHECK(checked > 400);
}

TEST_CASE("fold discriminant at a balanced shared threshold") {
    auto p = fixtures::opposing_balanced(4.0, 4.0);
    CHECK(std::abs(fold_discriminant(p, 1.0) + 1.0) < 1e-6);
}

TEST_CASE("corner constants") {
    auto c = corner_gammas(fixtures::slowing_slow_growth());
    CHECK(std::abs(c.gamma3 - 0.0333) < 5e-4);
    CHECK(std::abs(c.gamma4 - 0.4959) < 5e-4);

    c = corner_gammas(fixtures::speeding_wide_range());
    CHECK(std::abs(c.gamma4 - 0.1895) < 5e-4);
    CHECK(std::abs(c.gamma3 - 1.2668) < 5e-4);

    c = corner_gammas(fixtures::both_falling());
    REQUIRE(c.gamma13);
    CHECK(std::abs(*c.gamma13 - 0.1104) < 5e-4);
    CHECK(std::abs(*c.gamma24 - 1.8196) < 5e-4);

    c = corner_gammas(fixtures::repressor_const_delay());
    CHECK(std::abs(c.gamma1 - 0.6334) < 5e-4);
    CHECK(std::abs(c.gamma2 - 1.2668) < 5e-4);

    c = corner_gammas(fixtures::opposing_balanced());
    CHECK(std::abs(*c.gamma24 - 0.2518) < 5e-4);
    CHECK(std::abs(*c.gamma_gv - 0.4725) < 5e-4);
    CHECK(c.dL <= c.dU);
}

TEST_CASE("sufficient conditions") {
    auto p = fixtures::slowing_slow_growth();
    const double expected[] = {84, 316, 703};
    for (int k = 0; k < 3; ++k) {
        auto s = sufficient_conditions(p, k);
        REQUIRE(s.m_vdown);
        CHECK(std::abs(*s.m_vdown - expected[k]) <= 1.0);
        CHECK(!s.m_vup);
    }
    auto both_const = fixtures::make(1, 0.1, 1, 1, fixtures::constant(1), fixtures::constant(2));
    CHECK(sufficient_conditions(both_const, 0).empty());
    CHECK_THROWS_AS(sufficient_conditions(fixtures::both_falling(), 0), RegimeError);

    auto gd = sufficient_conditions(fixtures::repressor_const_delay(), 0);
    REQUIRE(gd.n_gdown);
    // At the threshold exponent the log slope reaches the band edge exactly.
    double r = 2.0, tau = 0.5, g0 = 0.5;
    double scale = 1.4 * tau * std::exp(-0.2 * tau) * g0;
    double band = std::sqrt(1 + std::pow(M_PI / scale, 2));
    CHECK(-log_slope(1.0, *gd.n_gdown, r) == Approx(band).epsilon(1e-12));

    auto gu = sufficient_conditions(fixtures::activator_const_delay(), 0);
    REQUIRE(gu.n_gup);
    REQUIRE(gu.gamma_fold_g);
    // The bound is the steepest slope of beta e^{-mu tau} g.
    auto ap = fixtures::activator_const_delay();
    double steepest = 0;
    for (double x : lin_grid(0.01, 3.0, 300001))
        steepest = std::max(steepest, ap.beta * std::exp(-ap.mu) * eval_dnl(ap.g, x));
    CHECK(*gu.gamma_fold_g == Approx(steepest).epsilon(1e-7));

    auto vu = sufficient_conditions(fixtures::speeding_high_growth(), 0);
    REQUIRE(vu.gamma_fold_v);
    CHECK(*vu.gamma_fold_v > corner_gammas(fixtures::speeding_high_growth()).gamma4);
}

TEST_CASE("decay rate decreasing when both nonlinearities fall") {
    fixtures::Draw d(8);
    for (int i = 0; i < 100; ++i) {
        auto p = d.params(-1, -1, 0.5, 80.0);
        double prev = kInfinity;
        for (double xi : log_grid(1e-3, 1e3, 2001)) {
            double gm = gamma_of_xi(p, xi);
            CHECK(gm < prev);
            prev = gm;
        }
    }
}

TEST_CASE("residual sign at the ends of the admissible range") {
    fixtures::Draw d(9);
    for (int i = 0; i < 200; ++i) {
        auto p = d.params(i % 3 - 1, (i / 3) % 3 - 1, 0.5, 200.0);
        CHECK(h_residual(p, 1e-9) > 0);
        CHECK(h_residual(p, 2 * p.beta * p.g.max_value() / p.gamma) < 0);
    }
}

TEST_CASE("validation") {
    auto p = fixtures::both_falling();
    p.validate();
    p.mu = -1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
