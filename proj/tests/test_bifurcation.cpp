#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "tddebif/bifurcation.hpp"
#include "tddebif/errors.hpp"
#include "tddebif/numeric.hpp"

using namespace tddebif;
using doctest::Approx;

namespace {

void check_point_invariants(const ModelParams& p, const HopfPoint& h) {
    CHECK(std::abs(hopf_residual(p, h.xi, h.omega)) < 1e-8);
    CHECK(h.omega > 0);
    CHECK(h.gamma == Approx(gamma_of_xi(p, h.xi)).epsilon(1e-14));
    double ph = h.omega * h.tau, c = std::cos(ph), s = std::sin(ph);
    CHECK(std::abs(c) < 1);
    switch (h.regime) {
        case Regime::ConstDelay:
            if (p.g.decreasing()) CHECK((c < 0 && s > 0));
            else CHECK((c > 0 && s < 0));
            break;
        case Regime::SdGConst:
            if (p.v.decreasing()) {
                CHECK(s < 0);
                CHECK(h.gamma < p.mu);
            } else {
                CHECK(s > 0);
                CHECK(h.gamma > p.mu);
            }
            break;
        case Regime::General:
            break;
    }
    CHECK(int(std::floor(ph / (2 * M_PI))) == h.k);
}

// Smallest exponent in [lo, hi] at which `has` holds, by bisection.
template <class F>
double onset(F has, double lo, double hi) {
    for (int i = 0; i < 30; ++i) {
        double m = 0.5 * (lo + hi);
        (has(m) ? hi : lo) = m;
    }
    return hi;
}

void check_same_set(const std::vector<HopfPoint>& a, const std::vector<HopfPoint>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].k == b[i].k);
        CHECK(std::abs(a[i].xi - b[i].xi) < 1e-8);
        CHECK(std::abs(a[i].gamma - b[i].gamma) < 1e-8);
        CHECK(std::abs(a[i].omega - b[i].omega) < 1e-8);
    }
}

std::vector<HopfPoint> by_window(const ModelParams& p, int k_max) {
    std::vector<HopfPoint> out;
    for (int k = 0; k <= k_max; ++k)
        for (auto& h : p.v.is_constant() ? hopf_const_delay(p, k) : hopf_sd_gconst(p, k)) out.push_back(h);
    return out;
}

}  // namespace

TEST_CASE("folds: none for constant nonlinearities") {
    auto p = fixtures::make(2, 0.3, 0.8, 1, fixtures::constant(1), fixtures::constant(1));
    CHECK(find_folds(p).empty());
}

TEST_CASE("folds: two between the corner decay rates for a speeding transport") {
    auto p = fixtures::speeding_high_growth(10);
    auto folds = find_folds(p);
    REQUIRE(folds.size() == 2);
    for (const auto& f : folds) {
        CHECK(f.gamma > 0.2827);
        CHECK(f.gamma < 0.6291);
        CHECK(std::abs(fold_discriminant(p, f.xi)) < 1e-9);
        auto q = p;
        q.gamma = f.gamma;
        CHECK(std::abs(h_residual(q, f.xi)) < 1e-10 * f.gamma * f.xi);
        CHECK(std::abs(char_eval(context_at(p, f.xi), 0.0)) < 1e-8);
    }
}

TEST_CASE("folds coincide with the extrema of the steady branch") {
    auto p = fixtures::speeding_high_growth(10);
    auto folds = find_folds(p);
    REQUIRE(folds.size() == 2);
    // Extrema of gamma(xi) located by golden section on a dense branch.
    auto branch = steady_branch(p, 0.3, 3.0, 20001);
    for (const auto& f : folds) {
        std::size_t best = 0;
        for (std::size_t i = 1; i + 1 < branch.size(); ++i)
            if (std::abs(branch[i].xi - f.xi) < std::abs(branch[best].xi - f.xi)) best = i;
        double sgn = branch[best].gamma > branch[best - 5].gamma ? 1 : -1;
        auto obj = [&](double x) { return sgn * gamma_of_xi(p, x); };
        double x = golden_max(obj, branch[best - 5].xi, branch[best + 5].xi, 1e-13);
        CHECK(std::abs(x - f.xi) < 1e-6);
        CHECK(std::abs(gamma_of_xi(p, x) - f.gamma) < 1e-8);
    }
}

TEST_CASE("constant delay, repressing feedback: onset of the first Hopf pair") {
    auto none = fixtures::repressor_const_delay(23);
    CHECK(hopf_const_delay(none, 0).empty());
    auto two = fixtures::repressor_const_delay(50);
    auto hs = hopf_const_delay(two, 0);
    REQUIRE(hs.size() == 2);
    for (const auto& h : hs) {
        check_point_invariants(two, h);
        CHECK(h.regime == Regime::ConstDelay);
    }
    // Second window needs a much steeper feedback.
    double n1 = onset([](double n) { return !hopf_const_delay(fixtures::repressor_const_delay(n), 1).empty(); }, 50, 400);
    CHECK(n1 > 100);
    CHECK(n1 < 101);
}

TEST_CASE("constant delay: Hopf points close in on the corners") {
    auto corners = corner_gammas(fixtures::repressor_const_delay(100));
    double glo = std::min(corners.gamma1, corners.gamma2), ghi = std::max(corners.gamma1, corners.gamma2);
    double gap_prev = 1e9, dlo_first = 0, dhi_first = 0, dlo = 0, dhi = 0;
    for (double n : {100.0, 200.0, 400.0}) {
        auto hs = hopf_const_delay(fixtures::repressor_const_delay(n), 0);
        REQUIRE(hs.size() == 2);
        // Sorted by xi: the point below the threshold carries the larger decay rate.
        CHECK(hs[0].xi < 1.0);
        CHECK(hs[1].xi > 1.0);
        double gap = hs[1].xi - hs[0].xi;
        CHECK(gap < gap_prev);
        gap_prev = gap;
        dhi = std::abs(hs[0].gamma - ghi);
        dlo = std::abs(hs[1].gamma - glo);
        if (n == 100.0) {
            dlo_first = dlo;
            dhi_first = dhi;
        }
    }
    CHECK(dlo < dlo_first);
    CHECK(dhi < dhi_first);
    CHECK(dlo < 5e-3);
    CHECK(dhi < 5e-3);
}

TEST_CASE("constant delay, activating feedback: points respect the window") {
    auto p = fixtures::activator_const_delay(30);
    for (double gamma : {0.2, 0.5, 1.0}) {
        p.gamma = gamma;
        for (int k = 0; k < 3; ++k)
            for (const auto& h : hopf_const_delay(p, k)) check_point_invariants(p, h);
    }
}

TEST_CASE("slowing transport: onset exponents") {
    CHECK(hopf_sd_gconst(fixtures::slowing_fast_growth(116), 0).empty());
    auto p = fixtures::slowing_fast_growth(118);
    auto hs = hopf_sd_gconst(p, 0);
    CHECK(!hs.empty());
    for (const auto& h : hs) check_point_invariants(p, h);

    const double expected[] = {34, 147, 336};
    for (int k = 0; k < 3; ++k) {
        double m = onset([k](double m) { return !hopf_sd_gconst(fixtures::slowing_slow_growth(m), k).empty(); }, 1, 1000);
        CHECK(m == Approx(expected[k]).epsilon(0.05));
    }
}

TEST_CASE("slowing transport: every Hopf point lies below the loss rate") {
    fixtures::Draw d(41);
    for (int i = 0; i < 30; ++i) {
        auto p = d.params(0, -1, 10, 500);
        for (int k = 0; k < 3; ++k)
            for (const auto& h : hopf_sd_gconst(p, k)) CHECK(h.gamma < p.mu);
    }
    for (int i = 0; i < 30; ++i) {
        auto p = d.params(0, 1, 10, 500);
        for (int k = 0; k < 3; ++k)
            for (const auto& h : hopf_sd_gconst(p, k)) CHECK(h.gamma > p.mu);
    }
}

TEST_CASE("speeding transport: two Hopf points with periods from the analytic condition") {
    auto p = fixtures::speeding_wide_range(1.2);
    auto hs = hopf_sd_gconst(p, 0);
    REQUIRE(hs.size() == 2);
    for (const auto& h : hs) check_point_invariants(p, h);
    // Right point (larger gamma, smaller xi) is sorted first by xi.
    CHECK(2 * M_PI / hs[0].omega == Approx(16.95).epsilon(0.01));
    CHECK(hs[1].gamma == Approx(2.14729).epsilon(1e-5));
    // No oscillation below the minimal exponent of the Hopf curve.
    CHECK(hopf_sd_gconst(fixtures::speeding_wide_range(0.83), 0).empty());
    CHECK(hopf_sd_gconst(fixtures::speeding_wide_range(0.84), 0).size() == 2);
}

TEST_CASE("general solver on two non-constant nonlinearities") {
    auto p = fixtures::both_falling(200, 200, 1.0);
    auto hs = hopf_general(p, 4);
    CHECK(hs.size() == 10);
    for (const auto& h : hs) {
        check_point_invariants(p, h);
        CHECK(h.regime == Regime::General);
    }
    // Two points per window; the lower one sits just right of the lower corner.
    auto c = corner_gammas(p);
    REQUIRE(c.gamma13.has_value());
    double lowest = 1e9;
    for (const auto& h : hs) lowest = std::min(lowest, h.gamma);
    CHECK(lowest > *c.gamma13);
    CHECK(lowest < *c.gamma13 + 0.01);
}

TEST_CASE("general solver reduces to the special solvers") {
    fixtures::Draw d(42);
    int nonempty = 0;
    for (int i = 0; i < 20; ++i) {
        auto p = d.params(i % 2 ? 1 : -1, 0, 5, 300);
        auto special = by_window(p, 2);
        check_same_set(hopf_general(p, 2), special);
        for (const auto& h : special) check_point_invariants(p, h);
        nonempty += !special.empty();
    }
    for (int i = 0; i < 20; ++i) {
        auto p = d.params(0, i % 2 ? 1 : -1, 5, 300);
        auto special = by_window(p, 2);
        check_same_set(hopf_general(p, 2), special);
        for (const auto& h : special) check_point_invariants(p, h);
        nonempty += !special.empty();
    }
    CHECK(nonempty >= 8);
}

TEST_CASE("regime errors") {
    CHECK_THROWS_AS(hopf_const_delay(fixtures::slowing_fast_growth(), 0), RegimeError);
    CHECK_THROWS_AS(hopf_sd_gconst(fixtures::repressor_const_delay(), 0), RegimeError);
    auto step = fixtures::both_falling();
    step.g.exponent = kInfinity;
    CHECK_THROWS_AS(hopf_general(step, 1), RegimeError);
    CHECK_THROWS_AS(find_folds(step), RegimeError);
}

namespace {

std::vector<CurveEvent> events_of(const BifCurve& c, EventKind kind) {
    std::vector<CurveEvent> out;
    for (const auto& e : c.events)
        if (e.kind == kind) out.push_back(e);
    return out;
}

// Delta'(0) by central differences on the raw characteristic function.
double slope_at_zero(const ModelParams& p, double xi) {
    auto c = context_at(p, xi);
    const double d = 1e-6;
    return (char_eval(c, cplx(d, 0)).real() - char_eval(c, cplx(-d, 0)).real()) / (2 * d);
}

ScanOptions no_probes() {
    ScanOptions s;
    s.bautin = false;
    return s;
}

}  // namespace

TEST_CASE("fold curve: points solve the fold condition and branches are continuous") {
    auto base = fixtures::speeding_high_growth(10);
    auto c = trace_curve(base, CurveKind::Fold, SweepParam::M, 1, 30);
    REQUIRE(c.points.size() > 100);
    for (const auto& pt : c.points) {
        auto q = with_sweep(base, SweepParam::M, pt.param);
        CHECK(std::abs(fold_discriminant(q, pt.xi)) < 1e-9);
        CHECK(pt.gamma == Approx(gamma_of_xi(q, pt.xi)).epsilon(1e-14));
    }
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        const auto &a = c.points[i - 1], &b = c.points[i];
        if (a.branch != b.branch) continue;
        CHECK(b.param > a.param);
        CHECK(std::abs(std::log(b.xi / a.xi)) < 0.1);
    }
}

TEST_CASE("fold curve: cusp of the speeding transport with large loss") {
    auto base = fixtures::speeding_high_growth(10);
    auto c = trace_curve(base, CurveKind::Fold, SweepParam::M, 1, 30);
    codim2_scan(c, no_probes());
    auto cusps = events_of(c, EventKind::Cusp);
    REQUIRE(cusps.size() == 1);
    CHECK(std::abs(cusps[0].gamma - 0.4844) < 1e-2);
    CHECK(std::abs(cusps[0].param - 5.0002) < 1e-2);
    // Oracle: smallest exponent at which the steady branch has a turning point,
    // from sign changes of the fold discriminant on a dense grid.
    auto has_fold = [&](double m) {
        auto q = with_sweep(base, SweepParam::M, m);
        auto r = xi_search_range(q);
        auto grid = log_grid(r.lo, r.hi, 200000);
        for (std::size_t i = 1; i < grid.size(); ++i)
            if ((fold_discriminant(q, grid[i - 1]) > 0) != (fold_discriminant(q, grid[i]) > 0)) return true;
        return false;
    };
    CHECK(std::abs(cusps[0].param - onset(has_fold, 1, 30)) < 1e-3);
    // No Hopf points at all here, so neither double-zero nor fold-Hopf points.
    CHECK(events_of(c, EventKind::BogdanovTakens).empty());
    CHECK(events_of(c, EventKind::FoldHopf).empty());
}

TEST_CASE("fold curve: double zero and fold-Hopf points of the wide-range speeding transport") {
    auto base = fixtures::speeding_wide_range(2);
    auto c = trace_curve(base, CurveKind::Fold, SweepParam::M, 0.5, 8);
    codim2_scan(c, no_probes());
    auto cusps = events_of(c, EventKind::Cusp);
    REQUIRE(cusps.size() == 1);
    CHECK(std::abs(cusps[0].gamma - 2.0321) < 2e-2);
    CHECK(std::abs(cusps[0].param - 2.1058) < 2e-2);

    auto fh = events_of(c, EventKind::FoldHopf);
    REQUIRE(fh.size() == 2);
    std::sort(fh.begin(), fh.end(), [](const auto& a, const auto& b) { return a.param < b.param; });
    CHECK(std::abs(fh[0].gamma - 1.9354) < 2e-2);
    CHECK(std::abs(fh[0].param - 2.1748) < 2e-2);
    CHECK(std::abs(fh[1].gamma - 1.7153) < 2e-2);
    CHECK(std::abs(fh[1].param - 2.4612) < 2e-2);
    // At a fold-Hopf point the fold equilibrium carries a purely imaginary pair:
    // a Hopf point of some window sits at the same xi.
    for (const auto& e : fh) {
        auto q = with_sweep(base, SweepParam::M, e.param);
        double best = 1e9;
        for (const auto& h : hopf_sd_gconst(q, 1)) best = std::min(best, std::abs(std::log(h.xi / e.xi)));
        CHECK(best < 1e-2);
    }

    auto bt = events_of(c, EventKind::BogdanovTakens);
    REQUIRE(bt.size() == 1);
    // Oracle: Delta'(0) on the fold branch, bisected in m on finite differences.
    auto fold_slope = [&](double m) {
        auto q = with_sweep(base, SweepParam::M, m);
        double best = 1e9, s = 0;
        for (const auto& f : find_folds(q))
            if (std::abs(std::log(f.xi / bt[0].xi)) < best) best = std::abs(std::log(f.xi / bt[0].xi)), s = slope_at_zero(q, f.xi);
        return s;
    };
    double lo = 3.0, hi = 3.5;
    REQUIRE((fold_slope(lo) > 0) != (fold_slope(hi) > 0));
    for (int i = 0; i < 30; ++i) {
        double m = 0.5 * (lo + hi);
        ((fold_slope(m) > 0) == (fold_slope(lo) > 0) ? lo : hi) = m;
    }
    CHECK(std::abs(bt[0].param - lo) < 1e-3);
}

TEST_CASE("Hopf curve: turning point and end on the fold curve") {
    auto base = fixtures::speeding_wide_range(2);
    auto c = trace_curve(base, CurveKind::Hopf, SweepParam::M, 0.5, 8);
    codim2_scan(c, no_probes());
    for (const auto& pt : c.points) CHECK(std::abs(hopf_residual(with_sweep(base, SweepParam::M, pt.param), pt.xi, pt.omega)) < 1e-8);
    auto ends = events_of(c, EventKind::BranchEnd);
    REQUIRE(ends.size() == 2);
    auto exists = [&](double m) { return !hopf_sd_gconst(with_sweep(base, SweepParam::M, m), 0).empty(); };
    double m_min = onset(exists, 0.5, 1.0);
    for (const auto& e : ends) CHECK(std::abs(e.param - m_min) < 1e-3);
    CHECK(m_min == Approx(0.8355).epsilon(1e-3));
    // The upper branch meets the fold curve where the frequency vanishes.
    auto bt = events_of(c, EventKind::BogdanovTakens);
    REQUIRE(bt.size() == 1);
    CHECK(bt[0].param == Approx(3.286).epsilon(2e-3));
}

TEST_CASE("Hopf curve of the slowing transport approaches the corner and the loss rate") {
    auto base = fixtures::slowing_slow_growth(100);
    auto c = trace_curve(base, CurveKind::Hopf, SweepParam::M, 20, 300);
    std::vector<double> last;
    for (const auto& pt : c.points)
        if (pt.param == 300) last.push_back(pt.gamma);
    REQUIRE(last.size() == 2);
    std::sort(last.begin(), last.end());
    auto corners = corner_gammas(base);
    CHECK(last[0] > corners.gamma3);
    CHECK(last[0] < corners.gamma3 + 0.02);
    CHECK(last[1] < base.mu);
    CHECK(last[1] > base.mu - 0.03);
}

TEST_CASE("criticality of the two Hopf points of the wide-range speeding transport") {
    auto p = fixtures::speeding_wide_range(2);
    auto hs = hopf_sd_gconst(p, 0);
    REQUIRE(hs.size() == 2);
    std::sort(hs.begin(), hs.end(), [](const auto& a, const auto& b) { return a.gamma < b.gamma; });
    auto left = probe_amplitudes(p, hs[0]);
    auto right = probe_amplitudes(p, hs[1]);
    CHECK(left.ratio > std::sqrt(2.0));
    CHECK(right.ratio < std::sqrt(2.0));
    CHECK(criticality(p, hs[0]) == Criticality::Super);
    CHECK(criticality(p, hs[1]) == Criticality::Sub);
    // Probes sit on the unstable side, the larger one four times further out.
    for (const auto& [r, h] : {std::pair{left, hs[0]}, std::pair{right, hs[1]}}) {
        CHECK((r.gamma_large - h.gamma) == Approx(4 * (r.gamma_small - h.gamma)).epsilon(1e-12));
        CHECK(r.amplitude_small > 0);
    }
}

TEST_CASE("criticality: repressing feedback with constant delay is supercritical") {
    auto p = fixtures::repressor_const_delay(50);
    for (const auto& h : hopf_const_delay(p, 0)) {
        auto r = probe_amplitudes(p, h);
        CHECK(r.ratio == Approx(2).epsilon(0.25));
        CHECK(criticality(p, h) == Criticality::Super);
    }
}
