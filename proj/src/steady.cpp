#include "tddebif/steady.hpp"

#include <algorithm>
#include <cmath>

#include "tddebif/errors.hpp"
#include "tddebif/numeric.hpp"

namespace tddebif {

namespace {

SteadyState fill(const ModelParams& p, double xi, double gamma) {
    SteadyState s;
    s.xi = xi;
    s.gamma = gamma;
    s.tau = steady_delay(p, xi);
    s.A = gamma * nl_log_slope(p.v, xi);
    s.Q = gamma * nl_log_slope(p.g, xi);
    s.M = fold_discriminant(p, xi);
    return s;
}

// dh/dxi = gamma(xi) (xi g'/g + mu tau xi v'/v) - gamma.
double h_slope(const ModelParams& p, double xi) {
    double tau = steady_delay(p, xi);
    return gamma_of_xi(p, xi) * (nl_log_slope(p.g, xi) + p.mu * tau * nl_log_slope(p.v, xi)) - p.gamma;
}

void add_window(std::vector<Window>& w, const Nonlinearity& nl) {
    if (nl.is_constant()) return;
    double half = nl.is_step() ? 1e-3 : std::min(0.9, 10.0 / nl.exponent);
    w.push_back({nl.theta, half});
}

}  // namespace

SteadyState steady_state_at(const ModelParams& p, double xi) { return fill(p, xi, gamma_of_xi(p, xi)); }

SteadyState steady_state_for(const ModelParams& p, double xi) { return fill(p, xi, p.gamma); }

std::vector<double> xi_scan_grid(const ModelParams& p, double lo, double hi, std::size_t count) {
    std::vector<Window> windows;
    add_window(windows, p.g);
    add_window(windows, p.v);
    auto grid = refined_grid(lo, hi, count, windows, count / 4);
    // Never sample a step threshold itself.
    grid.erase(std::remove_if(grid.begin(), grid.end(),
                              [&](double x) {
                                  return (p.g.is_step() && x == p.g.theta) ||
                                         (p.v.is_step() && x == p.v.theta);
                              }),
               grid.end());
    return grid;
}

std::vector<SteadyState> find_steady_states(const ModelParams& p) {
    if (!p.finite_exponents()) throw RegimeError("find_steady_states needs finite exponents");
    // h > 0 below the smallest possible production / gamma, h < 0 above the largest.
    const double lo = 0.99 * p.beta * std::exp(-p.mu * p.tau_max()) * p.g.min_value() / p.gamma;
    const double hi = 1.01 * p.beta * p.g.max_value() / p.gamma;
    const auto grid = xi_scan_grid(p, lo, hi);
    auto h = [&](double x) { return h_residual(p, x); };

    std::vector<double> hv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) hv[i] = h(grid[i]);

    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (hv[i] == 0.0) {
            roots.push_back(grid[i]);
            continue;
        }
        if ((hv[i] < 0) == (hv[i + 1] < 0) || hv[i + 1] == 0.0) continue;
        double a = grid[i], b = grid[i + 1];
        double x = bisect(h, a, b, hv[i], hv[i + 1], 1e-12 * b);
        for (int it = 0; it < 3; ++it) {
            double d = h_slope(p, x);
            if (d == 0.0) break;
            double xn = x - h(x) / d;
            if (!(xn > a && xn < b)) break;
            if (std::abs(h(xn)) >= std::abs(h(x))) break;
            x = xn;
        }
        roots.push_back(x);
    }
    if (hv.back() == 0.0) roots.push_back(grid.back());

    const double merge = 1e-9 * std::min(p.g.theta, p.v.theta);
    std::vector<SteadyState> out;
    for (double r : roots) {
        if (!out.empty() && r - out.back().xi < merge) continue;
        out.push_back(steady_state_for(p, r));
    }
    return out;
}

std::vector<SteadyState> steady_branch(const ModelParams& p, double xi_lo, double xi_hi, int count) {
    if (!(xi_lo > 0 && xi_hi > xi_lo) || count < 2) throw ConfigError("steady_branch needs 0 < xi_lo < xi_hi and count >= 2");
    std::vector<SteadyState> out;
    for (double xi : log_grid(xi_lo, xi_hi, std::size_t(count))) out.push_back(steady_state_at(p, xi));
    return out;
}

int LimitingDiagram::count_at(double gamma) const {
    int n = 0;
    for (const auto& s : stable)
        if (gamma > s.gamma_lo && gamma < s.gamma_hi) ++n;
    for (const auto& s : singular)
        if (gamma > s.gamma_lo && gamma < s.gamma_hi) ++n;
    return n;
}

LimitingDiagram limiting_diagram(const ModelParams& p, double gamma_lo, double gamma_hi) {
    auto usable = [](const Nonlinearity& nl) { return nl.is_constant() || nl.is_step(); };
    if (p.finite_exponents() && !(p.g.is_constant() && p.v.is_constant()))
        throw RegimeError("limiting diagram needs an infinite exponent");
    if (!usable(p.g) || !usable(p.v))
        throw RegimeError("limiting diagram needs each nonlinearity constant or a step");

    std::vector<double> thresholds;
    if (!p.g.is_constant()) thresholds.push_back(p.g.theta);
    if (!p.v.is_constant()) thresholds.push_back(p.v.theta);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    auto side = [](const Nonlinearity& nl, double x, bool left) {
        if (nl.is_constant()) return nl.lo;
        if (x == nl.theta) return left ? nl.lo : nl.hi;
        return x < nl.theta ? nl.lo : nl.hi;
    };
    auto level = [&](double x, bool left) {
        return p.beta * std::exp(-p.mu * p.a / side(p.v, x, left)) * side(p.g, x, left);
    };

    LimitingDiagram d;
    d.corners = corner_gammas(p);

    std::vector<double> edges{0.0};
    edges.insert(edges.end(), thresholds.begin(), thresholds.end());
    edges.push_back(kInfinity);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double xa = edges[i], xb = edges[i + 1];
        double c = i + 1 < edges.size() - 1 ? level(xb, true) : level(xa, false);
        double glo = std::isinf(xb) ? 0.0 : c / xb;
        double ghi = xa == 0.0 ? kInfinity : c / xa;
        glo = std::max(glo, gamma_lo);
        ghi = std::min(ghi, gamma_hi);
        if (glo < ghi) d.stable.push_back({glo, ghi, c, xa, xb});
    }

    for (double t : thresholds) {
        double cl = level(t, true), cr = level(t, false);
        double lo = std::min(cl, cr), hi = std::max(cl, cr);
        if (p.g.theta == p.v.theta && !p.g.is_constant() && !p.v.is_constant()) {
            // Equal thresholds: both switches fire together, and the
            // symmetric limit passes through the midpoint level.
            double mid = *d.corners.gamma_gv * t;
            lo = std::min(lo, mid);
            hi = std::max(hi, mid);
        }
        double glo = std::max(lo / t, gamma_lo), ghi = std::min(hi / t, gamma_hi);
        if (glo < ghi) d.singular.push_back({glo, ghi, t});
    }
    return d;
}

}  // namespace tddebif
