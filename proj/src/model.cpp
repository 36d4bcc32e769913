#include "tddebif/model.hpp"

#include <cmath>
#include <string>

#include "tddebif/errors.hpp"
#include "tddebif/numeric.hpp"

namespace tddebif {

namespace {

void require_positive(double value, const std::string& name) {
    if (!(value > 0) || !std::isfinite(value)) throw ConfigError(name + " must be a positive finite number");
}

void validate_nl(const Nonlinearity& nl, const std::string& name) {
    require_positive(nl.lo, name + ".lo");
    require_positive(nl.hi, name + ".hi");
    require_positive(nl.theta, name + ".theta");
    if (!(nl.exponent > 0)) throw ConfigError(name + ".exp must be positive or \"inf\"");
}

// Hill value in the branch form that never raises a ratio > 1 to a power.
double hill(double lo, double hi, double y, double p) {
    if (y <= 1.0) {
        double u = std::pow(y, p);
        return (lo + hi * u) / (1.0 + u);
    }
    double w = std::pow(1.0 / y, p);
    return (lo * w + hi) / (w + 1.0);
}

// y * d/dy of hill(lo, hi, y, p), divided by hill itself.
double hill_log_slope(double lo, double hi, double y, double p) {
    double s = y <= 1.0 ? std::pow(y, p) : std::pow(1.0 / y, p);
    if (y <= 1.0) return p * (hi - lo) * s / ((1.0 + s) * (lo + hi * s));
    return p * (hi - lo) * s / ((s + 1.0) * (lo * s + hi));
}

// Value of nl on the side of `at` that faces `from`; used for limiting corners.
double plateau_toward(const Nonlinearity& nl, double at, double from) {
    if (nl.is_constant()) return nl.lo;
    return from < at ? nl.lo : nl.hi;
}

}  // namespace

void ModelParams::validate() const {
    require_positive(beta, "beta");
    if (!(mu >= 0) || !std::isfinite(mu)) throw ConfigError("mu must be a nonnegative finite number");
    require_positive(gamma, "gamma");
    require_positive(a, "a");
    validate_nl(g, "g");
    validate_nl(v, "v");
}

double eval_nl(const Nonlinearity& nl, double x) {
    if (nl.is_constant()) return nl.lo;
    if (nl.is_step()) {
        if (x == nl.theta) throw DomainError("step nonlinearity is set-valued at its threshold");
        return x < nl.theta ? nl.lo : nl.hi;
    }
    return hill(nl.lo, nl.hi, x / nl.theta, nl.exponent);
}

double eval_dnl(const Nonlinearity& nl, double x) {
    if (nl.is_step()) throw DomainError("step nonlinearity has no derivative");
    if (nl.is_constant()) return 0.0;
    double y = x / nl.theta, p = nl.exponent;
    double s = y <= 1.0 ? std::pow(y, p) : std::pow(1.0 / y, p);
    return p * (nl.hi - nl.lo) * s / (x * (1.0 + s) * (1.0 + s));
}

double nl_log_slope(const Nonlinearity& nl, double x) {
    if (nl.is_constant()) return 0.0;
    if (nl.is_step()) {
        if (x == nl.theta) throw DomainError("step nonlinearity is set-valued at its threshold");
        return 0.0;
    }
    return hill_log_slope(nl.lo, nl.hi, x / nl.theta, nl.exponent);
}

double log_slope(double x, double p, double r) { return hill_log_slope(r, 1.0, x, p); }

double steady_delay(const ModelParams& p, double xi) { return p.a / eval_nl(p.v, xi); }

double h_residual(const ModelParams& p, double xi) {
    return p.beta * std::exp(-p.mu * steady_delay(p, xi)) * eval_nl(p.g, xi) - p.gamma * xi;
}

double gamma_of_xi(const ModelParams& p, double xi) {
    return p.beta * eval_nl(p.g, xi) * std::exp(-p.mu * steady_delay(p, xi)) / xi;
}

double fold_discriminant(const ModelParams& p, double xi) {
    return nl_log_slope(p.g, xi) + p.mu * steady_delay(p, xi) * nl_log_slope(p.v, xi) - 1.0;
}

CornerGammas corner_gammas(const ModelParams& p) {
    CornerGammas c;
    const double tg = p.g.theta, tv = p.v.theta;
    const double tau_lo = p.a / p.v.lo, tau_hi = p.a / p.v.hi;

    double tau_at_g = p.a / plateau_toward(p.v, tv, tg);
    c.gamma1 = p.beta * std::exp(-p.mu * tau_at_g) * p.g.hi / tg;
    c.gamma2 = p.beta * std::exp(-p.mu * tau_at_g) * p.g.lo / tg;

    double g_at_v = plateau_toward(p.g, tg, tv);
    c.gamma3 = p.beta * g_at_v * std::exp(-p.mu * tau_hi) / tv;
    c.gamma4 = p.beta * g_at_v * std::exp(-p.mu * tau_lo) / tv;

    if (tg == tv) {
        c.gamma13 = p.beta * std::exp(-p.mu * tau_hi) * p.g.hi / tg;
        c.gamma24 = p.beta * std::exp(-p.mu * tau_lo) * p.g.lo / tg;
        double tau_mid = 2.0 * p.a / (p.v.lo + p.v.hi);
        double g_mid = 0.5 * (p.g.lo + p.g.hi);
        c.gamma_gv = p.beta * std::exp(-p.mu * tau_mid) * g_mid / tg;
    }

    const double v0 = p.v.min_value(), vU = p.v.max_value();
    c.dU = p.beta * p.g.max_value() * vU / v0;
    c.dL = p.beta * (v0 / vU) * std::exp(-p.mu * p.a / v0) * p.g.min_value();
    return c;
}

SufficientConditions sufficient_conditions(const ModelParams& p, int k) {
    SufficientConditions s;
    if (!p.g.is_constant() && !p.v.is_constant())
        throw RegimeError("sufficient conditions need one constant nonlinearity");
    if (p.g.is_constant() && p.v.is_constant()) return s;
    const double pi = M_PI;

    if (p.v.is_constant()) {
        const double tau = p.a / p.v.lo;
        const double r = p.g.ratio();
        const double scale = p.beta * tau * std::exp(-p.mu * tau) * p.g.min_value();
        if (p.g.decreasing()) {
            double q = pi * p.g.theta * (2 * k + 1) / scale;
            s.n_gdown = 2.0 * (r + 1.0) / (r - 1.0) * std::sqrt(1.0 + q * q);
        } else {
            double q = 2.0 * pi * p.g.theta * (k + 1) / scale;
            s.n_gup = 2.0 * (1.0 + r) / (1.0 - r) * std::sqrt(1.0 + q * q);
            const double n = p.g.exponent;
            if (n > 1.0 && std::isfinite(n)) {
                s.gamma_fold_g = p.beta * std::exp(-p.mu * tau) * (p.g.hi - p.g.lo) *
                                 std::pow(n + 1.0, 1.0 + 1.0 / n) * std::pow(n - 1.0, 1.0 - 1.0 / n) /
                                 (4.0 * n * p.g.theta);
            }
        }
        return s;
    }

    const double tau_mid = 2.0 * p.a / (p.v.lo + p.v.hi);
    const double gam_mid = p.beta * p.g.lo * std::exp(-p.mu * tau_mid) / p.v.theta;
    const double r = p.v.ratio();
    const double w = pi / tau_mid;
    if (p.v.decreasing()) {
        if (gam_mid < p.mu) {
            double band = ((2 * k + 2) * (2 * k + 2) * w * w + gam_mid * gam_mid) /
                          (2.0 * gam_mid * (p.mu - gam_mid));
            s.m_vdown = 2.0 * (r + 1.0) / (r - 1.0) * band;
        }
        return s;
    }
    if (gam_mid > p.mu) {
        double band = ((2 * k + 1) * (2 * k + 1) * w * w + gam_mid * gam_mid) /
                      (2.0 * gam_mid * (gam_mid - p.mu));
        s.m_vup = 2.0 * (1.0 + r) / (1.0 - r) * band;
    }
    if (!p.v.is_step() && p.mu > 0) {
        // -beta mu tau'(xi) e^{-mu tau} g with tau' = -tau v'/v.
        auto bound = [&](double xi) {
            double tau = steady_delay(p, xi);
            return p.beta * p.mu * tau * nl_log_slope(p.v, xi) / xi * std::exp(-p.mu * tau) * p.g.lo;
        };
        auto grid = log_grid(p.v.theta * 1e-3, p.v.theta * 1e3, 2048);
        std::size_t best = 0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (bound(grid[i]) > bound(grid[best])) best = i;
        double a = grid[best == 0 ? 0 : best - 1];
        double b = grid[best + 1 < grid.size() ? best + 1 : best];
        double x = golden_max(bound, a, b, 1e-13 * b);
        s.gamma_fold_v = std::max(bound(x), bound(grid[best]));
    }
    return s;
}

}  // namespace tddebif
