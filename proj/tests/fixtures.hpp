#pragma once

#include <random>

#include "tddebif/model.hpp"

namespace fixtures {

using tddebif::ModelParams;
using tddebif::Nonlinearity;

inline Nonlinearity constant(double c) { return {c, c, 1.0, 1.0}; }

inline ModelParams make(double beta, double mu, double gamma, double a, Nonlinearity g, Nonlinearity v) {
    ModelParams p;
    p.beta = beta;
    p.mu = mu;
    p.gamma = gamma;
    p.a = a;
    p.g = g;
    p.v = v;
    return p;
}

// Repressing feedback, constant transport speed (delay 0.5).
inline ModelParams repressor_const_delay(double n = 50, double gamma = 1.0) {
    return make(1.4, 0.2, gamma, 1.0, {1.0, 0.5, 1.0, n}, constant(2.0));
}

// Activating feedback, constant transport speed (delay 1).
inline ModelParams activator_const_delay(double n = 30, double gamma = 1.0) {
    return make(2.0, 0.02, gamma, 2.0, {0.1, 1.0, 1.0, n}, constant(2.0));
}

// Constant production, speed falls with concentration, fast dilution.
inline ModelParams slowing_fast_growth(double m = 250, double gamma = 0.4) {
    return make(3.0, 1.5, gamma, 2.0, constant(1.0), {2.0, 1.0, 1.0, m});
}

// Constant production, speed falls with concentration, slow dilution.
inline ModelParams slowing_slow_growth(double m = 100, double gamma = 0.13) {
    return make(3.0, 0.3, gamma, 3.0, constant(1.0), {0.5, 0.2, 1.0, m});
}

// Constant production, speed rises with concentration, growth above both corners.
inline ModelParams speeding_high_growth(double m = 10, double gamma = 0.5) {
    return make(1.4, 0.8, gamma, 1.0, constant(1.0), {0.5, 1.0, 1.0, m});
}

// Constant production, speed rises twentyfold across the threshold.
inline ModelParams speeding_wide_range(double m = 2, double gamma = 1.0) {
    return make(1.4, 0.2, gamma, 1.0, constant(1.0), {0.1, 2.0, 1.0, m});
}

// Constant production, speed rises fivefold, loss rate below both corners.
inline ModelParams speeding_low_loss(double m = 50, double gamma = 0.5) {
    return make(1.0, 0.1, gamma, 2.0, constant(1.0), {0.2, 1.0, 1.0, m});
}

// Both production and speed fall with concentration, shared threshold.
inline ModelParams both_falling(double m = 200, double n = 200, double gamma = 1.0) {
    return make(3.0, 0.5, gamma, 1.0, {1.0, 0.1, 1.0, n}, {1.0, 0.5, 1.0, m});
}

// Production falls, speed rises, shared threshold; the delay constant makes
// the fold discriminant -1 at the threshold (up to 2e-7 per unit exponent)
// when both exponents agree.
inline ModelParams opposing_balanced(double m = 200, double n = 200, double gamma = 0.4) {
    return make(10.0, 0.2, gamma, 18.4091, {1.0, 0.1, 1.0, n}, {1.0, 2.0, 1.0, m});
}

// Production falls, speed rises, shared threshold; up to five equilibria.
inline ModelParams opposing_five_states(double m = 100, double n = 500, double gamma = 0.548) {
    return make(1.4, 0.2, gamma, 1.0, {1.0, 0.5, 1.0, n}, {0.1, 1.0, 1.0, m});
}

// Random valid parameters; each nonlinearity is increasing, decreasing or
// constant as requested (+1, -1, 0).
struct Draw {
    std::mt19937_64 rng;
    explicit Draw(unsigned long long seed) : rng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    Nonlinearity hill(int direction, double exp_lo = 1.0, double exp_hi = 40.0) {
        double a = log_uniform(0.1, 3.0), b = log_uniform(0.1, 3.0);
        if (a == b) b *= 1.5;
        double lo = std::max(a, b), hi = std::min(a, b);
        if (direction > 0) std::swap(lo, hi);
        if (direction == 0) hi = lo;
        return {lo, hi, log_uniform(0.3, 3.0), uniform(exp_lo, exp_hi)};
    }

    ModelParams params(int g_dir, int v_dir, double exp_lo = 1.0, double exp_hi = 40.0) {
        ModelParams p;
        p.beta = log_uniform(0.5, 5.0);
        p.mu = uniform(0.0, 1.0);
        p.gamma = log_uniform(0.1, 3.0);
        p.a = log_uniform(0.3, 3.0);
        p.g = hill(g_dir, exp_lo, exp_hi);
        p.v = hill(v_dir, exp_lo, exp_hi);
        return p;
    }
};

}  // namespace fixtures
