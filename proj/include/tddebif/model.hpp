#pragma once

#include <limits>
#include <optional>
#include <string>

namespace tddebif {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Monotone Hill function (lo + hi (x/theta)^p) / (1 + (x/theta)^p).
// exponent == kInfinity is the piecewise-constant limit with a set-valued
// point at theta.
struct Nonlinearity {
    double lo = 1.0;
    double hi = 1.0;
    double theta = 1.0;
    double exponent = 1.0;

    bool is_constant() const { return lo == hi; }
    bool is_step() const { return exponent == kInfinity; }
    bool increasing() const { return hi > lo; }
    bool decreasing() const { return hi < lo; }
    double min_value() const { return lo < hi ? lo : hi; }
    double max_value() const { return lo < hi ? hi : lo; }
    double ratio() const { return lo / hi; }
};

struct ModelParams {
    double beta = 1.0;
    double mu = 0.0;
    double gamma = 1.0;
    double a = 1.0;
    Nonlinearity g;
    Nonlinearity v;

    // Throws ConfigError naming the offending field.
    void validate() const;

    double tau_min() const { return a / v.max_value(); }
    double tau_max() const { return a / v.min_value(); }
    bool finite_exponents() const { return !g.is_step() && !v.is_step(); }
};

struct CornerGammas {
    double gamma1 = 0, gamma2 = 0;  // thresholds of g, delay frozen
    double gamma3 = 0, gamma4 = 0;  // thresholds of v, g frozen
    // Only defined when theta_g == theta_v.
    std::optional<double> gamma13, gamma24, gamma_gv;
    double dL = 0, dU = 0;  // absorbing flux bounds; Q = [dL/gamma, dU/gamma]
};

// Explicit thresholds on the exponents (or gamma bounds) that guarantee a
// bifurcation. Absent entries mean the formula does not apply to the regime.
struct SufficientConditions {
    std::optional<double> n_gdown;
    std::optional<double> n_gup;
    std::optional<double> m_vdown;
    std::optional<double> m_vup;
    std::optional<double> gamma_fold_g;   // upper gamma bound for folds, g increasing
    std::optional<double> gamma_fold_v;   // upper gamma bound for folds, v increasing
    bool empty() const {
        return !n_gdown && !n_gup && !m_vdown && !m_vup && !gamma_fold_g && !gamma_fold_v;
    }
};

double eval_nl(const Nonlinearity& nl, double x);
double eval_dnl(const Nonlinearity& nl, double x);
// x * nl'(x) / nl(x), computed without forming the derivative.
double nl_log_slope(const Nonlinearity& nl, double x);

double log_slope(double x, double p, double r);

double steady_delay(const ModelParams& p, double xi);
double h_residual(const ModelParams& p, double xi);
double gamma_of_xi(const ModelParams& p, double xi);
double fold_discriminant(const ModelParams& p, double xi);

CornerGammas corner_gammas(const ModelParams& p);
SufficientConditions sufficient_conditions(const ModelParams& p, int k);

}  // namespace tddebif
