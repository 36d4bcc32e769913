#pragma once

#include <cstddef>
#include <vector>

#include "tddebif/model.hpp"

namespace tddebif {

// Initial function on t <= 0: a constant, or a table (ascending times ending
// at 0) interpolated linearly.
struct History {
    enum class Kind { Constant, Tabulated };
    Kind kind = Kind::Constant;
    double value = 0;
    std::vector<double> t, x;

    static History constant(double value);
    static History table(std::vector<double> t, std::vector<double> x);
    double at(double s) const;
    double span() const;  // how far back the history reaches
};

// Constant history at 1e-2 dL / gamma, the default initial function.
History default_history(const ModelParams& p);

// Delay at t = 0 from the threshold integral over the history.
double init_delay(const ModelParams& p, const History& h);

struct StepControl {
    double h = 0;                  // base step; 0 means min(tau0, 1) / 200
    bool refine_interfaces = true; // halve the step where x is within 5 theta / p of a threshold
    double retain = kInfinity;     // keep only nodes this far behind the front (at least the longest delay)
};

// Dense solution: nodes with slopes for cubic Hermite interpolation, plus the history.
struct Trajectory {
    std::vector<double> t, x, dx, tau, dtau;
    History history;

    std::size_t size() const { return t.size(); }
    double t_end() const { return t.empty() ? 0.0 : t.back(); }
    double x_at(double s) const;
    double tau_at(double s) const;
    // Dense output is valid for s >= t.front(); t.front() > 0 once old nodes were dropped.
    // Index i with t[i] <= s < t[i+1], clamped to the valid segments.
    std::size_t segment(double s) const;
};

Trajectory integrate(const ModelParams& p, const History& h, double t_end, const StepControl& ctl = {});

// |int_{t - tau(t)}^{t} v(x(s)) ds - a|, by quadrature on the dense output.
double threshold_residual(const ModelParams& p, const Trajectory& tr, double t);

struct OrbitMetrics {
    double period = 0;
    double max_x = 0, min_x = 0;
    double l2 = 0;                    // root mean square over the last period
    double periodicity_residual = 0;  // sup |x(s) - x(s - T)| over the last period
    bool blowup = false;              // a crossing gap exceeded the cap
    int crossings = 0;
};

// Metrics from upward crossings of x = section after t_cut. Throws
// NoOscillationError with fewer than three crossings.
OrbitMetrics orbit_metrics(const Trajectory& tr, double section, double t_cut = 0, double cap = 1e3);

// Largest |x - centre| over [t_from, t_end].
double deviation(const Trajectory& tr, double centre, double t_from);

}  // namespace tddebif
