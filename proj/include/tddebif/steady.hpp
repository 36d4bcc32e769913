#pragma once

#include <optional>
#include <vector>

#include "tddebif/model.hpp"

namespace tddebif {

struct SteadyState {
    double xi = 0;
    double gamma = 0;
    double tau = 0;
    double A = 0;  // gamma * xi v'/v
    double Q = 0;  // gamma * xi g'/g
    double M = 0;  // fold discriminant
    std::optional<int> unstable_count;  // empty until a spectrum has been computed
};

// Steady state at xi for the decay rate that makes xi an equilibrium.
SteadyState steady_state_at(const ModelParams& p, double xi);
// Same, but with the decay rate fixed to p.gamma (xi must be a root of h).
SteadyState steady_state_for(const ModelParams& p, double xi);

std::vector<SteadyState> find_steady_states(const ModelParams& p);
std::vector<SteadyState> steady_branch(const ModelParams& p, double xi_lo, double xi_hi, int count);

// Scan grid used for every xi-root search: log-spaced over [lo, hi] plus
// linear windows around both thresholds whose width follows the exponent.
std::vector<double> xi_scan_grid(const ModelParams& p, double lo, double hi, std::size_t count = 4096);

struct StableSegment {
    double gamma_lo, gamma_hi;  // open interval of decay rates
    double level;               // xi = level / gamma on this plateau
    double xi_lo, xi_hi;        // plateau extent in xi
};

struct SingularSegment {
    double gamma_lo, gamma_hi;
    double theta;
};

struct LimitingDiagram {
    std::vector<StableSegment> stable;
    std::vector<SingularSegment> singular;
    CornerGammas corners;

    // Number of steady states (stable plus singular) at a decay rate.
    int count_at(double gamma) const;
};

LimitingDiagram limiting_diagram(const ModelParams& p, double gamma_lo, double gamma_hi);

}  // namespace tddebif
