#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace tddebif {

// Bisection on a bracketed sign change; fa, fb are f(a), f(b).
double bisect(const std::function<double(double)>& f, double a, double b, double fa, double fb,
              double xtol, int max_iter = 200);

// Maximizer of a unimodal function on [a, b].
double golden_max(const std::function<double(double)>& f, double a, double b, double xtol,
                  int max_iter = 200);

// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50);

std::vector<double> log_grid(double lo, double hi, std::size_t count);
std::vector<double> lin_grid(double lo, double hi, std::size_t count);

// Sorted union of a log grid on [lo, hi] and dense linear windows
// [c (1 - w), c (1 + w)] around each centre, with each window clipped to [lo, hi].
struct Window {
    double centre;
    double half_width;  // relative to centre
};
std::vector<double> refined_grid(double lo, double hi, std::size_t count,
                                 const std::vector<Window>& windows, std::size_t window_count);

// Runs body(i) for i in [0, n) on up to `workers` threads. Results must be
// written to disjoint slots so the output does not depend on scheduling.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

// Worker count from the TDDEBIF_WORKERS environment variable, else fallback.
unsigned default_workers(unsigned fallback = 1);

}  // namespace tddebif
