#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tddebif/model.hpp"
#include "tddebif/spectrum.hpp"

namespace tddebif {

enum class Regime { ConstDelay, SdGConst, General };
enum class Criticality { Super, Sub, Unknown };

const char* to_string(Regime r);
const char* to_string(Criticality c);

struct FoldPoint {
    double xi = 0;
    double gamma = 0;
    double tau = 0;
};

struct HopfPoint {
    double xi = 0;
    double gamma = 0;
    double omega = 0;
    double tau = 0;
    int k = 0;  // omega tau lies in the k-th window of its regime
    Regime regime = Regime::General;
    Criticality criticality = Criticality::Unknown;
};

// Scan range in xi used by all point solvers: four decades around the thresholds.
struct XiRange {
    double lo, hi;
};
XiRange xi_search_range(const ModelParams& p);

std::vector<FoldPoint> find_folds(const ModelParams& p);

std::vector<HopfPoint> hopf_const_delay(const ModelParams& p, int k);
std::vector<HopfPoint> hopf_sd_gconst(const ModelParams& p, int k);
std::vector<HopfPoint> hopf_general(const ModelParams& p, int k_max = 4);

// All Hopf points up to k_max with the most specific solver for the regime.
std::vector<HopfPoint> hopf_points(const ModelParams& p, int k_max = 4);

// Characteristic context at a Hopf or fold point (gamma taken from the point).
CharContext context_at(const ModelParams& p, double xi);

// Residual of the Hopf condition at (xi, omega) with gamma = gamma(xi).
cplx hopf_residual(const ModelParams& p, double xi, double omega);

// Newton refinement of a Hopf point after a parameter change. Returns nothing
// if the corrector does not converge.
std::optional<HopfPoint> refine_hopf(const ModelParams& p, double xi, double omega, int max_iter = 40);
std::optional<FoldPoint> refine_fold(const ModelParams& p, double xi, int max_iter = 40);

// ---------------------------------------------------------------- criticality

struct ProbeOptions {
    double offset = 1e-2;       // relative gamma offset on the unstable side
    double perturbation = 1e-3; // relative kick away from the steady state
    double max_time = 2e4;      // cap on simulated time per probe
    double min_offset = 1e-5;   // smallest relative offset tried
};

// Classifies by simulation on the unstable side at offsets d and 4d: the
// late-time distance from the steady state grows like sqrt(offset) for a
// supercritical bifurcation (ratio 2) and jumps to a distant attractor for a
// subcritical one (ratio near 1). The truncated normal form puts the
// degenerate case exactly at ratio sqrt(2). A ratio above 2 sqrt(2) means only
// the smaller offset stayed local, so the offset is reduced and the probe repeated.
Criticality criticality(const ModelParams& p, const HopfPoint& h, const ProbeOptions& opt = {});

struct ProbeResult {
    double gamma_small, gamma_large;
    double amplitude_small, amplitude_large;
    double ratio;
};
ProbeResult probe_amplitudes(const ModelParams& p, const HopfPoint& h, const ProbeOptions& opt = {});

// ---------------------------------------------------------------- curves

enum class CurveKind { Fold, Hopf };
enum class SweepParam { M, N, MN };
const char* to_string(CurveKind k);
const char* to_string(SweepParam s);

ModelParams with_sweep(ModelParams p, SweepParam s, double value);
double sweep_value(const ModelParams& p, SweepParam s);

struct CurvePoint {
    double param = 0;
    double gamma = 0;
    double xi = 0;
    double omega = 0;  // zero for folds
    int branch = 0;
    std::optional<int> unstable_count;  // critical root or pair excluded
};

enum class EventKind { Cusp, BogdanovTakens, FoldHopf, Bautin, BranchEnd };
const char* to_string(EventKind e);

struct CurveEvent {
    EventKind kind;
    double param;
    double gamma;
    double xi;
    int branch;
};

struct BifCurve {
    CurveKind kind = CurveKind::Fold;
    SweepParam sweep = SweepParam::M;
    double range_lo = 0, range_hi = 0;
    int k = 0;  // Hopf window index when kind == Hopf
    ModelParams base;
    std::vector<CurvePoint> points;  // sorted by (branch, param)
    std::vector<CurveEvent> events;
};

struct TraceOptions {
    int steps = 200;           // nominal number of sweep steps
    double min_step = 1e-4;    // relative to the range
    int k = 0;                 // Hopf window
};

BifCurve trace_curve(const ModelParams& p, CurveKind kind, SweepParam sweep, double lo, double hi,
                     const TraceOptions& opt = {});

struct ScanOptions {
    bool bautin = true;        // run simulation probes along Hopf branches
    int bautin_samples = 12;   // probe points per Hopf branch before bisection
    double bautin_tol = 2e-3;  // bisection width relative to the range
    // Criticality flips are resolved only as well as the probe offset allows,
    // so the scan probes closer to the curve than the standalone default.
    ProbeOptions probe{5e-4, 1e-3, 4e4, 1e-4};
};

// Adds spectral counts to every point and annotates codimension-two events.
void codim2_scan(BifCurve& curve, const ScanOptions& opt = {});

}  // namespace tddebif
