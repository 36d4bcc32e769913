#include <algorithm>
#include <cmath>
#include <optional>

#include "tddebif/bifurcation.hpp"
#include "tddebif/errors.hpp"
#include "tddebif/numeric.hpp"
#include "tddebif/simulate.hpp"
#include "tddebif/steady.hpp"

namespace tddebif {

namespace {

// Equilibrium at decay rate gamma continued from xi by Newton on the
// steady-state residual. Empty if the branch does not reach gamma.
std::optional<SteadyState> state_from(ModelParams q, double gamma, double xi) {
    q.gamma = gamma;
    auto h = [&](double x) { return h_residual(q, x); };
    const double start = xi;
    for (int it = 0; it < 60; ++it) {
        double d = 1e-7 * xi;
        double slope = (h(xi + d) - h(xi - d)) / (2 * d);
        if (!(slope != 0) || !std::isfinite(slope)) return std::nullopt;
        double step = std::clamp(h(xi) / slope, -0.05 * xi, 0.05 * xi);
        xi -= step;
        if (!(xi > 0) || std::abs(xi - start) > 0.5 * start) return std::nullopt;
        if (std::abs(step) < 1e-14 * xi) break;
    }
    if (!(std::abs(h(xi)) < 1e-10 * gamma * xi)) return std::nullopt;
    return steady_state_for(q, xi);
}

// Critical root continued from i omega to the perturbed equilibrium.
cplx continued_root(const ModelParams& q, const SteadyState& s, double omega) {
    auto c = CharContext::from(q, s);
    cplx z(0, omega);
    for (int it = 0; it < 60; ++it) {
        cplx step = char_eval(c, z) / char_derivative(c, z);
        z -= step;
        if (std::abs(step) < 1e-14 * (1 + std::abs(z))) break;
    }
    return z;
}

struct Run {
    double amplitude = 0;
    bool settled = false;
};

// Late-time largest distance from the equilibrium, extending the run until two
// consecutive windows agree.
Run late_amplitude(const ModelParams& q, const SteadyState& s, double growth, double period, const ProbeOptions& opt) {
    double t_end = std::clamp(40.0 / growth, 60.0 * period, opt.max_time);
    Run r;
    for (;;) {
        double w = std::max(8 * period, 0.1 * t_end);
        StepControl ctl;
        ctl.retain = 2 * w;
        auto tr = integrate(q, History::constant(s.xi * (1 + opt.perturbation)), t_end, ctl);
        double last = 0, before = 0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            double d = std::abs(tr.x[i] - s.xi);
            if (tr.t[i] >= t_end - w) last = std::max(last, d);
            else if (tr.t[i] >= t_end - 2 * w) before = std::max(before, d);
        }
        r.amplitude = last;
        r.settled = std::abs(last - before) <= 0.02 * last;
        if (r.settled || t_end >= opt.max_time) return r;
        t_end = std::min(2 * t_end, opt.max_time);
    }
}

}  // namespace

ProbeResult probe_amplitudes(const ModelParams& p, const HopfPoint& h, const ProbeOptions& opt) {
    // Unstable side: the one where the continued critical pair has positive real part.
    double d0 = 0.5 * opt.min_offset * h.gamma;
    auto near = state_from(p, h.gamma + d0, h.xi);
    if (!near) throw InconclusiveError("equilibrium does not continue past the Hopf point");
    auto q = p;
    q.gamma = h.gamma + d0;
    double sign = continued_root(q, *near, h.omega).real() > 0 ? 1 : -1;

    // Both probe rates must keep the critical pair unstable on the same branch;
    // otherwise the offset is halved.
    for (double d = opt.offset * h.gamma; d >= opt.min_offset * h.gamma; d *= 0.5) {
        ProbeResult res;
        res.gamma_small = h.gamma + sign * d;
        res.gamma_large = h.gamma + sign * 4 * d;
        const double gammas[2] = {res.gamma_small, res.gamma_large};
        SteadyState states[2];
        double growth[2];
        bool ok = true;
        for (int i = 0; i < 2 && ok; ++i) {
            auto s = state_from(p, gammas[i], h.xi);
            if (!s) {
                ok = false;
                break;
            }
            auto qi = p;
            qi.gamma = gammas[i];
            cplx root = continued_root(qi, *s, h.omega);
            ok = root.real() > 0 && std::abs(root.imag() - h.omega) < 0.5 * h.omega;
            states[i] = *s;
            growth[i] = root.real();
        }
        if (!ok) continue;
        Run runs[2];
        parallel_for(2, default_workers(2), [&](std::size_t i) {
            auto qi = p;
            qi.gamma = gammas[i];
            runs[i] = late_amplitude(qi, states[i], growth[i], 2 * M_PI / h.omega, opt);
        });
        res.amplitude_small = runs[0].amplitude;
        res.amplitude_large = runs[1].amplitude;
        res.ratio = res.amplitude_large / res.amplitude_small;
        if (!runs[0].settled || !runs[1].settled) throw InconclusiveError("criticality probe did not settle");
        if (!(res.amplitude_small > 1e-12)) throw InconclusiveError("probe orbit collapsed onto the equilibrium");
        if (res.ratio > 2 * std::sqrt(2.0) && 0.5 * d >= opt.min_offset * h.gamma) continue;
        return res;
    }
    throw InconclusiveError("no offset keeps the critical pair unstable");
}

Criticality criticality(const ModelParams& p, const HopfPoint& h, const ProbeOptions& opt) {
    auto r = probe_amplitudes(p, h, opt);
    return r.ratio > std::sqrt(2.0) ? Criticality::Super : Criticality::Sub;
}

}  // namespace tddebif
