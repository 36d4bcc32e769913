#include <algorithm>
#include <cmath>
#include <limits>

#include "tddebif/bifurcation.hpp"
#include "tddebif/errors.hpp"

namespace tddebif {

namespace {

struct Solved {
    double xi, gamma, omega;
};

std::vector<Solved> solve_all(const ModelParams& q, CurveKind kind, int k) {
    std::vector<Solved> out;
    if (kind == CurveKind::Fold) {
        for (const auto& f : find_folds(q)) out.push_back({f.xi, f.gamma, 0.0});
        return out;
    }
    std::vector<HopfPoint> hs;
    if (q.g.is_constant() && q.v.is_constant()) return out;
    if (q.v.is_constant()) hs = hopf_const_delay(q, k);
    else if (q.g.is_constant()) hs = hopf_sd_gconst(q, k);
    else hs = hopf_general(q, k);
    for (const auto& h : hs)
        if (h.k == k) out.push_back({h.xi, h.gamma, h.omega});
    return out;
}

// Scale-free distance between a predicted and a solved point.
double distance(const Solved& a, const Solved& b) {
    double d = std::abs(std::log(a.xi / b.xi)) + std::abs(a.gamma - b.gamma) / std::max(a.gamma, b.gamma);
    if (a.omega > 0 && b.omega > 0) d += std::abs(a.omega - b.omega) / std::max(a.omega, b.omega);
    return d;
}

struct Branch {
    int id;
    bool active = true;
    std::vector<CurvePoint> pts;

    Solved predict(double s) const {
        const auto& b = pts.back();
        if (pts.size() < 2) return {b.xi, b.gamma, b.omega};
        const auto& a = pts[pts.size() - 2];
        double u = (s - b.param) / (b.param - a.param);
        Solved r{b.xi * std::pow(b.xi / a.xi, u), b.gamma + u * (b.gamma - a.gamma), b.omega + u * (b.omega - a.omega)};
        if (!(r.xi > 0) || !(r.gamma > 0) || (b.omega > 0 && !(r.omega > 0))) return {b.xi, b.gamma, b.omega};
        return r;
    }
};

// Mutual nearest-neighbour pairing; match[i] is the index in `solved` or -1.
std::vector<int> pair_up(const std::vector<Solved>& predicted, const std::vector<Solved>& solved, double& worst) {
    std::vector<int> match(predicted.size(), -1);
    worst = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < solved.size(); ++j) {
            double d = distance(predicted[i], solved[j]);
            if (d < bd) {
                bd = d;
                best = int(j);
            }
        }
        if (best < 0) continue;
        bool mutual = true;
        for (std::size_t i2 = 0; i2 < predicted.size(); ++i2)
            if (i2 != i && distance(predicted[i2], solved[best]) < bd) mutual = false;
        if (!mutual) continue;
        match[i] = best;
        worst = std::max(worst, bd);
    }
    return match;
}

}  // namespace

const char* to_string(CurveKind k) { return k == CurveKind::Fold ? "FOLD" : "HOPF"; }

const char* to_string(SweepParam s) {
    switch (s) {
        case SweepParam::M: return "m";
        case SweepParam::N: return "n";
        case SweepParam::MN: return "m=n";
    }
    return "?";
}

const char* to_string(EventKind e) {
    switch (e) {
        case EventKind::Cusp: return "CUSP";
        case EventKind::BogdanovTakens: return "BT";
        case EventKind::FoldHopf: return "FOLD_HOPF";
        case EventKind::Bautin: return "BAUTIN";
        case EventKind::BranchEnd: return "END";
    }
    return "?";
}

ModelParams with_sweep(ModelParams p, SweepParam s, double value) {
    if (s == SweepParam::M || s == SweepParam::MN) p.v.exponent = value;
    if (s == SweepParam::N || s == SweepParam::MN) p.g.exponent = value;
    return p;
}

double sweep_value(const ModelParams& p, SweepParam s) { return s == SweepParam::N ? p.g.exponent : p.v.exponent; }

BifCurve trace_curve(const ModelParams& p, CurveKind kind, SweepParam sweep, double lo, double hi,
                     const TraceOptions& opt) {
    if (!(hi > lo) || !(lo > 0)) throw ConfigError("sweep range must satisfy 0 < lo < hi");
    if (opt.steps < 1) throw ConfigError("steps must be positive");
    if (sweep != SweepParam::N && p.v.is_constant()) throw RegimeError("sweeping m needs a non-constant v");
    if (sweep != SweepParam::M && p.g.is_constant()) throw RegimeError("sweeping n needs a non-constant g");

    BifCurve curve;
    curve.kind = kind;
    curve.sweep = sweep;
    curve.range_lo = lo;
    curve.range_hi = hi;
    curve.k = opt.k;
    curve.base = p;

    const double ds_max = (hi - lo) / opt.steps, ds_min = opt.min_step * (hi - lo);
    const double bound = 0.1;  // largest accepted distance() between consecutive points
    std::vector<Branch> branches;
    auto start = [&](double s, const Solved& x) {
        Branch b;
        b.id = int(branches.size());
        b.pts.push_back({s, x.gamma, x.xi, x.omega, b.id, std::nullopt});
        branches.push_back(std::move(b));
    };
    auto end = [&](Branch& b, double s_next) {
        b.active = false;
        const auto& last = b.pts.back();
        curve.events.push_back({EventKind::BranchEnd, 0.5 * (last.param + s_next), last.gamma, last.xi, b.id});
    };

    for (const auto& x : solve_all(with_sweep(p, sweep, lo), kind, opt.k)) start(lo, x);
    double s = lo, ds = ds_max;
    double good_gamma = NAN, good_xi = NAN;
    while (s < hi) {
        double s1 = std::min(s + ds, hi);
        if (hi - s1 < 1e-12 * (hi - lo)) s1 = hi;
        std::vector<Solved> solved;
        try {
            solved = solve_all(with_sweep(p, sweep, s1), kind, opt.k);
        } catch (const NumericalError& e) {
            if (ds > ds_min) {
                ds *= 0.5;
                continue;
            }
            throw CurveLostError(std::string("point solver failed: ") + e.what(), s, good_gamma, good_xi);
        }
        std::vector<std::size_t> active;
        std::vector<Solved> predicted;
        for (std::size_t i = 0; i < branches.size(); ++i)
            if (branches[i].active) {
                active.push_back(i);
                predicted.push_back(branches[i].predict(s1));
            }
        double worst;
        auto match = pair_up(predicted, solved, worst);
        bool clean = solved.size() == predicted.size() && worst <= bound &&
                     std::none_of(match.begin(), match.end(), [](int m) { return m < 0; });
        if (!clean && ds > ds_min) {
            ds *= 0.5;
            continue;
        }
        std::vector<bool> used(solved.size(), false);
        for (std::size_t i = 0; i < active.size(); ++i) {
            Branch& b = branches[active[i]];
            if (match[i] < 0) {
                end(b, s1);
                continue;
            }
            const Solved& x = solved[match[i]];
            used[match[i]] = true;
            b.pts.push_back({s1, x.gamma, x.xi, x.omega, b.id, std::nullopt});
            good_gamma = x.gamma;
            good_xi = x.xi;
        }
        for (std::size_t j = 0; j < solved.size(); ++j)
            if (!used[j]) {
                start(s1, solved[j]);
                // A branch born inside the range starts at a turning point.
                if (s > lo) curve.events.push_back({EventKind::BranchEnd, 0.5 * (s + s1), solved[j].gamma, solved[j].xi,
                                                    branches.back().id});
            }
        s = s1;
        ds = std::min(2 * ds, ds_max);
    }
    for (auto& b : branches)
        for (auto& pt : b.pts) curve.points.push_back(pt);
    return curve;
}

}  // namespace tddebif
