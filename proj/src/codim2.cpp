#include <algorithm>
#include <cmath>
#include <map>

#include "tddebif/bifurcation.hpp"
#include "tddebif/errors.hpp"

namespace tddebif {

namespace {

// Derivative of the characteristic function at the origin; its zero on a fold
// branch is a double zero root.
double slope_at_origin(const CharContext& c) {
    const auto& s = c.ss;
    return 1 + (s.Q - s.A) * s.tau + c.mu * s.A * s.tau * s.tau / 2;
}

std::optional<int> count_at(const ModelParams& q, double xi) {
    try {
        return unstable_count(context_at(q, xi));
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

struct Scanner {
    BifCurve& curve;
    const ScanOptions& opt;
    double tol;

    ModelParams at(double s) const { return with_sweep(curve.base, curve.sweep, s); }

    // Point on the branch through a and b at sweep value s, seeded by interpolation.
    std::optional<CurvePoint> solve(const CurvePoint& a, const CurvePoint& b, double s) const {
        double u = (s - a.param) / (b.param - a.param);
        double xi = a.xi * std::pow(b.xi / a.xi, u);
        auto q = at(s);
        if (curve.kind == CurveKind::Fold) {
            auto f = refine_fold(q, xi);
            if (!f) return std::nullopt;
            return CurvePoint{s, f->gamma, f->xi, 0.0, a.branch, std::nullopt};
        }
        auto h = refine_hopf(q, xi, a.omega + u * (b.omega - a.omega));
        if (!h) return std::nullopt;
        return CurvePoint{s, h->gamma, h->xi, h->omega, a.branch, std::nullopt};
    }

    // Bisection in the sweep parameter on a predicate that differs at a and b.
    template <class Pred>
    std::optional<CurvePoint> locate(CurvePoint a, CurvePoint b, const Pred& pred, double width = 0) const {
        if (width <= 0) width = tol;
        auto pa = pred(a);
        while (std::abs(b.param - a.param) > width) {
            double s = 0.5 * (a.param + b.param);
            auto m = solve(a, b, s);
            if (!m) return std::nullopt;
            auto pm = pred(*m);
            if (!pm) return std::nullopt;
            if (*pm == *pa) a = *m;
            else b = *m;
        }
        return solve(a, b, 0.5 * (a.param + b.param));
    }

    void add(EventKind kind, const CurvePoint& p) { curve.events.push_back({kind, p.param, p.gamma, p.xi, p.branch}); }

    void pair_branch_ends() {
        std::vector<CurveEvent> kept, ends;
        for (const auto& e : curve.events) (e.kind == EventKind::BranchEnd ? ends : kept).push_back(e);
        std::vector<bool> used(ends.size(), false);
        const double close = 4 * curve.range_hi * 1e-12 + 2 * tol;
        for (std::size_t i = 0; i < ends.size(); ++i) {
            if (used[i]) continue;
            for (std::size_t j = i + 1; j < ends.size(); ++j) {
                if (used[j] || std::abs(ends[i].param - ends[j].param) > close) continue;
                used[i] = used[j] = true;
                if (curve.kind == CurveKind::Fold) {
                    kept.push_back({EventKind::Cusp, 0.5 * (ends[i].param + ends[j].param),
                                    0.5 * (ends[i].gamma + ends[j].gamma), 0.5 * (ends[i].xi + ends[j].xi),
                                    ends[i].branch});
                } else {
                    kept.push_back(ends[i]);
                    kept.push_back(ends[j]);
                }
                break;
            }
            if (!used[i]) kept.push_back(ends[i]);
        }
        curve.events = std::move(kept);
    }

    void hopf_ends_at_origin() {
        // A Hopf branch whose frequency collapses ends on the fold curve.
        for (auto& e : curve.events) {
            if (e.kind != EventKind::BranchEnd) continue;
            const CurvePoint* p = nullptr;
            for (const auto& q : curve.points)
                if (q.branch == e.branch && std::abs(q.param - e.param) < 2 * tol + 1e-12) p = &q;
            if (p && p->omega * steady_delay(at(p->param), p->xi) < 0.1) e.kind = EventKind::BogdanovTakens;
        }
    }

    void run() {
        for (auto& p : curve.points) p.unstable_count = count_at(at(p.param), p.xi);
        pair_branch_ends();
        if (curve.kind == CurveKind::Hopf) hopf_ends_at_origin();

        std::map<int, std::vector<CurvePoint*>> branches;
        for (auto& p : curve.points) branches[p.branch].push_back(&p);
        for (auto& [id, pts] : branches) {
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                const CurvePoint &a = *pts[i], &b = *pts[i + 1];
                if (curve.kind == CurveKind::Fold) {
                    auto sign = [&](const CurvePoint& p) -> std::optional<int> {
                        return slope_at_origin(context_at(at(p.param), p.xi)) > 0 ? 1 : -1;
                    };
                    if (*sign(a) != *sign(b)) {
                        if (auto e = locate(a, b, sign)) add(EventKind::BogdanovTakens, *e);
                        continue;
                    }
                }
                if (!a.unstable_count || !b.unstable_count || *a.unstable_count == *b.unstable_count) continue;
                int jump = std::abs(*a.unstable_count - *b.unstable_count);
                // On a fold branch a pair crosses; on a Hopf branch a real root does.
                bool fold_hopf = curve.kind == CurveKind::Fold ? jump % 2 == 0 : jump % 2 == 1;
                if (!fold_hopf) continue;
                auto count = [&](const CurvePoint& p) { return count_at(at(p.param), p.xi); };
                if (auto e = locate(a, b, count)) add(EventKind::FoldHopf, *e);
            }
            if (curve.kind == CurveKind::Hopf && opt.bautin) bautin(pts);
        }
        // Near a double zero root the count flickers between its neighbours.
        std::vector<CurveEvent> bt;
        for (const auto& e : curve.events)
            if (e.kind == EventKind::BogdanovTakens) bt.push_back(e);
        std::erase_if(curve.events, [&](const CurveEvent& e) {
            return e.kind == EventKind::FoldHopf && std::any_of(bt.begin(), bt.end(), [&](const CurveEvent& b) {
                       return b.branch == e.branch && std::abs(b.param - e.param) < 100 * tol;
                   });
        });
        std::sort(curve.events.begin(), curve.events.end(), [](const CurveEvent& x, const CurveEvent& y) {
            return x.branch != y.branch ? x.branch < y.branch : x.param < y.param;
        });
    }

    std::optional<Criticality> classify(const CurvePoint& p) const {
        if (!p.unstable_count || *p.unstable_count != 0) return std::nullopt;
        auto q = at(p.param);
        HopfPoint h{p.xi, p.gamma, p.omega, steady_delay(q, p.xi), curve.k, Regime::General, Criticality::Unknown};
        try {
            return criticality(q, h, opt.probe);
        } catch (const InconclusiveError&) {
            return std::nullopt;
        }
    }

    void bautin(const std::vector<CurvePoint*>& pts) {
        int n = std::max(2, opt.bautin_samples);
        if (pts.size() < 2) return;
        std::vector<std::pair<CurvePoint, Criticality>> samples;
        // Interior samples only: next to a branch end the probe offsets reach the neighbouring Hopf point.
        for (int i = 1; i <= n; ++i) {
            const CurvePoint& p = *pts[std::size_t(std::lround(double(i) * double(pts.size() - 1) / (n + 1)))];
            if (!samples.empty() && samples.back().first.param == p.param) continue;
            if (auto c = classify(p)) samples.emplace_back(p, *c);
        }
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            if (samples[i].second == samples[i + 1].second) continue;
            auto pred = [&](const CurvePoint& p) -> std::optional<Criticality> {
                CurvePoint c = p;
                c.unstable_count = count_at(at(p.param), p.xi);
                return classify(c);
            };
            const double width = opt.bautin_tol * (curve.range_hi - curve.range_lo);
            if (auto e = locate(samples[i].first, samples[i + 1].first, pred, width)) add(EventKind::Bautin, *e);
        }
    }
};

}  // namespace

void codim2_scan(BifCurve& curve, const ScanOptions& opt) {
    Scanner s{curve, opt, 1e-4 * (curve.range_hi - curve.range_lo)};
    s.run();
}

}  // namespace tddebif
