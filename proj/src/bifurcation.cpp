#include "tddebif/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tddebif/errors.hpp"
#include "tddebif/numeric.hpp"
#include "tddebif/steady.hpp"

namespace tddebif {

namespace {

constexpr double kHopfTol = 1e-8;
constexpr std::size_t kXiGrid = 4096;

// A candidate frequency at one xi together with the scalar whose sign change
// marks a Hopf point. Phase is omega tau, used to judge tracking resolution.
struct Candidate {
    double omega;
    double phase;
    double value;
};
using Inner = std::function<std::vector<Candidate>(double xi)>;

std::vector<Candidate>::const_iterator nearest(const std::vector<Candidate>& cs, double omega) {
    return std::min_element(cs.begin(), cs.end(), [&](const Candidate& a, const Candidate& b) {
        return std::abs(a.omega - omega) < std::abs(b.omega - omega);
    });
}

// Candidates at both ends of a cell can be paired one to one with small phase moves.
bool resolved(const std::vector<Candidate>& a, const std::vector<Candidate>& b) {
    if (a.size() != b.size()) return false;
    for (const auto& c0 : a) {
        auto c1 = nearest(b, c0.omega);
        if (nearest(a, c1->omega)->omega != c0.omega) return false;
        if (std::abs(c1->phase - c0.phase) > 0.2) return false;
    }
    return true;
}

struct HopfScan {
    const Inner& inner;
    std::vector<std::pair<double, double>> found;

    void bracket(double a, double b, Candidate ca, Candidate cb) {
        double fa = ca.value, wa = ca.omega, wb = cb.omega;
        for (int it = 0; it < 200 && b - a > 4e-16 * b; ++it) {
            double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            auto cs = inner(m);
            if (cs.empty()) return;
            auto cm = nearest(cs, 0.5 * (wa + wb));
            if ((cm->value < 0) == (fa < 0)) {
                a = m;
                fa = cm->value;
                wa = cm->omega;
            } else {
                b = m;
                wb = cm->omega;
            }
        }
        found.emplace_back(0.5 * (a + b), 0.5 * (wa + wb));
    }

    // Follows each candidate across [a, b], splitting the cell until tracking is unambiguous.
    void cell(double a, double b, const std::vector<Candidate>& va, const std::vector<Candidate>& vb, int depth) {
        if (va.empty() && vb.empty()) return;
        if (!resolved(va, vb) && depth < 24) {
            double m = std::sqrt(a * b);
            auto vm = inner(m);
            cell(a, m, va, vm, depth + 1);
            cell(m, b, vm, vb, depth + 1);
            return;
        }
        for (const auto& c0 : va) {
            if (vb.empty()) break;
            auto c1 = nearest(vb, c0.omega);
            if (nearest(va, c1->omega)->omega != c0.omega) continue;
            if (c0.value == 0 || (c0.value < 0) == (c1->value < 0)) continue;
            bracket(a, b, c0, *c1);
        }
    }
};

// Sign scan of the inner scalar along the xi grid. Returns (xi, omega) brackets.
std::vector<std::pair<double, double>> scan_hopf(const ModelParams& p, const Inner& inner) {
    XiRange r = xi_search_range(p);
    auto grid = xi_scan_grid(p, r.lo, r.hi, kXiGrid);
    HopfScan scan{inner, {}};
    auto prev = inner(grid[0]);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        auto next = inner(grid[i + 1]);
        scan.cell(grid[i], grid[i + 1], prev, next, 0);
        prev = std::move(next);
    }
    return scan.found;
}

// All roots of f on (lo, hi) found from sign changes on `n` subintervals.
std::vector<double> roots_on(const std::function<double(double)>& f, double lo, double hi, int n) {
    std::vector<double> out;
    double x0 = lo, f0 = f(lo);
    for (int i = 1; i <= n; ++i) {
        double x1 = lo + (hi - lo) * i / n;
        double f1 = f(x1);
        if (f0 == 0 && i > 1) out.push_back(x0);
        if (f0 != 0 && f1 != 0 && (f0 < 0) != (f1 < 0)) out.push_back(bisect(f, x0, x1, f0, f1, 1e-15 * x1));
        x0 = x1;
        f0 = f1;
    }
    return out;
}

bool in_window(Regime regime, const ModelParams& p, double phase, int k) {
    double base = 2 * M_PI * k;
    switch (regime) {
        case Regime::ConstDelay:
            if (p.g.decreasing()) return phase > base + M_PI / 2 && phase < base + M_PI;
            return phase > base + 1.5 * M_PI && phase < base + 2 * M_PI;
        case Regime::SdGConst:
            if (p.v.decreasing()) return phase > base + M_PI && phase < base + 2 * M_PI;
            return phase > base && phase < base + M_PI;
        case Regime::General:
            return std::abs(std::cos(phase)) < 1;
    }
    return false;
}

// Polishes, verifies and packages a scanned point. Returns false if it fails
// the residual or window checks.
bool accept(const ModelParams& p, double xi, double omega, Regime regime, int k, HopfPoint& out) {
    auto refined = refine_hopf(p, xi, omega);
    if (refined && std::abs(hopf_residual(p, refined->xi, refined->omega)) <= std::abs(hopf_residual(p, xi, omega))) {
        xi = refined->xi;
        omega = refined->omega;
    }
    if (!(std::abs(hopf_residual(p, xi, omega)) < kHopfTol) || !(omega > 0)) return false;
    double tau = steady_delay(p, xi);
    double phase = omega * tau;
    if (regime == Regime::General) k = int(std::floor(phase / (2 * M_PI)));
    if (!in_window(regime, p, phase, k)) return false;
    out = {xi, gamma_of_xi(p, xi), omega, tau, k, regime, Criticality::Unknown};
    return true;
}

void sort_and_merge(std::vector<HopfPoint>& pts) {
    std::sort(pts.begin(), pts.end(), [](const HopfPoint& a, const HopfPoint& b) {
        return a.k != b.k ? a.k < b.k : a.xi < b.xi;
    });
    std::vector<HopfPoint> merged;
    for (const auto& h : pts) {
        if (!merged.empty() && merged.back().k == h.k && std::abs(merged.back().xi - h.xi) < 1e-9 * h.xi &&
            std::abs(merged.back().omega - h.omega) < 1e-7 * h.omega)
            continue;
        merged.push_back(h);
    }
    pts = std::move(merged);
}

}  // namespace

const char* to_string(Regime r) {
    switch (r) {
        case Regime::ConstDelay: return "CONST_DELAY";
        case Regime::SdGConst: return "SD_GCONST";
        case Regime::General: return "GENERAL";
    }
    return "?";
}

const char* to_string(Criticality c) {
    switch (c) {
        case Criticality::Super: return "SUPER";
        case Criticality::Sub: return "SUB";
        case Criticality::Unknown: return "UNKNOWN";
    }
    return "?";
}

XiRange xi_search_range(const ModelParams& p) {
    double lo = std::min(p.g.theta, p.v.theta), hi = std::max(p.g.theta, p.v.theta);
    return {lo * 1e-4, hi * 1e4};
}

CharContext context_at(const ModelParams& p, double xi) {
    return CharContext::from(p, steady_state_at(p, xi));
}

cplx hopf_residual(const ModelParams& p, double xi, double omega) {
    return char_eval(context_at(p, xi), cplx(0, omega));
}

std::vector<FoldPoint> find_folds(const ModelParams& p) {
    if (!p.finite_exponents()) throw RegimeError("find_folds needs finite exponents");
    std::vector<FoldPoint> out;
    if (p.g.is_constant() && p.v.is_constant()) return out;
    XiRange r = xi_search_range(p);
    auto grid = xi_scan_grid(p, r.lo, r.hi, kXiGrid);
    auto M = [&](double x) { return fold_discriminant(p, x); };
    double m0 = M(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double m1 = M(grid[i]);
        if (m0 != 0 && m1 != 0 && (m0 < 0) != (m1 < 0)) {
            double xi = bisect(M, grid[i - 1], grid[i], m0, m1, 1e-12 * grid[i]);
            if (auto f = refine_fold(p, xi); f && std::abs(f->xi - xi) < 1e-9 * xi) xi = f->xi;
            out.push_back({xi, gamma_of_xi(p, xi), steady_delay(p, xi)});
        }
        m0 = m1;
    }
    return out;
}

std::optional<FoldPoint> refine_fold(const ModelParams& p, double xi, int max_iter) {
    auto M = [&](double x) { return fold_discriminant(p, x); };
    for (int it = 0; it < max_iter; ++it) {
        double m = M(xi);
        double h = 1e-7 * xi;
        double dm = (M(xi + h) - M(xi - h)) / (2 * h);
        if (!(dm != 0) || !std::isfinite(dm)) return std::nullopt;
        double step = m / dm;
        step = std::clamp(step, -0.1 * xi, 0.1 * xi);
        xi -= step;
        if (!(xi > 0)) return std::nullopt;
        if (std::abs(step) < 1e-14 * xi) break;
    }
    if (!(std::abs(M(xi)) < 1e-9)) return std::nullopt;
    return FoldPoint{xi, gamma_of_xi(p, xi), steady_delay(p, xi)};
}

std::optional<HopfPoint> refine_hopf(const ModelParams& p, double xi, double omega, int max_iter) {
    if (!(xi > 0) || !(omega > 0)) return std::nullopt;
    cplx f = hopf_residual(p, xi, omega);
    for (int it = 0; it < max_iter; ++it) {
        // d/d omega is i * Delta'(i omega); d/d xi by central differences.
        auto c = context_at(p, xi);
        cplx fw = cplx(0, 1) * char_derivative(c, cplx(0, omega));
        double h = 1e-7 * xi;
        cplx fx = (hopf_residual(p, xi + h, omega) - hopf_residual(p, xi - h, omega)) / (2 * h);
        // Solve [Re fx Re fw; Im fx Im fw] [dx; dw] = -[Re f; Im f].
        double det = fx.real() * fw.imag() - fw.real() * fx.imag();
        if (!(std::abs(det) > 0) || !std::isfinite(det)) return std::nullopt;
        double dx = -(f.real() * fw.imag() - fw.real() * f.imag()) / det;
        double dw = -(fx.real() * f.imag() - f.real() * fx.imag()) / det;
        // Damped step: halve until the residual decreases.
        double t = 1;
        double limit = std::min(1.0, std::min(0.1 * xi / std::max(std::abs(dx), 1e-300),
                                              0.5 * omega / std::max(std::abs(dw), 1e-300)));
        t = limit;
        cplx fn;
        double xn = xi, wn = omega;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
            xn = xi + t * dx;
            wn = omega + t * dw;
            if (!(xn > 0) || !(wn > 0)) continue;
            fn = hopf_residual(p, xn, wn);
            if (std::abs(fn) < std::abs(f) || std::abs(fn) < 1e-13) {
                improved = true;
                break;
            }
        }
        if (!improved) break;
        bool small = std::abs(xn - xi) < 1e-15 * xi && std::abs(wn - omega) < 1e-15 * omega;
        xi = xn;
        omega = wn;
        f = fn;
        if (small || std::abs(f) < 1e-14) break;
    }
    if (!(std::abs(f) < kHopfTol)) return std::nullopt;
    double tau = steady_delay(p, xi);
    return HopfPoint{xi, gamma_of_xi(p, xi), omega, tau, int(std::floor(omega * tau / (2 * M_PI))), Regime::General,
                     Criticality::Unknown};
}

std::vector<HopfPoint> hopf_const_delay(const ModelParams& p, int k) {
    if (!p.v.is_constant()) throw RegimeError("hopf_const_delay needs a constant v");
    if (p.g.is_constant() || p.g.is_step()) throw RegimeError("hopf_const_delay needs a Hill g with finite exponent");
    const double tau = p.tau_min();
    const bool down = p.g.decreasing();
    // omega tau solves phase cos(phase) + gamma tau sin(phase) = 0 in the k-th window.
    auto omega_k = [&](double gamma) {
        double base = 2 * M_PI * k + (down ? 0.5 * M_PI : 1.5 * M_PI);
        auto F = [&](double ph) { return ph * std::cos(ph) + gamma * tau * std::sin(ph); };
        double lo = base, hi = base + 0.5 * M_PI;
        return bisect(F, lo, hi, F(lo), F(hi), 1e-15 * hi) / tau;
    };
    Inner inner = [&](double xi) -> std::vector<Candidate> {
        double gamma = gamma_of_xi(p, xi);
        double w = omega_k(gamma);
        double rhs = std::sqrt(1 + (w / gamma) * (w / gamma));
        double f = nl_log_slope(p.g, xi);
        return {{w, w * tau, down ? f + rhs : f - rhs}};
    };
    std::vector<HopfPoint> out;
    for (auto [xi, w] : scan_hopf(p, inner)) {
        HopfPoint h;
        if (accept(p, xi, w, Regime::ConstDelay, k, h)) out.push_back(h);
    }
    sort_and_merge(out);
    return out;
}

std::vector<HopfPoint> hopf_sd_gconst(const ModelParams& p, int k) {
    if (!p.g.is_constant()) throw RegimeError("hopf_sd_gconst needs a constant g");
    if (p.v.is_constant() || p.v.is_step()) throw RegimeError("hopf_sd_gconst needs a Hill v with finite exponent");
    const bool down = p.v.decreasing();
    const double mu = p.mu;
    Inner inner = [&](double xi) -> std::vector<Candidate> {
        double gamma = gamma_of_xi(p, xi);
        if (down ? !(gamma < mu) : !(gamma > mu)) return {};
        double tau = steady_delay(p, xi);
        int j = down ? k + 1 : k;
        // Half-angle phase condition in the k-th window.
        auto G = [&](double ph) {
            double w = ph / tau;
            return 0.5 * ph - std::atan(w * (gamma - mu) / (w * w + gamma * mu)) - j * M_PI;
        };
        double lo = 2 * M_PI * k + (down ? M_PI : 0.0), hi = lo + M_PI;
        std::vector<Candidate> cs;
        double fv = nl_log_slope(p.v, xi);
        for (double ph : roots_on(G, lo, hi, 64)) {
            if (ph <= lo || ph >= hi) continue;
            double w = ph / tau;
            double r = (w * w + gamma * gamma) / (2 * gamma * (gamma - mu));
            cs.push_back({w, ph, fv - r});
        }
        return cs;
    };
    std::vector<HopfPoint> out;
    for (auto [xi, w] : scan_hopf(p, inner)) {
        HopfPoint h;
        if (!accept(p, xi, w, Regime::SdGConst, k, h)) continue;
        if (down ? !(h.gamma < mu) : !(h.gamma > mu)) continue;
        out.push_back(h);
    }
    sort_and_merge(out);
    return out;
}

std::vector<HopfPoint> hopf_general(const ModelParams& p, int k_max) {
    if (!p.finite_exponents()) throw RegimeError("hopf_general needs finite exponents");
    std::vector<HopfPoint> out;
    if (p.g.is_constant() && p.v.is_constant()) return out;
    const int per_window = 80;
    Inner inner = [&](double xi) -> std::vector<Candidate> {
        auto c = context_at(p, xi);
        const auto& s = c.ss;
        // Imaginary part divided by omega; its zeros are the candidate frequencies.
        auto I = [&](double ph) {
            double w = ph / s.tau;
            double sn = std::sin(ph), cs = std::cos(ph);
            return 1 + (s.Q - s.A) * sn / w + p.mu * s.A * (1 - cs) / (w * w);
        };
        std::vector<Candidate> out;
        double hi = 2 * M_PI * (k_max + 1);
        for (double ph : roots_on(I, 1e-3, hi, per_window * (k_max + 1))) {
            double w = ph / s.tau;
            out.push_back({w, ph, char_eval(c, cplx(0, w)).real() / s.gamma});
        }
        return out;
    };
    for (auto [xi, w] : scan_hopf(p, inner)) {
        HopfPoint h;
        if (accept(p, xi, w, Regime::General, 0, h) && h.k <= k_max) out.push_back(h);
    }
    sort_and_merge(out);
    return out;
}

std::vector<HopfPoint> hopf_points(const ModelParams& p, int k_max) {
    std::vector<HopfPoint> out;
    if (p.g.is_constant() && p.v.is_constant()) return out;
    if (p.v.is_constant()) {
        for (int k = 0; k <= k_max; ++k)
            for (auto& h : hopf_const_delay(p, k)) out.push_back(h);
    } else if (p.g.is_constant()) {
        for (int k = 0; k <= k_max; ++k)
            for (auto& h : hopf_sd_gconst(p, k)) out.push_back(h);
    } else {
        out = hopf_general(p, k_max);
    }
    return out;
}

}  // namespace tddebif
