#include "tddebif/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tddebif/errors.hpp"
#include "tddebif/numeric.hpp"

namespace tddebif {

namespace {

struct Hermite {
    double t0, t1, x0, x1, d0, d1;

    double operator()(double s) const {
        double h = t1 - t0, u = (s - t0) / h;
        double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * x1 +
               (u3 - u2) * h * d1;
    }
};

Hermite x_segment(const Trajectory& tr, std::size_t i) {
    return {tr.t[i], tr.t[i + 1], tr.x[i], tr.x[i + 1], tr.dx[i], tr.dx[i + 1]};
}

// Five-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss5(const F& f, double a, double b) {
    static const double node[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                   0.9061798459386640};
    static const double weight[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                     0.2369268850561891, 0.2369268850561891};
    double c = 0.5 * (a + b), r = 0.5 * (b - a), sum = 0;
    for (int i = 0; i < 5; ++i) sum += weight[i] * f(c + r * node[i]);
    return sum * r;
}

// Integral of v(phi(s)) over [lo, hi] within the history.
double history_integral(const ModelParams& p, const History& h, double lo, double hi, double tol) {
    if (hi <= lo) return 0;
    if (h.kind == History::Kind::Constant || p.v.is_constant()) return eval_nl(p.v, h.at(hi)) * (hi - lo);
    auto f = [&](double s) { return eval_nl(p.v, h.at(s)); };
    // Integrate knot to knot so each piece is smooth.
    auto it = std::upper_bound(h.t.begin(), h.t.end(), lo);
    double sum = 0, a = lo;
    for (; it != h.t.end() && *it < hi; ++it) {
        sum += adaptive_simpson(f, a, *it, tol / h.t.size());
        a = *it;
    }
    return sum + adaptive_simpson(f, a, hi, tol / h.t.size());
}

bool near_interface(const Nonlinearity& nl, double x) {
    if (nl.is_constant() || nl.is_step()) return false;
    return std::abs(x - nl.theta) < 5 * nl.theta / nl.exponent;
}

}  // namespace

History History::constant(double value) {
    History h;
    h.kind = Kind::Constant;
    h.value = value;
    return h;
}

History History::table(std::vector<double> t, std::vector<double> x) {
    if (t.size() != x.size() || t.size() < 2) throw ConfigError("history table needs matching t and x with two or more rows");
    if (t.back() != 0.0) throw ConfigError("history table must end at t = 0");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw ConfigError("history times must be strictly increasing");
    for (double v : x)
        if (!(v > 0)) throw ConfigError("history values must be positive");
    History h;
    h.kind = Kind::Tabulated;
    h.t = std::move(t);
    h.x = std::move(x);
    return h;
}

double History::at(double s) const {
    if (kind == Kind::Constant) return value;
    if (s <= t.front()) return x.front();
    if (s >= t.back()) return x.back();
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = std::size_t(it - t.begin()) - 1;
    double u = (s - t[i]) / (t[i + 1] - t[i]);
    return x[i] + u * (x[i + 1] - x[i]);
}

double History::span() const { return kind == Kind::Constant ? kInfinity : -t.front(); }

History default_history(const ModelParams& p) { return History::constant(1e-2 * corner_gammas(p).dL / p.gamma); }

double init_delay(const ModelParams& p, const History& h) {
    if (p.v.is_constant()) return p.a / p.v.lo;
    if (h.kind == History::Kind::Constant) return p.a / eval_nl(p.v, h.value);
    const double tol = 1e-12 * p.a;
    auto F = [&](double T) { return history_integral(p, h, -T, 0.0, 0.1 * tol) - p.a; };
    double span = h.span();
    double lo = std::min(p.tau_min(), span), hi = std::min(p.tau_max(), span);
    double fhi = F(hi);
    if (fhi < 0) throw HistoryTooShortError("history covers only " + std::to_string(span) + " time units");
    double flo = F(lo);
    if (flo >= 0) return lo;
    // Bisection on the upper limit; F has slope v >= v_min so this bounds the residual.
    return bisect(F, lo, hi, flo, fhi, tol / p.v.max_value(), 400);
}

std::size_t Trajectory::segment(double s) const {
    if (t.size() < 2) return 0;
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
    return std::min(i, t.size() - 2);
}

double Trajectory::x_at(double s) const {
    if (s <= 0 || t.size() < 2) return s <= 0 ? history.at(s) : x.back();
    return x_segment(*this, segment(s))(s);
}

double Trajectory::tau_at(double s) const {
    if (t.size() < 2) return tau.empty() ? 0.0 : tau.back();
    std::size_t i = segment(s);
    return Hermite{t[i], t[i + 1], tau[i], tau[i + 1], dtau[i], dtau[i + 1]}(s);
}

Trajectory integrate(const ModelParams& p, const History& hist, double t_end, const StepControl& ctl) {
    if (!(t_end > 0)) throw ConfigError("t_end must be positive");
    p.validate();
    const double tau0 = init_delay(p, hist);
    const double h_base = ctl.h > 0 ? ctl.h : std::min(tau0, 1.0) / 200;
    const double tau_lo = p.tau_min(), tau_hi = p.tau_max();
    const double slack = 1e-6 * tau_hi;

    Trajectory tr;
    tr.history = hist;
    double stored = std::isfinite(ctl.retain) ? std::min(t_end, 3 * std::max(ctl.retain, 2 * tau_hi)) : t_end;
    std::size_t reserve = std::size_t(stored / h_base * 1.1) + 16;
    for (auto* v : {&tr.t, &tr.x, &tr.dx, &tr.tau, &tr.dtau}) v->reserve(reserve);
    tr.t.push_back(0);
    tr.x.push_back(hist.at(0));
    tr.tau.push_back(tau0);
    tr.dx.push_back(0);
    tr.dtau.push_back(0);

    const double decay = p.gamma, beta = p.beta, mu = p.mu;
    // Delayed value; inside the current step it extrapolates the last segment.
    auto delayed = [&](double s) {
        if (s <= 0 && tr.t.front() == 0) return hist.at(s);
        std::size_t n = tr.t.size();
        if (s <= tr.t.back() && n >= 2) return x_segment(tr, tr.segment(s))(s);
        if (n >= 2) return x_segment(tr, n - 2)(s);
        return tr.x.back() + tr.dx.back() * (s - tr.t.back());
    };
    auto rhs = [&](double s, double xs, double ts, double& fx, double& ft) {
        double xd = delayed(s - ts);
        double ratio = eval_nl(p.v, xs) / eval_nl(p.v, xd);
        fx = beta * std::exp(-mu * ts) * ratio * eval_nl(p.g, xd) - decay * xs;
        ft = 1 - ratio;
    };

    const double keep = std::max(ctl.retain, 2 * tau_hi);
    std::vector<double> knots{0.0};
    if (hist.kind == History::Kind::Tabulated) knots.insert(knots.end(), hist.t.begin(), hist.t.end());
    while (tr.t.back() < t_end) {
        // Drop nodes no delayed argument can reach, in large batches.
        if (std::isfinite(keep) && tr.t.back() - tr.t.front() > 2 * keep) {
            std::size_t cut = tr.segment(tr.t.back() - keep);
            for (auto* v : {&tr.t, &tr.x, &tr.dx, &tr.tau, &tr.dtau}) v->erase(v->begin(), v->begin() + long(cut));
        }
        double t0 = tr.t.back(), x0 = tr.x.back(), s0 = tr.tau.back();
        double k1x, k1t, k2x, k2t, k3x, k3t, k4x, k4t;
        rhs(t0, x0, s0, k1x, k1t);
        tr.dx.back() = k1x;
        tr.dtau.back() = k1t;

        double h = h_base;
        if (ctl.refine_interfaces && (near_interface(p.g, x0) || near_interface(p.v, x0))) h *= 0.5;
        // The delayed state has a slope jump where it crosses a history knot;
        // the step that contains the crossing is cut short.
        double lag0 = t0 - s0, lag1 = lag0 + 1.5 * h * (1 - k1t);
        if (lag0 < 0 && std::any_of(knots.begin(), knots.end(), [&](double k) { return k > lag0 && k <= lag1; }))
            h /= 16;
        if (t0 + h > t_end || t_end - (t0 + h) < 1e-9 * h) h = t_end - t0;

        rhs(t0 + 0.5 * h, x0 + 0.5 * h * k1x, s0 + 0.5 * h * k1t, k2x, k2t);
        rhs(t0 + 0.5 * h, x0 + 0.5 * h * k2x, s0 + 0.5 * h * k2t, k3x, k3t);
        rhs(t0 + h, x0 + h * k3x, s0 + h * k3t, k4x, k4t);
        double x1 = x0 + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        double s1 = s0 + h / 6 * (k1t + 2 * k2t + 2 * k3t + k4t);
        if (!(x1 > 0) || !std::isfinite(x1))
            throw StepFailureError("state left the positive half-line at t = " + std::to_string(t0 + h));
        if (!(s1 >= tau_lo - slack && s1 <= tau_hi + slack))
            throw StepFailureError("delay " + std::to_string(s1) + " left its bracket at t = " + std::to_string(t0 + h));
        tr.t.push_back(t0 + h);
        tr.x.push_back(x1);
        tr.tau.push_back(s1);
        tr.dx.push_back(0);
        tr.dtau.push_back(0);
    }
    double fx, ft;
    rhs(tr.t.back(), tr.x.back(), tr.tau.back(), fx, ft);
    tr.dx.back() = fx;
    tr.dtau.back() = ft;
    return tr;
}

double threshold_residual(const ModelParams& p, const Trajectory& tr, double t) {
    double tau = t == 0 ? tr.tau.front() : tr.tau_at(t);
    double lo = t - tau;
    double sum = history_integral(p, tr.history, lo, std::min(0.0, t), 1e-13 * p.a);
    if (t > 0) {
        double a = std::max(lo, 0.0);
        for (std::size_t i = tr.segment(a); i + 1 < tr.t.size() && tr.t[i] < t; ++i) {
            double s0 = std::max(a, tr.t[i]), s1 = std::min(t, tr.t[i + 1]);
            if (s1 <= s0) continue;
            Hermite seg = x_segment(tr, i);
            sum += gauss5([&](double s) { return eval_nl(p.v, seg(s)); }, s0, s1);
        }
    }
    return std::abs(sum - p.a);
}

OrbitMetrics orbit_metrics(const Trajectory& tr, double section, double t_cut, double cap) {
    std::vector<double> up;
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
        if (tr.t[i] < t_cut) continue;
        if (tr.x[i] < section && tr.x[i + 1] >= section) {
            Hermite seg = x_segment(tr, i);
            auto f = [&](double s) { return seg(s) - section; };
            up.push_back(bisect(f, tr.t[i], tr.t[i + 1], f(tr.t[i]), f(tr.t[i + 1]), 1e-13 * (1 + tr.t[i + 1])));
        }
    }
    OrbitMetrics m;
    m.crossings = int(up.size());
    if (up.size() < 3) throw NoOscillationError("fewer than three upward crossings of the section");
    for (std::size_t i = 1; i < up.size(); ++i)
        if (up[i] - up[i - 1] > cap) m.blowup = true;
    if (tr.t_end() - up.back() > cap) m.blowup = true;

    double a = up[up.size() - 2], b = up.back();
    m.period = b - a;
    m.max_x = m.min_x = tr.x_at(a);
    double sq = 0;
    for (std::size_t i = tr.segment(a); i + 1 < tr.size() && tr.t[i] < b; ++i) {
        double s0 = std::max(a, tr.t[i]), s1 = std::min(b, tr.t[i + 1]);
        if (s1 <= s0) continue;
        Hermite seg = x_segment(tr, i);
        sq += gauss5([&](double s) { return seg(s) * seg(s); }, s0, s1);
        for (double s : {s0, 0.5 * (s0 + s1), s1}) {
            double x = seg(s);
            m.max_x = std::max(m.max_x, x);
            m.min_x = std::min(m.min_x, x);
            m.periodicity_residual = std::max(m.periodicity_residual, std::abs(x - tr.x_at(s - m.period)));
        }
    }
    m.l2 = std::sqrt(sq / m.period);
    return m;
}

double deviation(const Trajectory& tr, double centre, double t_from) {
    double d = 0;
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr.t[i] >= t_from) d = std::max(d, std::abs(tr.x[i] - centre));
    return d;
}

}  // namespace tddebif
