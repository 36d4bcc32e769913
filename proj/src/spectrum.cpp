#include "tddebif/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "tddebif/errors.hpp"

namespace tddebif {

namespace {

constexpr double kSeriesCut = 1e-4;
constexpr double kContourFloor = 1e-8;

// (1 - e^{-z tau}) / z and its derivative, with the removable singularity handled.
void distributed(cplx lambda, double tau, cplx& d, cplx& dd) {
    cplx z = lambda * tau;
    if (std::abs(z) < kSeriesCut) {
        d = tau * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
        dd = tau * tau * (-0.5 + z / 3.0 - z * z / 8.0 + z * z * z / 30.0);
        return;
    }
    cplx e = std::exp(-z);
    d = (1.0 - e) / lambda;
    dd = (tau * e - d) / lambda;
}

struct Winding {
    const CharContext& c;
    double total = 0;

    cplx eval(cplx z) const {
        cplx f = char_eval(c, z);
        if (!(std::abs(f) >= kContourFloor)) throw ContourError("characteristic function vanishes on the contour");
        return f;
    }

    void segment(cplx z0, cplx f0, cplx z1, cplx f1, int depth) {
        double inc = std::arg(f1 / f0);
        if (std::abs(inc) < 0.5 || depth > 48) {
            total += inc;
            return;
        }
        cplx zm = 0.5 * (z0 + z1);
        cplx fm = eval(zm);
        segment(z0, f0, zm, fm, depth + 1);
        segment(zm, fm, z1, f1, depth + 1);
    }
};

}  // namespace

CharContext CharContext::from(const ModelParams& p, const SteadyState& ss) {
    CharContext c;
    c.ss = ss;
    c.mu = p.mu;
    c.production = p.beta * std::exp(-p.mu * ss.tau);
    c.dg = p.g.is_step() ? 0.0 : eval_dnl(p.g, ss.xi);
    c.dv = p.v.is_step() ? 0.0 : eval_dnl(p.v, ss.xi);
    return c;
}

CharContext CharContext::raw(double gamma, double A, double Q, double tau, double mu) {
    CharContext c;
    c.ss.gamma = gamma;
    c.ss.A = A;
    c.ss.Q = Q;
    c.ss.tau = tau;
    c.mu = mu;
    return c;
}

cplx char_eval(const CharContext& c, cplx lambda) {
    const auto& s = c.ss;
    cplx d, dd;
    distributed(lambda, s.tau, d, dd);
    cplx e = std::exp(-lambda * s.tau);
    return lambda + s.gamma - s.A - (s.Q - s.A) * e - c.mu * s.A * d;
}

cplx char_derivative(const CharContext& c, cplx lambda) {
    const auto& s = c.ss;
    cplx d, dd;
    distributed(lambda, s.tau, d, dd);
    cplx e = std::exp(-lambda * s.tau);
    return 1.0 + (s.Q - s.A) * s.tau * e - c.mu * s.A * dd;
}

Box default_box(const CharContext& c) {
    const auto& s = c.ss;
    double bound = s.gamma + 2 * std::abs(s.A) + std::abs(s.Q) + c.mu * s.tau * std::abs(s.A);
    double re = std::max(s.gamma + std::abs(s.A) + std::abs(s.Q) + 1.0, bound + 1.0);
    double im = std::max(40.0 * M_PI / s.tau, bound + 1.0);
    return {-re, re, 0.0, im};
}

int argument_count(const CharContext& c, double re_min, double re_max, double im_max, int points) {
    const cplx corners[4] = {{re_min, -im_max}, {re_max, -im_max}, {re_max, im_max}, {re_min, im_max}};
    double lengths[4], perimeter = 0;
    for (int k = 0; k < 4; ++k) {
        lengths[k] = std::abs(corners[(k + 1) % 4] - corners[k]);
        perimeter += lengths[k];
    }
    Winding w{c};
    for (int k = 0; k < 4; ++k) {
        int n = std::max(16, int(std::lround(points * lengths[k] / perimeter)));
        cplx a = corners[k], b = corners[(k + 1) % 4];
        cplx z0 = a, f0 = w.eval(a);
        for (int i = 1; i <= n; ++i) {
            cplx z1 = a + (b - a) * (double(i) / n);
            cplx f1 = w.eval(z1);
            w.segment(z0, f0, z1, f1, 0);
            z0 = z1;
            f0 = f1;
        }
    }
    double turns = w.total / (2 * M_PI);
    long count = std::lround(turns);
    if (std::abs(turns - double(count)) > 0.1) throw ContourError("winding number did not settle");
    return int(count);
}

int unstable_count(const CharContext& c) {
    Box b = default_box(c);
    double re_min = 1e-6, re_max = b.re_hi, im_max = b.im_hi;
    for (int attempt = 0;; ++attempt) {
        try {
            return argument_count(c, re_min, re_max, im_max);
        } catch (const ContourError&) {
            if (attempt == 3) throw;
            re_min *= 7.3;
            re_max *= 1.37;
            im_max *= 1.29;
        }
    }
}

SpectrumReport find_roots(const CharContext& c, const Box& box, const RootOptions& opt) {
    SpectrumReport rep;
    rep.box = box;
    const double wr = box.re_hi - box.re_lo, wi = box.im_hi - box.im_lo;
    const int n = opt.seeds_per_side;
    std::vector<cplx> found;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            cplx z(box.re_lo + wr * (i + 0.5) / n, box.im_lo + wi * (j + 0.5) / n);
            bool ok = false;
            for (int it = 0; it < 80; ++it) {
                cplx f = char_eval(c, z), df = char_derivative(c, z);
                if (df == 0.0) break;
                cplx step = f / df;
                z -= step;
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
                if (z.real() < box.re_lo - wr || z.real() > box.re_hi + wr || std::abs(z.imag()) > box.im_hi + wi) break;
                if (std::abs(step) < 1e-14 * (1 + std::abs(z))) {
                    ok = true;
                    break;
                }
            }
            if (!ok) continue;
            if (z.imag() < 0) z = std::conj(z);
            if (std::abs(z.imag()) < 1e-12 * (1 + std::abs(z))) z.imag(0.0);
            if (z.real() < box.re_lo || z.real() > box.re_hi || z.imag() < box.im_lo || z.imag() > box.im_hi) continue;
            if (std::abs(char_eval(c, z)) >= 1e-9 * (1 + std::abs(z))) continue;
            found.push_back(z);
        }
    }
    std::sort(found.begin(), found.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (cplx z : found) {
        bool dup = false;
        for (const auto& r : rep.roots)
            if (std::abs(r.lambda - z) < 1e-7) dup = true;
        if (!dup) rep.roots.push_back({z, std::abs(char_eval(c, z))});
    }
    rep.rightmost = rep.roots.empty() ? cplx(NAN, NAN) : rep.roots.front().lambda;
    for (const auto& r : rep.roots)
        if (r.lambda.real() > rep.rightmost.real()) rep.rightmost = r.lambda;
    if (box.re_hi > 0) {
        double lo = std::max(box.re_lo, 1e-6);
        rep.unstable_count = argument_count(c, lo, box.re_hi, box.im_hi, opt.contour_points);
    }
    return rep;
}

void classify(const ModelParams& p, SteadyState& ss) { ss.unstable_count = unstable_count(CharContext::from(p, ss)); }

}  // namespace tddebif
