#include "tddebif/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstdlib>
#include <string>
#include <thread>

namespace tddebif {

double bisect(const std::function<double(double)>& f, double a, double b, double fa, double fb,
              double xtol, int max_iter) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    for (int i = 0; i < max_iter && std::abs(b - a) > xtol; ++i) {
        double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    return 0.5 * (a + b);
}

double golden_max(const std::function<double(double)>& f, double a, double b, double xtol,
                  int max_iter) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && std::abs(b - a) > xtol; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15 * tol) return left + right + diff / 15;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
    if (a == b) return 0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    double l0 = std::log(lo), l1 = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::exp(l0 + (l1 - l0) * double(i) / double(count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> lin_grid(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + (hi - lo) * double(i) / double(count - 1);
    out.back() = hi;
    return out;
}

std::vector<double> refined_grid(double lo, double hi, std::size_t count,
                                 const std::vector<Window>& windows, std::size_t window_count) {
    std::vector<double> out = log_grid(lo, hi, count);
    for (const auto& w : windows) {
        double a = std::max(lo, w.centre * (1.0 - w.half_width));
        double b = std::min(hi, w.centre * (1.0 + w.half_width));
        if (!(b > a)) continue;
        auto seg = lin_grid(a, b, window_count);
        out.insert(out.end(), seg.begin(), seg.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    unsigned t = std::min<std::size_t>(workers, n);
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    // The failure with the lowest index wins, as in a sequential run.
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

unsigned default_workers(unsigned fallback) {
    if (const char* env = std::getenv("TDDEBIF_WORKERS")) {
        try {
            long v = std::stol(env);
            if (v >= 1) return unsigned(v);
        } catch (...) {
        }
    }
    return std::max(1u, fallback);
}

}  // namespace tddebif
