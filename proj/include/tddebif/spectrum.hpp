#pragma once

#include <complex>
#include <vector>

#include "tddebif/model.hpp"
#include "tddebif/steady.hpp"

namespace tddebif {

using cplx = std::complex<double>;

// Linearization data at a steady state. The characteristic function is
//   lambda + gamma - A - (Q - A) e^{-lambda tau} - mu A (1 - e^{-lambda tau}) / lambda.
struct CharContext {
    SteadyState ss;
    double mu = 0;
    double production = 0;  // beta e^{-mu tau(xi)}
    double dg = 0;          // g'(xi)
    double dv = 0;          // v'(xi)

    static CharContext from(const ModelParams& p, const SteadyState& ss);
    // Context from bare coefficients, for callers that already hold them.
    static CharContext raw(double gamma, double A, double Q, double tau, double mu);
};

cplx char_eval(const CharContext& c, cplx lambda);
cplx char_derivative(const CharContext& c, cplx lambda);

struct Box {
    double re_lo, re_hi;
    double im_lo, im_hi;
};

struct Root {
    cplx lambda;
    double residual;
};

struct SpectrumReport {
    std::vector<Root> roots;  // Im >= 0 only, sorted by (Re, Im)
    Box box;
    int unstable_count = 0;   // conjugates included
    cplx rightmost;
};

struct RootOptions {
    int seeds_per_side = 60;
    int contour_points = 4096;
};

// Default search region: unstable roots satisfy |lambda| <= gamma + 2|A| + |Q| + mu tau |A|,
// so the box is at least that large.
Box default_box(const CharContext& c);

SpectrumReport find_roots(const CharContext& c, const Box& box, const RootOptions& opt = {});

// Zeros of the characteristic function in {Re > re_min} inside the rectangle
// [re_min, re_max] x [-im_max, im_max], by the winding number of its boundary.
int argument_count(const CharContext& c, double re_min, double re_max, double im_max, int points = 4096);

// Roots with positive real part (conjugates counted), excluding any root at
// the origin. Enlarges the contour up to three times if it grazes a root.
int unstable_count(const CharContext& c);

void classify(const ModelParams& p, SteadyState& ss);

}  // namespace tddebif
