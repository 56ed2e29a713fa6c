#pragma once

#include <functional>

#include "occ/params.hpp"

namespace occ {

enum class InversionMethod { euler, gaver_stehfest };

struct InversionConfig {
    InversionMethod method = InversionMethod::euler;
    int euler_m = 32;        // partial sums accumulated before averaging
    int euler_n = 15;        // binomial averaging length
    int gs_terms = 14;       // Gaver-Stehfest terms, even, <= 18
    double abscissa = 18.4;  // per-dimension discretization budget e^{-A}
    int rounds = 1;          // refinement multiplier for the 2-D schemes

    void check() const;  // throws DomainError on a bad combination
};

using CarsonFn = std::function<Complex(Complex)>;
using DoubleTransformFn = std::function<Complex(Complex, Complex)>;

// f(T) from its Laplace-Carson transform (divides by alpha internally).
// `shift` moves the Bromwich line right when the transform has singularities
// right of A/(2T); the caller supplies it from its analyticity knowledge.
double invert_carson(const CarsonFn& carson, double T, const InversionConfig& cfg,
                     double shift = 0.0);

// Gaver-Stehfest on the real axis; diagnostic fallback for real transforms.
double gaver_stehfest_carson(const std::function<double(double)>& carson, double T,
                             int terms);

// Iterated 2-D inversion of an ordinary double transform
// F(alpha, s) = int int e^{-alpha T - s u} f(T, u) du dT with both dimensions
// one-sided. Inner dimension inverted by a both-wings Euler sum at each
// complex outer node, outer by the standard Euler scheme.
double invert_double(const DoubleTransformFn& F, double T, double u,
                     const InversionConfig& cfg, double outer_shift = 0.0);

// Iterated 2-D inversion when the second dimension is two-sided
// (F(alpha, beta) = int e^{-beta k} ... dk over all of R). The inner contour
// runs at fixed Re(beta) = beta0 inside the strip (0, strip_edge); the period
// of the trapezoidal discretization is set so both Poisson image families
// stay under the e^{-A} budget, assuming |f| bounded as k -> +inf and
// e^{strip_edge k} decay as k -> -inf.
struct BilateralContour {
    double beta0 = 1.0;
    double strip_edge = 2.0;
};
double invert_double_bilateral(const DoubleTransformFn& F, double T, double k,
                               const BilateralContour& contour,
                               const InversionConfig& cfg, double outer_shift = 0.0);

}  // namespace occ
