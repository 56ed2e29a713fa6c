#pragma once

#include <vector>

#include "occ/params.hpp"
#include "occ/roots.hpp"

namespace occ {

// Boundary payoff g for the exit problems, restricted to the family whose
// one-sided exponential moments exist in closed form:
//   exponential(c):     g(y) = e^{c y}
//   constant(v):        g(y) = v
//   indicator_above(a): g(y) = 1{y >= a}
//   indicator_below(a): g(y) = 1{y <= a}
struct BoundaryFunctional {
    enum class Kind { exponential, constant, indicator_above, indicator_below };
    Kind kind = Kind::constant;
    double param = 1.0;  // rate c, value v, or threshold a

    static BoundaryFunctional exponential(double rate) { return {Kind::exponential, rate}; }
    static BoundaryFunctional constant(double value) { return {Kind::constant, value}; }
    static BoundaryFunctional indicator_above(double a) { return {Kind::indicator_above, a}; }
    static BoundaryFunctional indicator_below(double a) { return {Kind::indicator_below, a}; }

    double value_above(double H) const;  // g(H+)
    double value_below(double h) const;  // g(h-)
    // e^{eta H} int_H^inf g(y) e^{-eta y} dy; exponential kind needs rate < eta.
    double up_moment(double eta, double H) const;
    // e^{-theta h} int_{-inf}^h g(y) e^{theta y} dy; exponential kind needs rate > -theta.
    double down_moment(double theta, double h) const;
};

// Solved coefficients of an exit functional, stored against anchored bases
// e^{beta_i (x-H)} / e^{gamma_j (x-h)} so no entry overflows for barriers of
// either sign. evaluate() is only meaningful on the side of the barrier(s)
// the kind refers to; outside, the functional equals g(x).
struct ExitCoefficients {
    enum class Kind { up, down, two_sided };
    Kind kind = Kind::up;
    Complex alpha;
    double h = 0.0, H = 0.0;
    std::vector<Complex> omega;        // against e^{beta_i (x-H)}
    std::vector<Complex> nu;           // against e^{gamma_j (x-h)}
    std::vector<Complex> beta_rates;   // the beta roots used
    std::vector<Complex> gamma_rates;  // the gamma roots used
    double solve_residual = 0.0;
    double condition = 0.0;

    Complex evaluate(double x) const;
};

// E_x[e^{-alpha tau_H^+} g(X_{tau_H^+})] = sum_i omega_i e^{beta_i (x-H)}, x < H.
ExitCoefficients up_passage(const MEJDParams& p, Complex alpha, double H,
                            const BoundaryFunctional& g, const RootSet& roots);

// E_x[e^{-alpha tau_h^-} g(X_{tau_h^-})] = sum_j nu_j e^{gamma_j (x-h)}, x > h.
ExitCoefficients down_passage(const MEJDParams& p, Complex alpha, double h,
                              const BoundaryFunctional& g, const RootSet& roots);

// E_x[e^{-alpha (tau_H^+ ^ tau_h^-)} g(X)] on (h, H); coefficients for the
// combined basis (betas anchored at H, gammas anchored at h).
ExitCoefficients two_sided_exit(const MEJDParams& p, Complex alpha, double h,
                                double H, const BoundaryFunctional& g,
                                const RootSet& roots);

// Same system against an explicit right-hand side ordered
// (g(H+), eta_1..eta_m up-moments, g(h-), theta_1..theta_n down-moments);
// lets callers exploit linearity in g for payoffs outside the closed-form
// family.
ExitCoefficients two_sided_exit_with_rhs(const MEJDParams& p, Complex alpha,
                                         double h, double H, const RootSet& roots,
                                         const std::vector<Complex>& rhs);

}  // namespace occ
