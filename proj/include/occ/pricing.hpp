#pragma once

#include <variant>

#include "occ/inversion.hpp"
#include "occ/params.hpp"

namespace occ {

// Down-and-out style step call: payoff e^{-rho * time below L} (S_T - K)_+.
struct StepCall {
    double S0, K, L;
    double rho;
    double r, T;
};

// Double-barrier step call: occupation below L damped at rho_minus, above U
// at rho_plus.
struct DoubleStepCall {
    double S0, K, L, U;
    double rho_minus, rho_plus;
    double r, T;
};

// Fixed-strike quantile call on S0 e^{lambda_q q(upsilon/T, T)} where
// q(a, T) is the level below which the log-return spends fraction a of its
// time.
struct QuantileCall {
    double S0, K;
    double upsilon_frac;  // upsilon / T in (0, 1)
    double lambda_q;      // payoff exponent (q-scaling)
    double r, T;
};

using OptionSpec = std::variant<StepCall, DoubleStepCall, QuantileCall>;

// Ordinary double Laplace transforms (T and log-strike k = -ln K for the
// step family; T and upsilon for the quantile), discounting folded by the
// alpha -> alpha + r substitution.
Complex step_double_transform(const MEJDParams& p, const StepCall& s, Complex alpha,
                              Complex beta);
Complex double_step_double_transform(const MEJDParams& p, const DoubleStepCall& s,
                                     Complex alpha, Complex beta);
Complex quantile_double_transform(const MEJDParams& p, const QuantileCall& s,
                                  Complex alpha, Complex rho);
// rho = 0 reference: the vanilla call's double transform under the same model.
Complex vanilla_double_transform(const MEJDParams& p, double S0, double r,
                                 Complex alpha, Complex beta);

// Strike-dimension contour abscissa: 0.75 (min(eta_1, theta_1) - 1), clipped
// to >= 0.5; requires min rate > 1 for the payoff transform to exist.
double carr_madan_beta0(const MEJDParams& p);

// Inverts the matching double transform. Requires risk-neutral drift
// (|G(1) - r| small) and min(eta_1, theta_1) > 1.
double price(const MEJDParams& p, const OptionSpec& spec, const InversionConfig& cfg);

double vanilla_price(const MEJDParams& p, double S0, double K, double r, double T,
                     const InversionConfig& cfg);

}  // namespace occ
