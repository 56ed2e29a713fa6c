#pragma once

#include <complex>
#include <string>
#include <vector>

namespace occ {

using Complex = std::complex<double>;

// Mixed-exponential jump-diffusion: drift mu, volatility sigma, jump
// intensity lambda; jumps are up with probability p_up (signed mixture of
// exponentials with rates eta_i, weights p_i) and down with probability
// q_down (rates theta_j, weights q_j). Weights may be negative as long as
// the jump density stays nonnegative; each side's weights sum to 1 and its
// rates are strictly increasing.
struct MEJDParams {
    double mu = 0.0;
    double sigma = 0.0;
    double lambda = 0.0;
    double p_up = 0.0;
    double q_down = 0.0;
    std::vector<double> up_weights;    // p_i
    std::vector<double> up_rates;      // eta_i, ascending
    std::vector<double> down_weights;  // q_j
    std::vector<double> down_rates;    // theta_j, ascending

    int m() const { return static_cast<int>(up_rates.size()); }
    int n() const { return static_cast<int>(down_rates.size()); }
    bool has_up_jumps() const { return lambda > 0.0 && p_up > 0.0; }
    bool has_down_jumps() const { return lambda > 0.0 && q_down > 0.0; }
    double min_rate() const;  // min(eta_1, theta_1) over active sides
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Checks every structural invariant plus numerical nonnegativity of the jump
// density (geometric grid scan, 10^4 points per side, and sign analysis of
// the dominant terms at 0+ and infinity). Report-style: never throws.
ValidationReport validate(const MEJDParams& p);

// Jump density f_Y(y); the y = 0 point uses the up-jump branch.
double density_at(const MEJDParams& p, double y);

// Levy exponent G(zeta) = mu zeta + sigma^2 zeta^2/2
//   + lambda (p_up sum p_i eta_i/(eta_i - zeta) + q_down sum q_j theta_j/(theta_j + zeta) - 1),
// extended to all of C minus the poles {eta_i, -theta_j}.
Complex levy_exponent(const MEJDParams& p, Complex zeta);
Complex levy_exponent_derivative(const MEJDParams& p, Complex zeta);

// E[X_1] = G'(0+).
double trend(const MEJDParams& p);

// E[e^{Y_1}]; requires eta_1 > 1 on an active up side (MgfDivergence).
double exp_jump_moment(const MEJDParams& p);

// Drift making G(1) = r: mu = r - sigma^2/2 - lambda (E[e^Y] - 1).
double risk_neutral_drift(double r, const MEJDParams& p);
MEJDParams with_risk_neutral_drift(double r, MEJDParams p);

// Kou double-exponential special case (m = n = 1, unit weights).
MEJDParams kou_params(double mu, double sigma, double lambda, double p_up,
                      double eta, double theta);

}  // namespace occ
