#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "occ/params.hpp"
#include "occ/roots.hpp"

namespace occ {

// One exponential term c * e^{rate (x - anchor)}. Rates keep their signs
// (negative-real-part roots stay negative), and each term is anchored at the
// nearer barrier of its region, so every basis value is bounded by 1 there.
struct ExpTerm {
    Complex coef;
    Complex rate;
    double anchor = 0.0;

    Complex at(double x) const { return coef * std::exp(rate * (x - anchor)); }
    Complex d_at(double x) const { return coef * rate * std::exp(rate * (x - anchor)); }
};

// Laplace-Carson transform in T of E_x[e^{-occupation damping + gamma X_T}],
// represented as exponential sums on up to three regions split at h <= H,
// each plus a constant multiple of e^{gamma x}. Single-barrier transforms
// store h == H with an empty middle region. Leading signs from the source
// formulas are folded into the stored coefficients.
struct PiecewiseExpSum {
    double h = 0.0, H = 0.0;
    Complex gamma;
    std::vector<ExpTerm> low, mid, high;
    Complex const_low, const_mid, const_high;  // coefficient of e^{gamma x}

    bool single_barrier() const { return h == H; }
    int region_of(double x) const { return x < h ? 0 : (x > H ? 2 : (single_barrier() ? 2 : 1)); }
    Complex value(double x) const { return value_region(region_of(x), x); }
    Complex derivative(double x) const { return derivative_region(region_of(x), x); }
    Complex value_region(int region, double x) const;
    Complex derivative_region(int region, double x) const;
    Complex second_derivative_region(int region, double x) const;
};

// The assembled block system for the three-region transforms, kept for
// inspection and testing. B = [[M, N Zbeta], [M Zgamma, N]] acting on the
// unknown order (omega^L, nu^0 | nu^U, omega^0); V = ((cL-c0) V1; (cU-c0) V2).
struct OccupationSystem {
    Eigen::MatrixXcd B, M, N;
    Eigen::VectorXcd Zbeta, Zgamma;  // diagonals
    Eigen::VectorXcd V;
    double condition = 0.0;
};

// Per-region extra killing rates on top of alpha: (low, mid, high) apply on
// (-inf,h), (h,H), (H,inf) respectively.
struct RhoProfile {
    double low = 0.0, mid = 0.0, high = 0.0;
};

// Reusable factorization of the three-region system for fixed
// (alpha, rho profile, h, H). The matrix depends only on the root sets, not
// on the tilt gamma, so transforms at many gammas share one LU; the pricing
// contours lean on this.
class ThreeRegionSolver {
public:
    ThreeRegionSolver(const MEJDParams& p, Complex alpha, const RhoProfile& rho,
                      double h, double H);
    PiecewiseExpSum at(Complex gamma) const;
    const OccupationSystem& system() const { return sys_; }

private:
    MEJDParams p_;
    Complex alpha_;
    RhoProfile rho_;
    double h_, H_;
    RootSet low_, mid_, high_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    OccupationSystem sys_;
};

// Root sets for the single-barrier closed form, shared across tilts. The
// occupation rates may be complex here: the quantile pricing contour feeds
// complex rho nodes through this path.
class SingleBarrierSolver {
public:
    SingleBarrierSolver(const MEJDParams& p, Complex alpha, Complex rho1,
                        Complex rho2, double h);
    PiecewiseExpSum at(Complex gamma) const;
    const RootSet& below() const { return below_; }
    const RootSet& above() const { return above_; }

private:
    MEJDParams p_;
    Complex alpha_;
    Complex rho1_, rho2_;
    double h_;
    RootSet below_, above_;
};

// Transform of e^{-rho * time in (h,H) + gamma X_T} at the exponential clock:
// region killing rates (alpha, alpha+rho, alpha) with constants
// c_L = c_U = alpha/(G(gamma)-alpha), c_0 = alpha/(G(gamma)-(alpha+rho))
// folded into the stored representation.
PiecewiseExpSum interval_occupation_transform(const MEJDParams& p, Complex alpha,
                                              double rho, Complex gamma, double h,
                                              double H,
                                              OccupationSystem* sys = nullptr);

// Transform of e^{-rho1 * time below h - rho2 * time above H + gamma X_T}:
// region rates (alpha+rho1, alpha, alpha+rho2).
PiecewiseExpSum two_barrier_occupation_transform(const MEJDParams& p, Complex alpha,
                                                 double rho1, double rho2,
                                                 Complex gamma, double h, double H,
                                                 OccupationSystem* sys = nullptr);

// Single barrier h with rates rho1 below / rho2 above: closed-form product
// coefficients, no linear solve. rho2 = 0 (or rho1 = 0) is admitted.
PiecewiseExpSum single_barrier_occupation_transform(const MEJDParams& p,
                                                    Complex alpha, double rho1,
                                                    double rho2, Complex gamma,
                                                    double h);

// Closed-form determinant of the S x S matrix with rows
// (1; a_i; 1/(eta_k - a_i); 1/(theta_l + a_i)), S = m + n + 2. Used as the
// oracle for the Cauchy-type blocks of the assembled systems.
double cauchy_determinant(const std::vector<double>& etas,
                          const std::vector<double>& thetas,
                          const std::vector<double>& a);

// Evaluates the integro-differential operator
//   (sigma^2/2) w'' + mu w' - (lambda + alpha + rho(x)) w + lambda (f_Y * w) + alpha e^{gamma x}
// on the piecewise representation at each x (all pieces in closed form, no
// quadrature) and returns max |residual| / |alpha e^{gamma x}|. This is the
// independent correctness oracle for every produced transform.
double residual_check(const PiecewiseExpSum& w, const MEJDParams& p, Complex alpha,
                      const RhoProfile& rho, Complex gamma,
                      std::span<const double> xs);

}  // namespace occ
