#pragma once

#include <vector>

#include "occ/params.hpp"

namespace occ {

// Roots of the Cramer-Lundberg equation G(zeta) = alpha. There are m+1 roots
// with positive real part (betas, ascending by real part) and n+1 with
// negative real part (gammas, descending by real part, so gammas[0] is the
// one closest to 0). For real alpha large enough all roots are real and
// interlace with the rates:
//   0 < beta_1 < eta_1 < beta_2 < ... < eta_m < beta_{m+1}
//   -theta_n < gamma_n < ... < -theta_1 < gamma_1 < 0,  gamma_{n+1} < -theta_n
// `interlaced` records whether that chain was verified.
struct RootSet {
    Complex alpha;
    std::vector<Complex> betas;
    std::vector<Complex> gammas;
    bool interlaced = false;
    double max_residual = 0.0;  // max |G(root)-alpha| / (1+|alpha|)

    std::vector<Complex> all() const {
        std::vector<Complex> r(betas);
        r.insert(r.end(), gammas.begin(), gammas.end());
        return r;
    }
};

// Coefficients (ascending degree) of the degree-(m+n+2) polynomial
//   P(zeta) = (G(zeta) - alpha) * prod_i (eta_i - zeta) * prod_j (theta_j + zeta),
// whose roots are exactly those of G = alpha. Requires sigma > 0; otherwise
// the leading coefficient vanishes (DegenerateLeadingCoefficient).
std::vector<Complex> characteristic_polynomial(const MEJDParams& p, Complex alpha);

// All m+n+2 roots: companion-matrix eigenvalues of the cleared polynomial,
// polished by Newton iterations on G(zeta) - alpha itself. Throws
// RootCountMismatch when the positive/negative split is not (m+1, n+1) or
// roots fail to stay distinct, ConvergenceFailure when polishing stalls.
RootSet find_roots(const MEJDParams& p, Complex alpha);

}  // namespace occ
