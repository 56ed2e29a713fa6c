#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>

#include "occ/errors.hpp"
#include "occ/params.hpp"

using namespace occ;

namespace {

// Adaptive Simpson quadrature, the independent oracle for density mass.
double simpson(const std::function<double(double)>& f, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-11) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

const MEJDParams kKouSpec = kou_params(0.1, 0.3, 1.0, 0.5, 2.0, 3.0);
const MEJDParams kKou54 = kou_params(0.1, 0.3, 1.0, 0.5, 5.0, 4.0);

}  // namespace

TEST_CASE("validate accepts the double-exponential case") {
    CHECK(validate(kKouSpec).ok());
}

TEST_CASE("validate flags a broken side-probability sum") {
    MEJDParams p = kKouSpec;
    p.p_up = 0.7;
    p.q_down = 0.2;
    const auto rep = validate(p);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& v : rep.violations) found = found || v == "p_up+q_down != 1";
    CHECK(found);
}

TEST_CASE("validate flags a sign-changing density") {
    MEJDParams p;
    p.mu = 0.0;
    p.sigma = 0.2;
    p.lambda = 1.0;
    p.p_up = 0.5;
    p.q_down = 0.5;
    p.up_weights = {-1.0, 2.0};
    p.up_rates = {1.0, 1.05};
    p.down_weights = {1.0};
    p.down_rates = {3.0};
    CHECK_FALSE(validate(p).ok());
}

TEST_CASE("validate rejects unused rates and zero weights") {
    MEJDParams p = kKouSpec;
    p.p_up = 0.0;
    p.q_down = 1.0;
    CHECK_FALSE(validate(p).ok());  // up rates listed but side inactive
    p = kKouSpec;
    p.up_weights = {0.0};
    CHECK_FALSE(validate(p).ok());
}

TEST_CASE("density values and the up-branch convention at zero") {
    CHECK(density_at(kKouSpec, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(density_at(kKouSpec, -1.0) ==
          doctest::Approx(0.5 * 3.0 * std::exp(-3.0)).epsilon(1e-12));
}

TEST_CASE("density integrates to one") {
    for (const MEJDParams& p : {kKouSpec, kKou54}) {
        const double lo = -50.0 / p.down_rates.front();
        const double hi = 50.0 / p.up_rates.front();
        const double mass =
            integrate([&](double y) { return density_at(p, y); }, lo, 0.0) +
            integrate([&](double y) { return density_at(p, y); }, 0.0, hi);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    }

    MEJDParams signed_mix = kKou54;
    signed_mix.up_weights = {2.0, -1.0};
    signed_mix.up_rates = {1.5, 3.0};
    REQUIRE(validate(signed_mix).ok());
    const double mass =
        integrate([&](double y) { return density_at(signed_mix, y); }, -50.0 / 4.0,
                  0.0) +
        integrate([&](double y) { return density_at(signed_mix, y); }, 0.0,
                  50.0 / 1.5);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("levy exponent vanishes at zero and matches direct evaluation") {
    CHECK(std::abs(levy_exponent(kKou54, Complex(0.0, 0.0))) < 1e-14);

    MEJDParams diff;
    diff.mu = 1.0;
    diff.sigma = std::sqrt(2.0);
    diff.lambda = 0.0;
    CHECK(levy_exponent(diff, Complex(2.0, 0.0)).real() ==
          doctest::Approx(6.0).epsilon(1e-14));

    // Independent single-expression evaluation for the Kou case at zeta = 1.
    const double mu = 0.1, sig = 0.3, lam = 1.0, pu = 0.5, qd = 0.5, eta = 5.0,
                 th = 4.0, z = 1.0;
    const double direct = mu * z + 0.5 * sig * sig * z * z +
                          lam * (pu * eta / (eta - z) + qd * th / (th + z) - 1.0);
    CHECK(levy_exponent(kKou54, Complex(z, 0.0)).real() ==
          doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("levy exponent is conjugate symmetric") {
    const Complex z(0.7, 1.9);
    const Complex a = levy_exponent(kKou54, std::conj(z));
    const Complex b = std::conj(levy_exponent(kKou54, z));
    CHECK(std::abs(a - b) < 1e-13);
}

TEST_CASE("pole evaluation is rejected") {
    CHECK_THROWS_AS((void)levy_exponent(kKou54, Complex(5.0, 0.0)), PoleEvaluation);
    CHECK_THROWS_AS((void)levy_exponent(kKou54, Complex(-4.0, 0.0)), PoleEvaluation);
}

TEST_CASE("trend equals the drift without jumps and matches a finite difference") {
    MEJDParams diff;
    diff.mu = 0.37;
    diff.sigma = 0.5;
    diff.lambda = 0.0;
    CHECK(trend(diff) == doctest::Approx(0.37));

    CHECK(trend(kKou54) ==
          doctest::Approx(0.1 + 0.5 / 5.0 - 0.5 / 4.0).epsilon(1e-13));

    const double h = 1e-6;
    const double fd = (levy_exponent(kKou54, Complex(h, 0.0)).real() -
                       levy_exponent(kKou54, Complex(-h, 0.0)).real()) /
                      (2.0 * h);
    CHECK(std::abs(fd - trend(kKou54)) < 1e-6);
}

TEST_CASE("risk-neutral drift makes G(1) = r") {
    MEJDParams diff;
    diff.sigma = 0.2;
    diff.lambda = 0.0;
    CHECK(risk_neutral_drift(0.05, diff) == doctest::Approx(0.03).epsilon(1e-14));

    const MEJDParams rn = with_risk_neutral_drift(0.05, kKou54);
    CHECK(std::abs(levy_exponent(rn, Complex(1.0, 0.0)).real() - 0.05) < 1e-12);

    MEJDParams bad = kou_params(0.0, 0.3, 1.0, 0.5, 0.9, 4.0);
    CHECK_THROWS_AS((void)risk_neutral_drift(0.05, bad), MgfDivergence);
}
