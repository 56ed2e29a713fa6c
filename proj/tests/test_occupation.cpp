#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "occ/errors.hpp"
#include "occ/exit.hpp"
#include "occ/occupation.hpp"
#include "occ/params.hpp"

using namespace occ;

namespace {

const MEJDParams kKou = kou_params(0.1, 0.3, 1.0, 0.5, 5.0, 4.0);

Complex carson_reference(const MEJDParams& p, Complex alpha, Complex gamma, double x) {
    return alpha / (alpha - levy_exponent(p, gamma)) * std::exp(gamma * x);
}

// Direct determinant by partial-pivot elimination: the oracle for the
// closed-form expression.
double direct_det(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) return 0.0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return det;
}

std::vector<std::vector<double>> cauchy_matrix(const std::vector<double>& etas,
                                               const std::vector<double>& thetas,
                                               const std::vector<double>& a) {
    const std::size_t S = a.size();
    std::vector<std::vector<double>> M(S, std::vector<double>(S));
    for (std::size_t i = 0; i < S; ++i) {
        M[0][i] = 1.0;
        M[1][i] = a[i];
        for (std::size_t k = 0; k < etas.size(); ++k) M[2 + k][i] = 1.0 / (etas[k] - a[i]);
        for (std::size_t l = 0; l < thetas.size(); ++l)
            M[2 + etas.size() + l][i] = 1.0 / (thetas[l] + a[i]);
    }
    return M;
}

// Independent assembly of the three-region equations, written directly from
// the continuity/smoothness and pole-moment conditions in the canonical
// (signed, anchored) variables. Cross-checks the block-structured solver.
PiecewiseExpSum reference_three_region(const MEJDParams& p, Complex alpha,
                                       double rho_low, double rho_mid,
                                       double rho_high, Complex gamma, double h,
                                       double H) {
    const RootSet low = find_roots(p, alpha + rho_low);
    const RootSet mid = find_roots(p, alpha + rho_mid);
    const RootSet high = find_roots(p, alpha + rho_high);
    const Complex Gg = levy_exponent(p, gamma);
    const Complex cL = alpha / (alpha + rho_low - Gg);
    const Complex c0 = alpha / (alpha + rho_mid - Gg);
    const Complex cU = alpha / (alpha + rho_high - Gg);
    const int nb = p.m() + 1, ng = p.n() + 1, S = nb + ng;

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2 * S, 2 * S);
    Eigen::VectorXcd b(2 * S);
    const int iWL = 0, iW0 = nb, iN0 = 2 * nb, iNU = 2 * nb + ng;
    std::vector<Complex> eb(nb), eg(ng);
    for (int i = 0; i < nb; ++i) eb[i] = std::exp(mid.betas[i] * (h - H));
    for (int j = 0; j < ng; ++j) eg[j] = std::exp(mid.gammas[j] * (H - h));
    int r = 0;
    // value continuity at h
    for (int i = 0; i < nb; ++i) A(r, iWL + i) = 1.0;
    for (int i = 0; i < nb; ++i) A(r, iW0 + i) = -eb[i];
    for (int j = 0; j < ng; ++j) A(r, iN0 + j) = -1.0;
    b(r++) = (c0 - cL) * std::exp(gamma * h);
    // derivative continuity at h
    for (int i = 0; i < nb; ++i) A(r, iWL + i) = low.betas[i];
    for (int i = 0; i < nb; ++i) A(r, iW0 + i) = -mid.betas[i] * eb[i];
    for (int j = 0; j < ng; ++j) A(r, iN0 + j) = -mid.gammas[j];
    b(r++) = (c0 - cL) * gamma * std::exp(gamma * h);
    for (int k = 0; k < p.m(); ++k) {
        const double eta = p.up_rates[k];
        for (int i = 0; i < nb; ++i) A(r, iWL + i) = 1.0 / (eta - low.betas[i]);
        for (int i = 0; i < nb; ++i) A(r, iW0 + i) = -eb[i] / (eta - mid.betas[i]);
        for (int j = 0; j < ng; ++j) A(r, iN0 + j) = -1.0 / (eta - mid.gammas[j]);
        b(r++) = (c0 - cL) * std::exp(gamma * h) / (eta - gamma);
    }
    for (int l = 0; l < p.n(); ++l) {
        const double th = p.down_rates[l];
        for (int i = 0; i < nb; ++i) A(r, iWL + i) = 1.0 / (th + low.betas[i]);
        for (int i = 0; i < nb; ++i) A(r, iW0 + i) = -eb[i] / (th + mid.betas[i]);
        for (int j = 0; j < ng; ++j) A(r, iN0 + j) = -1.0 / (th + mid.gammas[j]);
        b(r++) = (c0 - cL) * std::exp(gamma * h) / (th + gamma);
    }
    // value continuity at H
    for (int i = 0; i < nb; ++i) A(r, iW0 + i) = 1.0;
    for (int j = 0; j < ng; ++j) A(r, iN0 + j) = eg[j];
    for (int j = 0; j < ng; ++j) A(r, iNU + j) = -1.0;
    b(r++) = (cU - c0) * std::exp(gamma * H);
    // derivative continuity at H
    for (int i = 0; i < nb; ++i) A(r, iW0 + i) = mid.betas[i];
    for (int j = 0; j < ng; ++j) A(r, iN0 + j) = mid.gammas[j] * eg[j];
    for (int j = 0; j < ng; ++j) A(r, iNU + j) = -high.gammas[j];
    b(r++) = (cU - c0) * gamma * std::exp(gamma * H);
    for (int k = 0; k < p.m(); ++k) {
        const double eta = p.up_rates[k];
        for (int i = 0; i < nb; ++i) A(r, iW0 + i) = -1.0 / (eta - mid.betas[i]);
        for (int j = 0; j < ng; ++j) A(r, iN0 + j) = -eg[j] / (eta - mid.gammas[j]);
        for (int j = 0; j < ng; ++j) A(r, iNU + j) = 1.0 / (eta - high.gammas[j]);
        b(r++) = (c0 - cU) * std::exp(gamma * H) / (eta - gamma);
    }
    for (int l = 0; l < p.n(); ++l) {
        const double th = p.down_rates[l];
        for (int i = 0; i < nb; ++i) A(r, iW0 + i) = 1.0 / (th + mid.betas[i]);
        for (int j = 0; j < ng; ++j) A(r, iN0 + j) = eg[j] / (th + mid.gammas[j]);
        for (int j = 0; j < ng; ++j) A(r, iNU + j) = -1.0 / (th + high.gammas[j]);
        b(r++) = (cU - c0) * std::exp(gamma * H) / (th + gamma);
    }
    Eigen::VectorXcd q = A.partialPivLu().solve(b);

    PiecewiseExpSum w;
    w.h = h;
    w.H = H;
    w.gamma = gamma;
    w.const_low = cL;
    w.const_mid = c0;
    w.const_high = cU;
    for (int i = 0; i < nb; ++i) w.low.push_back({q(iWL + i), low.betas[i], h});
    for (int i = 0; i < nb; ++i) w.mid.push_back({q(iW0 + i), mid.betas[i], H});
    for (int j = 0; j < ng; ++j) w.mid.push_back({q(iN0 + j), mid.gammas[j], h});
    for (int j = 0; j < ng; ++j) w.high.push_back({q(iNU + j), high.gammas[j], H});
    return w;
}

}  // namespace

TEST_CASE("interval transform reproduces independently frozen values") {
    const auto w = interval_occupation_transform(kKou, Complex(3.0, 0.0), 1.0,
                                                 Complex(0.4, 0.0), -0.5, 0.5);
    // Frozen from a from-scratch solver validated by quadrature residuals and
    // a Carson-clock Monte Carlo run.
    const double xs[] = {-1.2, -0.2, 0.0, 0.3, 0.9};
    const double expected[] = {0.62486963, 0.71159028, 0.76951255, 0.89647754,
                               1.44378431};
    for (int i = 0; i < 5; ++i)
        CHECK(w.value(xs[i]).real() == doctest::Approx(expected[i]).epsilon(5e-8));
}

TEST_CASE("two-barrier transform reproduces independently frozen values") {
    const auto w = two_barrier_occupation_transform(kKou, Complex(3.0, 0.0), 2.0,
                                                    1.0, Complex(0.5, 0.0), -0.4, 0.6);
    const double xs[] = {-1.0, -0.1, 0.3, 1.1};
    const double expected[] = {0.37189360, 0.94464887, 1.14527428, 1.32545509};
    for (int i = 0; i < 4; ++i)
        CHECK(w.value(xs[i]).real() == doctest::Approx(expected[i]).epsilon(5e-8));
}

TEST_CASE("single-barrier closed form reproduces independently frozen values") {
    const auto w = single_barrier_occupation_transform(kKou, Complex(3.0, 0.0), 2.0,
                                                       1.0, Complex(0.5, 0.0), -0.4);
    const double xs[] = {-1.3, -0.5, 0.2, 1.4};
    const double expected[] = {0.31745651, 0.50230792, 0.84025065, 1.53378008};
    for (int i = 0; i < 4; ++i)
        CHECK(w.value(xs[i]).real() == doctest::Approx(expected[i]).epsilon(5e-8));
}

TEST_CASE("block solver matches an equation-by-equation reference assembly") {
    const Complex alpha(2.7, 0.0), gamma(0.35, 0.0);
    MEJDParams p = kKou;
    p.up_weights = {0.7, 0.3};
    p.up_rates = {4.0, 9.0};
    REQUIRE(validate(p).ok());
    const auto fast =
        two_barrier_occupation_transform(p, alpha, 1.7, 0.9, gamma, -0.6, 0.8);
    const auto ref = reference_three_region(p, alpha, 1.7, 0.0, 0.9, gamma, -0.6, 0.8);
    for (double x : {-1.4, -0.6 + 1e-9, -0.2, 0.1, 0.8 - 1e-9, 1.7})
        CHECK(std::abs(fast.value(x) - ref.value(x)) < 1e-10 * (1.0 + std::abs(ref.value(x))));

    const auto fast2 = interval_occupation_transform(p, alpha, 1.3, gamma, -0.6, 0.8);
    const auto ref2 = reference_three_region(p, alpha, 0.0, 1.3, 0.0, gamma, -0.6, 0.8);
    for (double x : {-1.4, -0.3, 0.5, 1.7})
        CHECK(std::abs(fast2.value(x) - ref2.value(x)) <
              1e-10 * (1.0 + std::abs(ref2.value(x))));
}

TEST_CASE("rho -> 0 degenerates to the tilt Carson transform") {
    const Complex alpha(3.0, 0.0), gamma(0.4, 0.0);
    const auto wi =
        interval_occupation_transform(kKou, alpha, 1e-10, gamma, -0.5, 0.5);
    const auto wb = two_barrier_occupation_transform(kKou, alpha, 1e-10, 1e-10,
                                                     gamma, -0.5, 0.5);
    for (int i = 0; i <= 20; ++i) {
        const double x = -2.0 + 4.0 * i / 20.0;
        const Complex ref = carson_reference(kKou, alpha, gamma, x);
        CHECK(std::abs(wi.value(x) - ref) <= 1e-6 * std::abs(ref));
        CHECK(std::abs(wb.value(x) - ref) <= 1e-6 * std::abs(ref));
    }
}

TEST_CASE("equal single-barrier rates collapse to a shifted clock") {
    const Complex alpha(3.0, 0.0), gamma(0.3, 0.0);
    const double rho = 1.4;
    const auto w =
        single_barrier_occupation_transform(kKou, alpha, rho, rho, gamma, 0.2);
    for (double x : {-1.0, 0.0, 1.0}) {
        const Complex ref = alpha / (alpha + rho - levy_exponent(kKou, gamma)) *
                            std::exp(gamma * x);
        CHECK(std::abs(w.value(x) - ref) <= 1e-8 * std::abs(ref));
    }
}

TEST_CASE("two-barrier with a remote upper barrier matches the single-barrier form") {
    const Complex alpha(3.0, 0.0), gamma(0.0, 0.0);
    const double H = 50.0 / kKou.up_rates.front();
    const auto wide =
        two_barrier_occupation_transform(kKou, alpha, 1.0, 1e-10, gamma, -0.3, H);
    const auto single =
        single_barrier_occupation_transform(kKou, alpha, 1.0, 0.0, gamma, -0.3);
    for (double x : {-1.2, -0.3 + 1e-8, 0.0, 1.5})
        CHECK(std::abs(wide.value(x) - single.value(x)) < 1e-5);
}

TEST_CASE("corollary equals the narrow-interval two-barrier solve") {
    const Complex alpha(3.0, 0.0), gamma(0.5, 0.0);
    const double h = -0.4;
    const auto narrow = two_barrier_occupation_transform(kKou, alpha, 2.0, 1.0,
                                                         gamma, h, h + 1e-4);
    const auto closed =
        single_barrier_occupation_transform(kKou, alpha, 2.0, 1.0, gamma, h);
    for (double x : {-1.5, -0.6, -0.2, 0.4, 1.3}) {
        if (std::abs(x - h) <= 1e-2) continue;
        CHECK(std::abs(narrow.value(x) - closed.value(x)) <=
              1e-3 * std::abs(closed.value(x)));
    }
}

TEST_CASE("residual check vanishes on solutions and catches perturbations") {
    const Complex alpha(3.0, 0.0), gamma(0.4, 0.0);
    auto w = interval_occupation_transform(kKou, alpha, 1.0, gamma, -0.5, 0.5);
    std::vector<double> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(-2.3 + 4.4 * i / 99.0);
    for (double& x : xs) {
        if (std::abs(x + 0.5) < 1e-5) x += 1e-4;
        if (std::abs(x - 0.5) < 1e-5) x += 1e-4;
    }
    const RhoProfile profile{0.0, 1.0, 0.0};
    CHECK(residual_check(w, kKou, alpha, profile, gamma, xs) <= 1e-10);

    w.low[0].coef *= 1.01;
    CHECK(residual_check(w, kKou, alpha, profile, gamma, xs) > 1e-3);
}

TEST_CASE("large rho matches the exit-problem composition inside the interval") {
    const Complex alpha(2.0, 0.0);
    const double rho = 1e6, h = -0.5, H = 0.5;
    const auto w =
        interval_occupation_transform(kKou, alpha, rho, Complex(0.0), h, H);

    // Exact decomposition at the first exit from (h, H): value inside equals
    // alpha/(alpha+rho) (1 - E e^{-(alpha+rho) tau}) + E[e^{-(alpha+rho) tau} w(X_tau)].
    const Complex arho = alpha + rho;
    const auto roots = find_roots(kKou, arho);
    const auto ones = BoundaryFunctional::constant(1.0);
    const auto exit1 = two_sided_exit(kKou, arho, h, H, ones, roots);

    std::vector<Complex> rhs;
    rhs.push_back(w.value_region(2, H));
    for (double eta : kKou.up_rates) {
        Complex v = w.const_high * std::exp(w.gamma * H) / (eta - w.gamma);
        for (const ExpTerm& t : w.high) v += t.coef / (eta - t.rate);
        rhs.push_back(v);
    }
    rhs.push_back(w.value_region(0, h));
    for (double th : kKou.down_rates) {
        Complex v = w.const_low * std::exp(w.gamma * h) / (th + w.gamma);
        for (const ExpTerm& t : w.low) v += t.coef / (th + t.rate);
        rhs.push_back(v);
    }
    const auto exit2 = two_sided_exit_with_rhs(kKou, arho, h, H, roots, rhs);

    for (double x : {-0.3, 0.0, 0.25}) {
        const Complex composed = alpha / arho * (1.0 - exit1.evaluate(x)) +
                                 exit2.evaluate(x);
        CHECK(std::abs(w.value(x) - composed) < 1e-3 * (1.0 + std::abs(composed)));
    }
}

TEST_CASE("continuity and smoothness at the barriers") {
    const Complex alpha(3.0, 0.0), gamma(0.4, 0.0);
    const auto w = two_barrier_occupation_transform(kKou, alpha, 2.0, 1.0, gamma,
                                                    -0.4, 0.6);
    for (double b : {-0.4, 0.6}) {
        const int left = b == -0.4 ? 0 : 1;
        const Complex vl = w.value_region(left, b);
        const Complex vr = w.value_region(left + 1, b);
        CHECK(std::abs(vl - vr) <= 1e-9 * (1.0 + std::abs(vl)));
        const Complex dl = w.derivative_region(left, b);
        const Complex dr = w.derivative_region(left + 1, b);
        CHECK(std::abs(dl - dr) <= 1e-7 * (1.0 + std::abs(dl)));
    }
}

TEST_CASE("transforms shrink as occupation rates grow and respect the tilt bound") {
    const Complex alpha(3.0, 0.0), gamma(0.4, 0.0);
    std::vector<double> rhos = {0.2, 0.7, 1.5, 4.0};
    double prev[3] = {1e300, 1e300, 1e300};
    const double xs[3] = {-1.0, 0.0, 0.8};
    for (double rho : rhos) {
        const auto w =
            interval_occupation_transform(kKou, alpha, rho, gamma, -0.5, 0.5);
        for (int i = 0; i < 3; ++i) {
            const double v = w.value(xs[i]).real();
            CHECK(v > 0.0);
            CHECK(v <= carson_reference(kKou, alpha, gamma, xs[i]).real() * (1.0 + 1e-12));
            CHECK(v < prev[i] * (1.0 + 1e-12));
            prev[i] = v;
        }
    }
}

TEST_CASE("closed-form determinant matches direct elimination") {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Smallest printed-size case first.
    const std::vector<double> etas1 = {2.0}, thetas1 = {3.0};
    const std::vector<double> a1 = {0.5, 1.3, -0.7, -2.2};
    const double closed = cauchy_determinant(etas1, thetas1, a1);
    const double direct = direct_det(cauchy_matrix(etas1, thetas1, a1));
    CHECK(closed == doctest::Approx(direct).epsilon(1e-10));

    // Swapping two a-columns flips the sign; a repeated column kills it.
    std::vector<double> a_swapped = {1.3, 0.5, -0.7, -2.2};
    CHECK(cauchy_determinant(etas1, thetas1, a_swapped) ==
          doctest::Approx(-closed).epsilon(1e-10));
    CHECK(cauchy_determinant(etas1, thetas1, {0.5, 0.5, -0.7, -2.2}) ==
          doctest::Approx(0.0));

    for (int trial = 0; trial < 40; ++trial) {
        const int m = static_cast<int>(u(g) * 4), n = static_cast<int>(u(g) * 4);
        const int S = m + n + 2;
        if (S > 8) continue;
        std::vector<double> etas, thetas, a;
        for (int i = 0; i < m; ++i) etas.push_back(3.0 + 2.0 * i + u(g));
        for (int j = 0; j < n; ++j) thetas.push_back(2.5 + 2.0 * j + u(g));
        for (int i = 0; i < S; ++i) a.push_back(-2.0 + 4.0 * u(g));
        bool clash = false;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j)
                clash = clash || std::abs(a[i] - a[j]) < 1e-3;
        if (clash) continue;
        const double want = direct_det(cauchy_matrix(etas, thetas, a));
        const double got = cauchy_determinant(etas, thetas, a);
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("admissible real instances keep the system well conditioned") {
    std::mt19937_64 g(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        MEJDParams p = kKou;
        p.mu = -0.3 + 0.6 * u(g);
        p.sigma = 0.2 + 0.3 * u(g);
        p.lambda = 0.3 + u(g);
        const double gamma = 0.8 * u(g);
        const double galpha =
            levy_exponent(p, Complex(gamma, 0.0)).real();
        const Complex alpha(std::max(0.0, galpha) + 0.6 + 3.0 * u(g), 0.0);
        const double h = -1.0 + 0.6 * u(g), H = 0.2 + u(g);
        OccupationSystem sys;
        const auto w = interval_occupation_transform(p, alpha, 0.4 + 2.0 * u(g),
                                                     Complex(gamma, 0.0), h, H, &sys);
        CHECK(std::isfinite(sys.condition));
        CHECK(sys.condition < 1e12);
        CHECK(std::isfinite(w.value(0.5 * (h + H)).real()));
    }
}
