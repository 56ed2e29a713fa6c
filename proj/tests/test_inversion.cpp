#include <doctest.h>

#include <cmath>

#include "occ/errors.hpp"
#include "occ/inversion.hpp"
#include "occ/params.hpp"

using namespace occ;

namespace {
const MEJDParams kKou = kou_params(0.1, 0.3, 1.0, 0.5, 5.0, 4.0);
}

TEST_CASE("exponential Carson pair") {
    const double g0 = 0.3;
    const auto carson = [g0](Complex a) { return a / (a - g0); };
    InversionConfig cfg;
    // Contour shifted right of the transform's singularity, as in pricing.
    const double got = invert_carson(carson, 1.0, cfg, g0 + 0.5);
    CHECK(got == doctest::Approx(std::exp(0.3)).epsilon(1e-8));
    for (double T : {0.1, 0.7, 2.0}) {
        const double v = invert_carson(carson, T, cfg, g0 + 0.5);
        CHECK(v == doctest::Approx(std::exp(g0 * T)).epsilon(5e-7));
    }
}

TEST_CASE("ramp Carson pair") {
    InversionConfig cfg;
    const auto carson = [](Complex a) { return 1.0 / a; };  // alpha * (1/alpha^2)
    const double got = invert_carson(carson, 2.0, cfg, 0.5);
    CHECK(got == doctest::Approx(2.0).epsilon(5e-9));
}

TEST_CASE("model-driven Carson pair recovers exp(G(gamma) T)") {
    const Complex gamma(0.5, 0.0);
    const Complex Gg = levy_exponent(kKou, gamma);
    const auto carson = [&](Complex a) { return a / (a - Gg); };
    InversionConfig cfg;
    const double got = invert_carson(carson, 0.7, cfg, Gg.real() + 0.5);
    CHECK(got == doctest::Approx(std::exp(Gg.real() * 0.7)).epsilon(1e-6));
}

TEST_CASE("euler and gaver-stehfest agree on smooth real transforms") {
    const double g0 = 0.3;
    InversionConfig cfg;
    const double e = invert_carson([g0](Complex a) { return a / (a - g0); }, 1.2,
                                   cfg, g0 + 0.5);
    const double gs = gaver_stehfest_carson(
        [g0](double a) { return a / (a - g0); }, 1.2, cfg.gs_terms);
    CHECK(std::abs(e - gs) <= 1e-4 * std::abs(e));

    InversionConfig gcfg;
    gcfg.method = InversionMethod::gaver_stehfest;
    const double gs2 = invert_carson([g0](Complex a) { return a / (a - g0); }, 1.2, gcfg);
    CHECK(gs2 == doctest::Approx(gs).epsilon(1e-13));
}

TEST_CASE("separable 2-D pair") {
    InversionConfig cfg;
    const auto F = [](Complex a, Complex b) { return 1.0 / ((a - 1.0) * (b + 2.0)); };
    const double got = invert_double(F, 0.5, 0.3, cfg, 1.5);
    CHECK(got == doctest::Approx(std::exp(0.5 - 0.6)).epsilon(1e-6));
}

TEST_CASE("product ramp 2-D pair") {
    InversionConfig cfg;
    const auto F = [](Complex a, Complex b) { return 1.0 / (a * a * b * b); };
    const double got = invert_double(F, 1.0, 1.0, cfg, 0.5);
    CHECK(got == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bilateral inversion recovers a two-sided original") {
    // f(k) = e^{k} for k <= 0, e^{-2k} for k > 0:
    // F(beta) = 1/(1+beta) + 1/(beta+2) on 0 < Re beta < ... with decay from
    // the left tail rate 1.
    InversionConfig cfg;
    const auto F = [](Complex, Complex b) { return 1.0 / (1.0 + b) + 1.0 / (b + 2.0); };
    // Make the outer dimension trivial: multiply by a known T-pair.
    const auto F2 = [&](Complex a, Complex b) { return F(a, b) / (a + 1.0); };
    BilateralContour contour{0.45, 0.95};
    for (double k : {-0.8, -0.2, 0.0, 0.4, 1.1}) {
        const double expect = std::exp(-1.0) * (k <= 0.0 ? std::exp(k) : std::exp(-2.0 * k));
        const double got = invert_double_bilateral(F2, 1.0, k, contour, cfg, 0.0);
        CHECK(got == doctest::Approx(expect).epsilon(2e-5));
    }
}

TEST_CASE("inversion is deterministic") {
    InversionConfig cfg;
    const auto carson = [](Complex a) { return a / (a - 0.3); };
    const double a = invert_carson(carson, 1.0, cfg, 0.8);
    const double b = invert_carson(carson, 1.0, cfg, 0.8);
    CHECK(a == b);
}

TEST_CASE("configuration validation") {
    InversionConfig cfg;
    cfg.euler_m = 5;
    CHECK_THROWS_AS(cfg.check(), DomainError);
    cfg = InversionConfig{};
    cfg.gs_terms = 13;
    CHECK_THROWS_AS(cfg.check(), DomainError);
    cfg = InversionConfig{};
    cfg.gs_terms = 20;
    CHECK_THROWS_AS(cfg.check(), DomainError);
    cfg = InversionConfig{};
    CHECK_THROWS_AS((void)invert_carson([](Complex a) { return 1.0 / a; }, -1.0, cfg),
                    DomainError);
}

TEST_CASE("a singularity right of the contour is reported, not silently wrong") {
    InversionConfig cfg;
    const auto carson = [](Complex a) { return a / (a - 30.0); };  // f = e^{30 T}
    CHECK_THROWS_AS((void)invert_carson(carson, 1.0, cfg, 0.0), NonConvergence);
}
