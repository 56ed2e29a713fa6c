#include "occ/pricing.hpp"

#include <cmath>
#include <memory>

#include "occ/errors.hpp"
#include "occ/occupation.hpp"

namespace occ {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

void require_risk_neutral(const MEJDParams& p, double r) {
    require(p.sigma > 0.0, "pricing requires sigma > 0");
    const double g1 = levy_exponent(p, Complex(1.0, 0.0)).real();
    if (std::abs(g1 - r) > 1e-8)
        throw DomainError("params are not risk-neutral: G(1) != r");
}

// One-slot cache: the iterated inverters sweep many inner nodes per outer
// node, and root sets plus factorizations depend only on the outer argument.
template <class Solver>
class PerAlphaCache {
public:
    template <class Make>
    const Solver& get(Complex alpha, Make&& make) const {
        if (!solver_ || alpha != alpha_) {
            solver_ = std::make_unique<Solver>(make(alpha));
            alpha_ = alpha;
        }
        return *solver_;
    }

private:
    mutable Complex alpha_{0.0, 0.0};
    mutable std::unique_ptr<Solver> solver_;
};

Complex step_kernel(const StepCall& s, Complex alpha, Complex beta,
                    const SingleBarrierSolver& solver) {
    const Complex altil = alpha + s.r;
    const Complex w = solver.at(beta + 1.0).value(0.0);
    return w / (altil * beta * (beta + 1.0));
}

double bounded_price_check(double price, double S0, bool s0_bounded) {
    if (!std::isfinite(price) || price < -1e-6 * S0 ||
        (s0_bounded && price > S0 * (1.0 + 1e-6)))
        throw NonConvergence("inverted price out of bounds: " + std::to_string(price));
    return price;
}

double outer_shift_for(const MEJDParams& p, double gamma_real, double r) {
    const double g = levy_exponent(p, Complex(gamma_real, 0.0)).real();
    return std::max(0.0, g - r) + 0.5;
}

}  // namespace

double carr_madan_beta0(const MEJDParams& p) {
    const double edge = p.min_rate() - 1.0;
    require(edge > 0.0, "pricing requires min(eta_1, theta_1) > 1");
    const double b0 = std::max(0.5, 0.75 * edge);
    require(b0 < edge, "strike contour does not fit inside the strip");
    return b0;
}

Complex vanilla_double_transform(const MEJDParams& p, double S0, double r,
                                 Complex alpha, Complex beta) {
    const Complex altil = alpha + r;
    const Complex g = levy_exponent(p, beta + 1.0);
    return std::pow(Complex(S0), beta + 1.0) / (beta * (beta + 1.0) * (altil - g));
}

Complex step_double_transform(const MEJDParams& p, const StepCall& s, Complex alpha,
                              Complex beta) {
    require(s.S0 > 0.0 && s.K > 0.0 && s.L > 0.0 && s.rho >= 0.0, "bad step spec");
    const Complex altil = alpha + s.r;
    const double hbar = std::log(s.L / s.S0);
    if (s.rho == 0.0) return vanilla_double_transform(p, s.S0, s.r, alpha, beta);
    SingleBarrierSolver solver(p, altil, Complex(s.rho), Complex(0.0), hbar);
    return std::pow(Complex(s.S0), beta + 1.0) * step_kernel(s, alpha, beta, solver);
}

Complex double_step_double_transform(const MEJDParams& p, const DoubleStepCall& s,
                                     Complex alpha, Complex beta) {
    require(s.S0 > 0.0 && s.K > 0.0 && s.L > 0.0 && s.rho_minus >= 0.0 &&
                s.rho_plus >= 0.0,
            "bad double-step spec");
    if (!(s.L < s.U)) throw BarrierOrder("double-step requires L < U");
    const Complex altil = alpha + s.r;
    if (s.rho_minus == 0.0 && s.rho_plus == 0.0)
        return vanilla_double_transform(p, s.S0, s.r, alpha, beta);
    ThreeRegionSolver solver(p, altil, {s.rho_minus, 0.0, s.rho_plus},
                             std::log(s.L / s.S0), std::log(s.U / s.S0));
    const Complex w = solver.at(beta + 1.0).value(0.0);
    return std::pow(Complex(s.S0), beta + 1.0) * w / (altil * beta * (beta + 1.0));
}

Complex quantile_double_transform(const MEJDParams& p, const QuantileCall& s,
                                  Complex alpha, Complex rho) {
    require(s.S0 > 0.0 && s.K > 0.0 && s.lambda_q > 0.0, "bad quantile spec");
    const Complex altil = alpha + s.r;
    const double lam = s.lambda_q;
    // Occupation transform below the zero barrier at the rho-shifted clock;
    // the strike integral of P(q > y) = P(time below y <= upsilon) turns its
    // exponential sums into the two branches below.
    SingleBarrierSolver sb(p, altil, rho, Complex(0.0), 0.0);
    const PiecewiseExpSum w = sb.at(Complex(0.0));
    if (s.K >= s.S0) {
        const double lnm = std::log(s.S0 / s.K);
        Complex sum(0.0);
        for (const ExpTerm& t : w.low)
            sum += t.coef * std::exp(t.rate / lam * lnm) / (t.rate - lam);
        return lam * s.K / (rho * altil) * sum;
    }
    Complex sum(0.0);
    for (const ExpTerm& t : w.low) sum += t.coef / (t.rate - lam);
    const double lnm = std::log(s.S0 / s.K);
    for (const ExpTerm& t : w.high)
        sum += t.coef * (1.0 - (s.K / s.S0) * std::exp(t.rate / lam * lnm)) /
               (lam - t.rate);
    return lam * s.S0 / (rho * altil) * sum +
           (s.S0 - s.K) / (altil * (altil + rho));
}

namespace {

double price_step(const MEJDParams& p, const StepCall& s, const InversionConfig& cfg) {
    require(s.T > 0.0 && s.r >= 0.0, "bad step spec");
    require_risk_neutral(p, s.r);
    const double beta0 = carr_madan_beta0(p);
    // Normalize S0 to 1 (price homogeneity) so contour magnitudes stay O(1).
    StepCall ns = s;
    ns.S0 = 1.0;
    ns.K = s.K / s.S0;
    ns.L = s.L / s.S0;
    const double kbar = -std::log(ns.K);
    PerAlphaCache<SingleBarrierSolver> cache;
    auto F = [&](Complex alpha, Complex beta) {
        if (ns.rho == 0.0) return vanilla_double_transform(p, 1.0, s.r, alpha, beta);
        const auto& solver = cache.get(alpha, [&](Complex a) {
            return SingleBarrierSolver(p, a + s.r, Complex(ns.rho), Complex(0.0),
                                       std::log(ns.L));
        });
        return step_kernel(ns, alpha, beta, solver);
    };
    const double shift = outer_shift_for(p, beta0 + 1.0, s.r);
    const double pr = s.S0 * invert_double_bilateral(F, s.T, kbar,
                                                     {beta0, p.min_rate() - 1.0}, cfg,
                                                     shift);
    return bounded_price_check(pr, s.S0, true);
}

double price_double_step(const MEJDParams& p, const DoubleStepCall& s,
                         const InversionConfig& cfg) {
    require(s.T > 0.0 && s.r >= 0.0, "bad double-step spec");
    if (!(s.L < s.U)) throw BarrierOrder("double-step requires L < U");
    require_risk_neutral(p, s.r);
    const double beta0 = carr_madan_beta0(p);
    DoubleStepCall ns = s;
    ns.S0 = 1.0;
    ns.K = s.K / s.S0;
    ns.L = s.L / s.S0;
    ns.U = s.U / s.S0;
    const double kbar = -std::log(ns.K);
    PerAlphaCache<ThreeRegionSolver> cache;
    auto F = [&](Complex alpha, Complex beta) -> Complex {
        if (ns.rho_minus == 0.0 && ns.rho_plus == 0.0)
            return vanilla_double_transform(p, 1.0, s.r, alpha, beta);
        const auto& solver = cache.get(alpha, [&](Complex a) {
            return ThreeRegionSolver(p, a + s.r, {ns.rho_minus, 0.0, ns.rho_plus},
                                     std::log(ns.L), std::log(ns.U));
        });
        const Complex altil = alpha + s.r;
        return solver.at(beta + 1.0).value(0.0) / (altil * beta * (beta + 1.0));
    };
    const double shift = outer_shift_for(p, beta0 + 1.0, s.r);
    const double pr = s.S0 * invert_double_bilateral(F, s.T, kbar,
                                                     {beta0, p.min_rate() - 1.0}, cfg,
                                                     shift);
    return bounded_price_check(pr, s.S0, true);
}

double price_quantile(const MEJDParams& p, const QuantileCall& s,
                      const InversionConfig& cfg) {
    require(s.T > 0.0 && s.r >= 0.0, "bad quantile spec");
    require(s.upsilon_frac > 0.0 && s.upsilon_frac < 1.0,
            "quantile fraction must be inside (0, 1)");
    require(p.has_up_jumps() ? s.lambda_q < p.up_rates.front() : true,
            "lambda_q must stay below eta_1");
    require_risk_neutral(p, s.r);
    const double upsilon = s.upsilon_frac * s.T;
    auto F = [&](Complex alpha, Complex rho) {
        return quantile_double_transform(p, s, alpha, rho);
    };
    const double shift = outer_shift_for(p, s.lambda_q, s.r);
    const double pr = invert_double(F, s.T, upsilon, cfg, shift);
    // A quantile call is not dominated by S_T, so only sanity bounds apply.
    return bounded_price_check(pr, s.S0, false);
}

}  // namespace

double price(const MEJDParams& p, const OptionSpec& spec, const InversionConfig& cfg) {
    cfg.check();
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, StepCall>) return price_step(p, s, cfg);
            else if constexpr (std::is_same_v<T, DoubleStepCall>)
                return price_double_step(p, s, cfg);
            else
                return price_quantile(p, s, cfg);
        },
        spec);
}

double vanilla_price(const MEJDParams& p, double S0, double K, double r, double T,
                     const InversionConfig& cfg) {
    StepCall s{S0, K, /*L=*/S0 * 1e-9, /*rho=*/0.0, r, T};
    return price_step(p, s, cfg);
}

}  // namespace occ
