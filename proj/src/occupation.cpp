#include "occ/occupation.hpp"

#include <cmath>
#include <limits>

#include "occ/errors.hpp"

namespace occ {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Complex cexp(Complex z) { return std::exp(z); }

// (e^{zL} - 1) / z, for |zL| small enough that e^{zL} cannot overflow.
Complex expm1_over(Complex z, double L) {
    const Complex zl = z * L;
    if (std::abs(zl) < 1e-5)
        return L * (1.0 + zl / 2.0 + zl * zl / 6.0 + zl * zl * zl / 24.0);
    return (cexp(zl) - 1.0) / z;
}

bool is_real(Complex z) { return std::abs(z.imag()) <= 1e-13 * (1.0 + std::abs(z.real())); }

// Cauchy-type S x S block with rows (1; a_i; 1/(eta_k - a_i); 1/(theta_l + a_i)).
Eigen::MatrixXcd cauchy_block(const std::vector<Complex>& args,
                              const std::vector<double>& etas,
                              const std::vector<double>& thetas) {
    const int S = static_cast<int>(args.size());
    Eigen::MatrixXcd A(S, S);
    for (int i = 0; i < S; ++i) {
        A(0, i) = Complex(1.0);
        A(1, i) = args[i];
        for (std::size_t k = 0; k < etas.size(); ++k)
            A(2 + k, i) = 1.0 / (etas[k] - args[i]);
        for (std::size_t l = 0; l < thetas.size(); ++l)
            A(2 + etas.size() + l, i) = 1.0 / (thetas[l] + args[i]);
    }
    return A;
}

Eigen::VectorXcd boundary_vector(Complex gamma, double at,
                                 const std::vector<double>& etas,
                                 const std::vector<double>& thetas) {
    const int S = static_cast<int>(etas.size() + thetas.size() + 2);
    Eigen::VectorXcd v(S);
    const Complex e = cexp(gamma * at);
    v(0) = e;
    v(1) = gamma * e;
    for (std::size_t k = 0; k < etas.size(); ++k) v(2 + k) = e / (etas[k] - gamma);
    for (std::size_t l = 0; l < thetas.size(); ++l)
        v(2 + etas.size() + l) = e / (thetas[l] + gamma);
    return v;
}

void check_gamma_strip(const MEJDParams& p, Complex gamma) {
    const double g = gamma.real();
    if (g < 0.0 || g >= p.min_rate())
        throw DomainError("gamma real part outside [0, min rate)");
}

Complex carson_constant(Complex alpha, Complex rho, Complex Ggamma) {
    const Complex den = alpha + rho - Ggamma;
    if (std::abs(den) < 1e-12 * (1.0 + std::abs(alpha)))
        throw DomainError("G(gamma) coincides with a region killing rate");
    return alpha / den;
}

}  // namespace

Complex PiecewiseExpSum::value_region(int region, double x) const {
    const std::vector<ExpTerm>& terms = region == 0 ? low : (region == 1 ? mid : high);
    const Complex c = region == 0 ? const_low : (region == 1 ? const_mid : const_high);
    Complex v = c * cexp(gamma * x);
    for (const ExpTerm& t : terms) v += t.at(x);
    return v;
}

Complex PiecewiseExpSum::derivative_region(int region, double x) const {
    const std::vector<ExpTerm>& terms = region == 0 ? low : (region == 1 ? mid : high);
    const Complex c = region == 0 ? const_low : (region == 1 ? const_mid : const_high);
    Complex v = c * gamma * cexp(gamma * x);
    for (const ExpTerm& t : terms) v += t.d_at(x);
    return v;
}

Complex PiecewiseExpSum::second_derivative_region(int region, double x) const {
    const std::vector<ExpTerm>& terms = region == 0 ? low : (region == 1 ? mid : high);
    const Complex c = region == 0 ? const_low : (region == 1 ? const_mid : const_high);
    Complex v = c * gamma * gamma * cexp(gamma * x);
    for (const ExpTerm& t : terms) v += t.rate * t.rate * t.at(x);
    return v;
}

ThreeRegionSolver::ThreeRegionSolver(const MEJDParams& p, Complex alpha,
                                     const RhoProfile& rho, double h, double H)
    : p_(p), alpha_(alpha), rho_(rho), h_(h), H_(H) {
    if (!(h < H)) throw DomainError("three-region transform requires h < H");
    if (rho.low < 0.0 || rho.mid < 0.0 || rho.high < 0.0)
        throw DomainError("negative occupation rate");

    low_ = find_roots(p_, alpha + rho.low);
    mid_ = (rho.mid == rho.low) ? low_ : find_roots(p_, alpha + rho.mid);
    high_ = (rho.high == rho.low)
                ? low_
                : (rho.high == rho.mid ? mid_ : find_roots(p_, alpha + rho.high));

    const int nb = p_.m() + 1, ng = p_.n() + 1;
    const int S = nb + ng;

    std::vector<Complex> argsM(low_.betas);
    argsM.insert(argsM.end(), mid_.gammas.begin(), mid_.gammas.end());
    std::vector<Complex> argsN(high_.gammas);
    argsN.insert(argsN.end(), mid_.betas.begin(), mid_.betas.end());

    sys_.M = cauchy_block(argsM, p_.up_rates, p_.down_rates);
    sys_.N = cauchy_block(argsN, p_.up_rates, p_.down_rates);
    sys_.Zbeta = Eigen::VectorXcd::Zero(S);
    sys_.Zgamma = Eigen::VectorXcd::Zero(S);
    for (int i = 0; i < nb; ++i) sys_.Zbeta(ng + i) = cexp(mid_.betas[i] * (h - H));
    for (int j = 0; j < ng; ++j) sys_.Zgamma(nb + j) = cexp(mid_.gammas[j] * (H - h));

    sys_.B.resize(2 * S, 2 * S);
    sys_.B.topLeftCorner(S, S) = sys_.M;
    sys_.B.topRightCorner(S, S) = sys_.N * sys_.Zbeta.asDiagonal();
    sys_.B.bottomLeftCorner(S, S) = sys_.M * sys_.Zgamma.asDiagonal();
    sys_.B.bottomRightCorner(S, S) = sys_.N;

    lu_.compute(sys_.B);
    const Eigen::MatrixXcd inv = lu_.solve(Eigen::MatrixXcd::Identity(2 * S, 2 * S));
    double nb1 = 0.0, ni1 = 0.0;
    for (int j = 0; j < 2 * S; ++j) {
        nb1 = std::max(nb1, sys_.B.col(j).cwiseAbs().sum());
        ni1 = std::max(ni1, inv.col(j).cwiseAbs().sum());
    }
    sys_.condition = nb1 * ni1;
    if (!inv.allFinite() || sys_.condition > 1e12)
        throw SingularSystem("occupation system condition estimate " +
                             std::to_string(sys_.condition));
}

PiecewiseExpSum ThreeRegionSolver::at(Complex gamma) const {
    check_gamma_strip(p_, gamma);
    const Complex Gg = levy_exponent(p_, gamma);
    if (is_real(alpha_) && gamma.imag() == 0.0 && !(Gg.real() < alpha_.real()))
        throw DomainError("need G(gamma) < alpha");
    const Complex cL_star = carson_constant(alpha_, rho_.low, Gg);
    const Complex c0_star = carson_constant(alpha_, rho_.mid, Gg);
    const Complex cU_star = carson_constant(alpha_, rho_.high, Gg);

    const int nb = p_.m() + 1, ng = p_.n() + 1;
    const int S = nb + ng;
    Eigen::VectorXcd V(2 * S);
    // Paper-sense constants c_R = -c_R^* enter the right-hand side.
    V.head(S) = (c0_star - cL_star) * boundary_vector(gamma, h_, p_.up_rates, p_.down_rates);
    V.tail(S) = (c0_star - cU_star) * boundary_vector(gamma, H_, p_.up_rates, p_.down_rates);

    Eigen::VectorXcd Q = lu_.solve(V);
    const double vn = V.cwiseAbs().maxCoeff();
    const double res = (sys_.B * Q - V).cwiseAbs().maxCoeff() / (vn > 0.0 ? vn : 1.0);
    if (!Q.allFinite() || res > 1e-9)
        throw SingularSystem("occupation solve residual " + std::to_string(res));

    // Unknown order (omega^L, nu^0 | nu^U, omega^0); the leading minus signs
    // of the middle region are folded into the stored coefficients.
    PiecewiseExpSum w;
    w.h = h_;
    w.H = H_;
    w.gamma = gamma;
    w.const_low = cL_star;
    w.const_mid = c0_star;
    w.const_high = cU_star;
    for (int i = 0; i < nb; ++i) w.low.push_back({Q(i), low_.betas[i], h_});
    for (int j = 0; j < ng; ++j) w.mid.push_back({-Q(nb + j), mid_.gammas[j], h_});
    for (int j = 0; j < ng; ++j) w.high.push_back({Q(S + j), high_.gammas[j], H_});
    for (int i = 0; i < nb; ++i) w.mid.push_back({-Q(S + ng + i), mid_.betas[i], H_});
    return w;
}

SingleBarrierSolver::SingleBarrierSolver(const MEJDParams& p, Complex alpha,
                                         Complex rho1, Complex rho2, double h)
    : p_(p), alpha_(alpha), rho1_(rho1), rho2_(rho2), h_(h) {
    if (rho1.real() < 0.0 || rho2.real() < 0.0 ||
        (rho1 == Complex(0.0) && rho2 == Complex(0.0)))
        throw DomainError("single-barrier transform needs max(rho1, rho2) > 0");
    below_ = find_roots(p_, alpha + rho1);
    above_ = (rho2 == rho1) ? below_ : find_roots(p_, alpha + rho2);
}

PiecewiseExpSum SingleBarrierSolver::at(Complex gamma) const {
    check_gamma_strip(p_, gamma);
    const Complex Gg = levy_exponent(p_, gamma);
    if (is_real(alpha_) && gamma.imag() == 0.0 && !(Gg.real() < alpha_.real()))
        throw DomainError("need G(gamma) < alpha");
    const Complex c1_star = carson_constant(alpha_, rho1_, Gg);
    const Complex c2_star = carson_constant(alpha_, rho2_, Gg);

    const int nb = p_.m() + 1, ng = p_.n() + 1;
    const int S = nb + ng;
    std::vector<Complex> a(below_.betas);
    a.insert(a.end(), above_.gammas.begin(), above_.gammas.end());

    // Explicit inverse of the Cauchy-type system against the tilt column:
    // y_i = prod_{j!=i}(a_j - g) prod_k (eta_k - a_i) prod_l (theta_l + a_i)
    //     / [prod_{j!=i}(a_j - a_i) prod_k (eta_k - g) prod_l (theta_l + g)].
    const Complex scale = (c2_star - c1_star) * cexp(gamma * h_);
    PiecewiseExpSum w;
    w.h = h_;
    w.H = h_;
    w.gamma = gamma;
    w.const_low = c1_star;
    w.const_mid = Complex(0.0);
    w.const_high = c2_star;
    for (int i = 0; i < S; ++i) {
        Complex num(1.0), den(1.0);
        for (int j = 0; j < S; ++j) {
            if (j == i) continue;
            num *= (a[j] - gamma);
            den *= (a[j] - a[i]);
        }
        for (double eta : p_.up_rates) {
            num *= (eta - a[i]);
            den *= (eta - gamma);
        }
        for (double th : p_.down_rates) {
            num *= (th + a[i]);
            den *= (th + gamma);
        }
        if (den == Complex(0.0)) throw SingularSystem("coincident roots in closed form");
        const Complex y = scale * num / den;
        if (i < nb)
            w.low.push_back({y, below_.betas[i], h_});
        else
            w.high.push_back({-y, above_.gammas[i - nb], h_});
    }
    return w;
}

PiecewiseExpSum interval_occupation_transform(const MEJDParams& p, Complex alpha,
                                              double rho, Complex gamma, double h,
                                              double H, OccupationSystem* sys) {
    if (rho < 0.0) throw DomainError("negative rho");
    ThreeRegionSolver solver(p, alpha, {0.0, rho, 0.0}, h, H);
    if (sys) *sys = solver.system();
    return solver.at(gamma);
}

PiecewiseExpSum two_barrier_occupation_transform(const MEJDParams& p, Complex alpha,
                                                 double rho1, double rho2,
                                                 Complex gamma, double h, double H,
                                                 OccupationSystem* sys) {
    ThreeRegionSolver solver(p, alpha, {rho1, 0.0, rho2}, h, H);
    if (sys) *sys = solver.system();
    return solver.at(gamma);
}

PiecewiseExpSum single_barrier_occupation_transform(const MEJDParams& p,
                                                    Complex alpha, double rho1,
                                                    double rho2, Complex gamma,
                                                    double h) {
    return SingleBarrierSolver(p, alpha, rho1, rho2, h).at(gamma);
}

double cauchy_determinant(const std::vector<double>& etas,
                          const std::vector<double>& thetas,
                          const std::vector<double>& a) {
    const int m = static_cast<int>(etas.size());
    const int n = static_cast<int>(thetas.size());
    const int S = static_cast<int>(a.size());
    if (S != m + n + 2) throw DomainError("cauchy_determinant needs |a| = m + n + 2");

    std::vector<double> xi(etas);
    for (double th : thetas) xi.push_back(-th);

    double va = 1.0;
    for (int i = 0; i < S; ++i)
        for (int j = i + 1; j < S; ++j) va *= (a[i] - a[j]);
    double vxi = 1.0;
    for (std::size_t i = 0; i < xi.size(); ++i)
        for (std::size_t j = i + 1; j < xi.size(); ++j) vxi *= (xi[i] - xi[j]);
    double den = 1.0;
    for (double x : xi)
        for (double ai : a) {
            const double d = x - ai;
            if (d == 0.0) throw DomainError("a coincides with a pole");
            den *= d;
        }
    const int d = m - n;
    const int fl = d >= 0 ? d / 2 : -((-d + 1) / 2);  // floor(d / 2)
    const double sign = (fl % 2 == 0) ? -1.0 : 1.0;
    return sign * va * vxi / den;
}

namespace {

struct Segment {
    double lo, hi;
    int region;
    double rho;
};

std::vector<Segment> segments_of(const PiecewiseExpSum& w, const RhoProfile& rho) {
    if (w.single_barrier())
        return {{-kInf, w.h, 0, rho.low}, {w.h, kInf, 2, rho.high}};
    return {{-kInf, w.h, 0, rho.low}, {w.h, w.H, 1, rho.mid}, {w.H, kInf, 2, rho.high}};
}

// int_A^B coef e^{rate (u - anchor)} e^{-eta (u - x)} du with x <= A <= B.
// Every stored rate keeps its region exponent nonpositive over [A, B], so the
// difference form below never overflows.
Complex up_segment(const ExpTerm& t, double eta, double A, double B, double x) {
    const Complex z = t.rate - eta;
    const Complex damp = cexp(-eta * (A - x));
    if (B == kInf) return -t.coef * damp * cexp(t.rate * (A - t.anchor)) / z;
    const double L = B - A;
    if (std::abs(z) * L < 20.0)
        return t.coef * damp * cexp(t.rate * (A - t.anchor)) * expm1_over(z, L);
    const Complex term1 = cexp(t.rate * (B - t.anchor) - eta * (B - A));
    const Complex term2 = cexp(t.rate * (A - t.anchor));
    return t.coef * damp * (term1 - term2) / z;
}

// int_A^B coef e^{rate (u - anchor)} e^{theta (u - x)} du with A <= B <= x.
Complex down_segment(const ExpTerm& t, double theta, double A, double B, double x) {
    const Complex z = t.rate + theta;
    if (A == -kInf) return t.coef * cexp(theta * (B - x)) * cexp(t.rate * (B - t.anchor)) / z;
    const double L = B - A;
    if (std::abs(z) * L < 20.0) {
        const Complex em = (std::abs(z * L) < 1e-5)
                               ? Complex(L) * (1.0 - z * L / 2.0 + z * z * L * L / 6.0)
                               : (1.0 - cexp(-z * L)) / z;
        return t.coef * cexp(theta * (B - x)) * cexp(t.rate * (B - t.anchor)) * em;
    }
    const Complex term1 = cexp(t.rate * (B - t.anchor) + theta * (B - x));
    const Complex term2 = cexp(t.rate * (A - t.anchor) + theta * (A - x));
    return t.coef * (term1 - term2) / z;
}

}  // namespace

double residual_check(const PiecewiseExpSum& w, const MEJDParams& p, Complex alpha,
                      const RhoProfile& rho, Complex gamma,
                      std::span<const double> xs) {
    const auto segs = segments_of(w, rho);
    // Per-region term lists, with the e^{gamma x} constant folded in as a term.
    std::vector<std::vector<ExpTerm>> terms(3);
    terms[0] = w.low;
    terms[0].push_back({w.const_low, w.gamma, 0.0});
    terms[1] = w.mid;
    terms[1].push_back({w.const_mid, w.gamma, 0.0});
    terms[2] = w.high;
    terms[2].push_back({w.const_high, w.gamma, 0.0});

    double worst = 0.0;
    for (double x : xs) {
        int reg = -1;
        double reg_rho = 0.0;
        for (const Segment& s : segs)
            if (x > s.lo && x < s.hi) {
                reg = s.region;
                reg_rho = s.rho;
            }
        if (reg < 0) throw DomainError("residual sample point on a barrier");

        Complex local = 0.5 * p.sigma * p.sigma * w.second_derivative_region(reg, x) +
                        p.mu * w.derivative_region(reg, x) -
                        (p.lambda + alpha + reg_rho) * w.value_region(reg, x) +
                        alpha * cexp(gamma * x);

        Complex jump(0.0);
        if (p.lambda > 0.0) {
            for (std::size_t k = 0; k < p.up_rates.size(); ++k) {
                const double eta = p.up_rates[k];
                Complex acc(0.0);
                for (const Segment& s : segs) {
                    const double A = std::max(s.lo, x), B = s.hi;
                    if (!(A < B)) continue;
                    for (const ExpTerm& t : terms[s.region])
                        acc += up_segment(t, eta, A, B, x);
                }
                jump += p.p_up * p.up_weights[k] * eta * acc;
            }
            for (std::size_t l = 0; l < p.down_rates.size(); ++l) {
                const double th = p.down_rates[l];
                Complex acc(0.0);
                for (const Segment& s : segs) {
                    const double A = s.lo, B = std::min(s.hi, x);
                    if (!(A < B)) continue;
                    for (const ExpTerm& t : terms[s.region])
                        acc += down_segment(t, th, A, B, x);
                }
                jump += p.q_down * p.down_weights[l] * th * acc;
            }
        }
        const double denom = std::abs(alpha * cexp(gamma * x));
        worst = std::max(worst, std::abs(local + p.lambda * jump) / denom);
    }
    return worst;
}

}  // namespace occ
