#include "occ/inversion.hpp"

#include <cmath>
#include <vector>

#include "occ/errors.hpp"

namespace occ {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> binomial_weights(int n) {
    std::vector<double> w(n + 1);
    double c = 1.0;
    for (int j = 0; j <= n; ++j) {
        w[j] = c;
        c = c * (n - j) / (j + 1.0);
    }
    const double scale = std::pow(0.5, n);
    for (double& x : w) x *= scale;
    return w;
}

// Euler summation of f(T) = e^{shift T} (e^{A/2}/T) [F0/2 + sum (-1)^k Re F_k]
// with F_k evaluated at shift + (A/2 + i k pi)/T. Returns the averaged value
// and the difference between the last two averaging depths as a tail bound.
double euler_sum(const std::function<Complex(Complex)>& F, double T, double shift,
                 int M, int NB, double A, double* tail_out) {
    const double h0 = A / (2.0 * T);
    double cur = 0.5 * F(Complex(shift + h0, 0.0)).real();
    std::vector<double> sums;
    sums.reserve(NB + 1);
    double fmax = std::abs(cur);
    for (int k = 1; k <= M + NB; ++k) {
        const Complex v = F(Complex(shift + h0, k * kPi / T));
        fmax = std::max(fmax, std::abs(v));
        cur += (k % 2 == 0 ? 1.0 : -1.0) * v.real();
        if (k >= M) sums.push_back(cur);
    }
    const auto w = binomial_weights(NB);
    double avg = 0.0, avg_prev = 0.0;
    for (int j = 0; j <= NB; ++j) avg += w[j] * sums[j];
    if (NB >= 1) {
        const auto wp = binomial_weights(NB - 1);
        for (int j = 0; j <= NB - 1; ++j) avg_prev += wp[j] * sums[j];
    }
    const double amp = std::exp(shift * T) * std::exp(A / 2.0) / T;
    const double tail = amp * std::abs(avg - avg_prev);
    if (tail_out) *tail_out = tail;
    const double value = amp * avg;
    const double tol = 1e-3 * std::abs(value) + 1e-9 * amp * fmax + 1e-300;
    if (NB >= 1 && tail > tol)
        throw NonConvergence("euler tail estimate " + std::to_string(tail) +
                             " at value " + std::to_string(value));
    return value;
}

// Both-wings variant for complex-valued originals (inner dimension of the
// iterated scheme at a complex outer node): no conjugate-symmetry shortcut.
Complex euler_sum_complex(const std::function<Complex(Complex)>& F, double t, int M,
                          int NB, double A) {
    const double h0 = A / (2.0 * t);
    Complex cur = F(Complex(h0, 0.0));
    std::vector<Complex> sums;
    sums.reserve(NB + 1);
    for (int k = 1; k <= M + NB; ++k) {
        const Complex up = F(Complex(h0, k * kPi / t));
        const Complex dn = F(Complex(h0, -k * kPi / t));
        cur += (k % 2 == 0 ? 1.0 : -1.0) * (up + dn);
        if (k >= M) sums.push_back(cur);
    }
    const auto w = binomial_weights(NB);
    Complex avg(0.0);
    for (int j = 0; j <= NB; ++j) avg += w[j] * sums[j];
    return std::exp(A / 2.0) / (2.0 * t) * avg;
}

}  // namespace

void InversionConfig::check() const {
    if (euler_m < 11) throw DomainError("euler_m must be >= 11");
    if (euler_n < 1) throw DomainError("euler_n must be >= 1");
    if (gs_terms < 2 || gs_terms % 2 != 0 || gs_terms > 18)
        throw DomainError("gaver-stehfest terms must be even and in [2, 18]");
    if (!(abscissa > 0.0)) throw DomainError("abscissa budget must be positive");
    if (rounds < 1) throw DomainError("rounds must be >= 1");
}

double invert_carson(const CarsonFn& carson, double T, const InversionConfig& cfg,
                     double shift) {
    cfg.check();
    if (!(T > 0.0)) throw DomainError("invert_carson needs T > 0");
    if (cfg.method == InversionMethod::gaver_stehfest) {
        if (shift != 0.0)
            throw DomainError("gaver-stehfest does not support a contour shift");
        return gaver_stehfest_carson(
            [&](double s) { return carson(Complex(s, 0.0)).real(); }, T, cfg.gs_terms);
    }
    auto ordinary = [&](Complex s) { return carson(s) / s; };
    return euler_sum(ordinary, T, shift, cfg.euler_m, cfg.euler_n, cfg.abscissa,
                     nullptr);
}

double gaver_stehfest_carson(const std::function<double(double)>& carson, double T,
                             int terms) {
    if (terms < 2 || terms % 2 != 0 || terms > 18)
        throw DomainError("gaver-stehfest terms must be even and in [2, 18]");
    if (!(T > 0.0)) throw DomainError("gaver-stehfest needs T > 0");
    const int N = terms, half = N / 2;
    const double ln2 = std::log(2.0);
    auto fact = [](int k) {
        long double f = 1.0L;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    double sum = 0.0;
    for (int k = 1; k <= N; ++k) {
        long double vk = 0.0L;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            long double term = std::pow((long double)j, half) * fact(2 * j);
            term /= fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k);
            vk += term;
        }
        if ((half + k) % 2 != 0) vk = -vk;
        const double s = k * ln2 / T;
        sum += static_cast<double>(vk) * carson(s) / s;
    }
    return ln2 / T * sum;
}

double invert_double(const DoubleTransformFn& F, double T, double u,
                     const InversionConfig& cfg, double outer_shift) {
    cfg.check();
    if (!(T > 0.0) || !(u > 0.0)) throw DomainError("invert_double needs T, u > 0");
    const int Mi = cfg.euler_m * cfg.rounds;
    auto inner = [&](Complex alpha) {
        return euler_sum_complex([&](Complex s) { return F(alpha, s); }, u, Mi,
                                 cfg.euler_n, cfg.abscissa);
    };
    return euler_sum(inner, T, outer_shift, cfg.euler_m, cfg.euler_n, cfg.abscissa,
                     nullptr);
}

double invert_double_bilateral(const DoubleTransformFn& F, double T, double k,
                               const BilateralContour& contour,
                               const InversionConfig& cfg, double outer_shift) {
    cfg.check();
    if (!(T > 0.0)) throw DomainError("invert_double_bilateral needs T > 0");
    if (!(contour.beta0 > 0.0) || !(contour.strip_edge > contour.beta0))
        throw DomainError("bilateral contour needs 0 < beta0 < strip_edge");

    // Period: both Poisson image families (bounded tail to the right,
    // e^{strip_edge k} decay to the left) must sit under e^{-A}.
    const double A = cfg.abscissa;
    const double margin = 0.98 * contour.strip_edge - contour.beta0;
    if (!(margin > 0.0)) throw DomainError("contour too close to the strip edge");
    const double period = 1.25 * std::max(A / contour.beta0, A / margin) +
                          2.0 * std::abs(k);
    const double step = 2.0 * kPi / period;

    const long j_min = 256L * cfg.rounds;
    const long j_cap = 400000L;

    auto inner = [&](Complex alpha) {
        Complex sum = std::exp(contour.beta0 * k) * F(alpha, Complex(contour.beta0, 0.0));
        double scale = std::abs(sum);
        double recent = 0.0;
        for (long j = 1; j <= j_cap; ++j) {
            const Complex bp(contour.beta0, j * step);
            const Complex bm(contour.beta0, -j * step);
            const Complex pair = std::exp(bp * k) * F(alpha, bp) + std::exp(bm * k) * F(alpha, bm);
            sum += pair;
            const double mag = std::abs(pair);
            scale = std::max(scale, mag);
            recent = std::max(recent, mag);
            if (j % 32 == 0) {
                // Tail of a |beta|^-4 integrand: remaining mass ~ |term| * j / 3.
                if (j >= j_min && recent * static_cast<double>(j) < 1e-8 * scale)
                    return step / (2.0 * kPi) * sum;
                recent = 0.0;
            }
        }
        throw NonConvergence("bilateral inner contour did not decay");
    };
    return euler_sum(inner, T, outer_shift, cfg.euler_m, cfg.euler_n, cfg.abscissa,
                     nullptr);
}

}  // namespace occ
