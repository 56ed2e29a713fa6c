#include "occ/roots.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "occ/errors.hpp"

namespace occ {

namespace {

using Poly = std::vector<Complex>;  // ascending degree

Poly operator*(const Poly& a, const Poly& b) {
    Poly c(a.size() + b.size() - 1, Complex(0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

void add_into(Poly& a, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), Complex(0.0));
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
}

Complex eval(const Poly& c, Complex z) {
    Complex v(0.0);
    for (std::size_t i = c.size(); i-- > 0;) v = v * z + c[i];
    return v;
}

}  // namespace

std::vector<Complex> characteristic_polynomial(const MEJDParams& p, Complex alpha) {
    if (p.sigma <= 0.0)
        throw DegenerateLeadingCoefficient(
            "sigma = 0: characteristic polynomial drops degree");
    // (mu z + sigma^2 z^2/2 - (lambda + alpha)) * prod(eta - z) * prod(theta + z)
    Poly quad = {-(p.lambda + alpha), Complex(p.mu), Complex(0.5 * p.sigma * p.sigma)};
    Poly up_prod = {Complex(1.0)}, down_prod = {Complex(1.0)};
    for (double eta : p.up_rates) up_prod = up_prod * Poly{Complex(eta), Complex(-1.0)};
    for (double th : p.down_rates) down_prod = down_prod * Poly{Complex(th), Complex(1.0)};
    Poly result = quad * up_prod * down_prod;
    // + lambda p_up sum_i p_i eta_i prod_{i' != i}(eta - z) * prod(theta + z)
    for (std::size_t i = 0; i < p.up_rates.size(); ++i) {
        Poly t = {Complex(p.lambda * p.p_up * p.up_weights[i] * p.up_rates[i])};
        for (std::size_t k = 0; k < p.up_rates.size(); ++k)
            if (k != i) t = t * Poly{Complex(p.up_rates[k]), Complex(-1.0)};
        t = t * down_prod;
        add_into(result, t);
    }
    for (std::size_t j = 0; j < p.down_rates.size(); ++j) {
        Poly t = {Complex(p.lambda * p.q_down * p.down_weights[j] * p.down_rates[j])};
        for (std::size_t k = 0; k < p.down_rates.size(); ++k)
            if (k != j) t = t * Poly{Complex(p.down_rates[k]), Complex(1.0)};
        t = t * up_prod;
        add_into(result, t);
    }
    const std::size_t deg = p.up_rates.size() + p.down_rates.size() + 2;
    result.resize(deg + 1, Complex(0.0));
    // Model poles must not be roots of the cleared polynomial (nonzero
    // weights guarantee this); otherwise the polynomial and G(z)=alpha
    // would disagree about the root set.
    double scale = 0.0;
    for (const Complex& c : result) scale = std::max(scale, std::abs(c));
    for (double eta : p.up_rates)
        if (std::abs(eval(result, Complex(eta))) < 1e-14 * scale)
            throw DomainError("characteristic polynomial vanishes at pole eta");
    for (double th : p.down_rates)
        if (std::abs(eval(result, Complex(-th))) < 1e-14 * scale)
            throw DomainError("characteristic polynomial vanishes at pole -theta");
    return result;
}

RootSet find_roots(const MEJDParams& p, Complex alpha) {
    const int m = p.m(), n = p.n();
    const int deg = m + n + 2;
    Poly poly = characteristic_polynomial(p, alpha);

    // Companion-matrix eigenvalues of the monic polynomial.
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    const Complex lead = poly.back();
    for (int i = 0; i < deg; ++i) {
        comp(i, deg - 1) = -poly[i] / lead;
        if (i > 0) comp(i, i - 1) = Complex(1.0);
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw ConvergenceFailure("companion eigenvalue iteration failed");

    std::vector<Complex> roots(deg);
    for (int i = 0; i < deg; ++i) roots[i] = es.eigenvalues()(i);

    // Newton polish on G(z) - alpha directly (quadratic near simple roots).
    const double res_target = 1e-13 * (1.0 + std::abs(alpha));
    for (Complex& z : roots) {
        for (int it = 0; it < 50; ++it) {
            Complex f;
            try {
                f = levy_exponent(p, z) - alpha;
            } catch (const PoleEvaluation&) {
                z += Complex(1e-9, 1e-9);  // nudge off the pole, retry
                continue;
            }
            if (std::abs(f) <= res_target) break;
            const Complex df = levy_exponent_derivative(p, z);
            if (df == Complex(0.0)) break;
            const Complex step = f / df;
            z -= step;
            if (std::abs(step) <= 1e-15 * std::abs(z)) break;
        }
    }

    RootSet rs;
    rs.alpha = alpha;
    double scale = 0.0;
    for (const Complex& z : roots) scale = std::max(scale, std::abs(z));
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) <= 1e-9 * scale)
                throw RootCountMismatch("roots not distinct at this alpha");

    const bool alpha_real = std::abs(alpha.imag()) <= 1e-13 * (1.0 + std::abs(alpha.real()));
    for (Complex z : roots) {
        if (alpha_real && std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z.real())))
            z = Complex(z.real(), 0.0);
        if (z.real() > 1e-12 * scale)
            rs.betas.push_back(z);
        else if (z.real() < -1e-12 * scale)
            rs.gammas.push_back(z);
        else
            throw RootCountMismatch("root on the imaginary axis");
    }
    if (static_cast<int>(rs.betas.size()) != m + 1 ||
        static_cast<int>(rs.gammas.size()) != n + 1)
        throw RootCountMismatch("expected (m+1, n+1) = (" + std::to_string(m + 1) +
                                "," + std::to_string(n + 1) + ") roots, got (" +
                                std::to_string(rs.betas.size()) + "," +
                                std::to_string(rs.gammas.size()) + ")");

    std::sort(rs.betas.begin(), rs.betas.end(),
              [](Complex a, Complex b) { return a.real() < b.real(); });
    std::sort(rs.gammas.begin(), rs.gammas.end(),
              [](Complex a, Complex b) { return a.real() > b.real(); });

    for (const Complex& z : rs.all())
        rs.max_residual = std::max(
            rs.max_residual, std::abs(levy_exponent(p, z) - alpha) / (1.0 + std::abs(alpha)));
    if (rs.max_residual > 1e-10)
        throw ConvergenceFailure("root polishing stalled, residual " +
                                 std::to_string(rs.max_residual));

    // Interlacing chain, checked only when alpha is real and every root is.
    if (alpha_real) {
        bool all_real = true;
        for (const Complex& z : rs.all())
            all_real = all_real && z.imag() == 0.0;
        if (all_real) {
            bool ok = rs.betas.front().real() > 0.0;
            for (int i = 0; i < m; ++i)
                ok = ok && rs.betas[i].real() < p.up_rates[i] &&
                     p.up_rates[i] < rs.betas[i + 1].real();
            ok = ok && rs.gammas.front().real() < 0.0;
            for (int j = 0; j < n; ++j)
                ok = ok && rs.gammas[j].real() > -p.down_rates[j] &&
                     -p.down_rates[j] > rs.gammas[j + 1].real();
            rs.interlaced = ok;
        }
    }
    return rs;
}

}  // namespace occ
