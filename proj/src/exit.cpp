#include "occ/exit.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "occ/errors.hpp"

namespace occ {

namespace {

// 1-norm condition estimate; the systems are tiny so forming A^{-1} is fine.
double condition_1norm(const Eigen::MatrixXcd& A,
                       const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
    const Eigen::MatrixXcd inv = lu.solve(Eigen::MatrixXcd::Identity(A.rows(), A.cols()));
    double na = 0.0, ni = 0.0;
    for (int j = 0; j < A.cols(); ++j) {
        na = std::max(na, A.col(j).cwiseAbs().sum());
        ni = std::max(ni, inv.col(j).cwiseAbs().sum());
    }
    return na * ni;
}

struct Solved {
    Eigen::VectorXcd x;
    double residual;
    double condition;
};

Solved solve_checked(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    Solved s;
    s.x = lu.solve(b);
    s.condition = condition_1norm(A, lu);
    if (!s.x.allFinite() || s.condition > 1e12)
        throw SingularSystem("exit system condition estimate " +
                             std::to_string(s.condition));
    const double bn = b.cwiseAbs().maxCoeff();
    s.residual = (A * s.x - b).cwiseAbs().maxCoeff() / (bn > 0.0 ? bn : 1.0);
    if (s.residual > 1e-9)
        throw SingularSystem("exit solve residual " + std::to_string(s.residual));
    return s;
}

}  // namespace

double BoundaryFunctional::value_above(double H) const {
    switch (kind) {
        case Kind::exponential: return std::exp(param * H);
        case Kind::constant: return param;
        case Kind::indicator_above: return H >= param ? 1.0 : 0.0;
        case Kind::indicator_below: return H < param ? 1.0 : 0.0;
    }
    return 0.0;
}

double BoundaryFunctional::value_below(double h) const {
    switch (kind) {
        case Kind::exponential: return std::exp(param * h);
        case Kind::constant: return param;
        case Kind::indicator_above: return h > param ? 1.0 : 0.0;
        case Kind::indicator_below: return h <= param ? 1.0 : 0.0;
    }
    return 0.0;
}

double BoundaryFunctional::up_moment(double eta, double H) const {
    switch (kind) {
        case Kind::exponential:
            if (param >= eta)
                throw DomainError("exponential boundary rate >= eta, up-moment diverges");
            return std::exp(param * H) / (eta - param);
        case Kind::constant:
            return param / eta;
        case Kind::indicator_above: {
            const double a = std::max(param, H);
            return std::exp(-eta * (a - H)) / eta;
        }
        case Kind::indicator_below:
            if (param <= H) return 0.0;
            return (1.0 - std::exp(-eta * (param - H))) / eta;
    }
    return 0.0;
}

double BoundaryFunctional::down_moment(double theta, double h) const {
    switch (kind) {
        case Kind::exponential:
            if (param <= -theta)
                throw DomainError("exponential boundary rate <= -theta, down-moment diverges");
            return std::exp(param * h) / (theta + param);
        case Kind::constant:
            return param / theta;
        case Kind::indicator_below: {
            const double a = std::min(param, h);
            return std::exp(-theta * (h - a)) / theta;
        }
        case Kind::indicator_above:
            if (param >= h) return 0.0;
            return (1.0 - std::exp(-theta * (h - param))) / theta;
    }
    return 0.0;
}

Complex ExitCoefficients::evaluate(double x) const {
    Complex v(0.0);
    // Roots are not stored here; omega/nu already pair with the anchored
    // exponentials captured in rates_ below.
    for (std::size_t i = 0; i < omega.size(); ++i)
        v += omega[i] * std::exp(beta_rates[i] * (x - H));
    for (std::size_t j = 0; j < nu.size(); ++j)
        v += nu[j] * std::exp(gamma_rates[j] * (x - h));
    return v;
}

ExitCoefficients up_passage(const MEJDParams& p, Complex alpha, double H,
                            const BoundaryFunctional& g, const RootSet& roots) {
    if (roots.alpha != alpha)
        throw DomainError("root set was computed at a different alpha");
    const int m = p.m();
    const int nb = m + 1;
    Eigen::MatrixXcd A(nb, nb);
    Eigen::VectorXcd b(nb);
    // Row 0: continuity at the barrier; rows 1..m: up-jump moment matching.
    for (int i = 0; i < nb; ++i) A(0, i) = Complex(1.0);
    b(0) = g.value_above(H);
    for (int k = 0; k < m; ++k) {
        for (int i = 0; i < nb; ++i) A(k + 1, i) = 1.0 / (p.up_rates[k] - roots.betas[i]);
        b(k + 1) = g.up_moment(p.up_rates[k], H);
    }
    Solved s = solve_checked(A, b);
    ExitCoefficients c;
    c.kind = ExitCoefficients::Kind::up;
    c.alpha = alpha;
    c.H = H;
    c.h = H;
    c.omega.assign(s.x.data(), s.x.data() + nb);
    c.beta_rates = roots.betas;
    c.solve_residual = s.residual;
    c.condition = s.condition;
    return c;
}

ExitCoefficients down_passage(const MEJDParams& p, Complex alpha, double h,
                              const BoundaryFunctional& g, const RootSet& roots) {
    if (roots.alpha != alpha)
        throw DomainError("root set was computed at a different alpha");
    const int n = p.n();
    const int ng = n + 1;
    Eigen::MatrixXcd A(ng, ng);
    Eigen::VectorXcd b(ng);
    for (int j = 0; j < ng; ++j) A(0, j) = Complex(1.0);
    b(0) = g.value_below(h);
    for (int l = 0; l < n; ++l) {
        for (int j = 0; j < ng; ++j) A(l + 1, j) = 1.0 / (p.down_rates[l] + roots.gammas[j]);
        b(l + 1) = g.down_moment(p.down_rates[l], h);
    }
    Solved s = solve_checked(A, b);
    ExitCoefficients c;
    c.kind = ExitCoefficients::Kind::down;
    c.alpha = alpha;
    c.h = h;
    c.H = h;
    c.nu.assign(s.x.data(), s.x.data() + ng);
    c.gamma_rates = roots.gammas;
    c.solve_residual = s.residual;
    c.condition = s.condition;
    return c;
}

ExitCoefficients two_sided_exit(const MEJDParams& p, Complex alpha, double h,
                                double H, const BoundaryFunctional& g,
                                const RootSet& roots) {
    std::vector<Complex> rhs;
    rhs.push_back(g.value_above(H));
    for (double eta : p.up_rates) rhs.push_back(g.up_moment(eta, H));
    rhs.push_back(g.value_below(h));
    for (double th : p.down_rates) rhs.push_back(g.down_moment(th, h));
    return two_sided_exit_with_rhs(p, alpha, h, H, roots, rhs);
}

ExitCoefficients two_sided_exit_with_rhs(const MEJDParams& p, Complex alpha,
                                         double h, double H, const RootSet& roots,
                                         const std::vector<Complex>& rhs) {
    if (h >= H) throw BarrierOrder("two_sided_exit requires h < H");
    if (roots.alpha != alpha)
        throw DomainError("root set was computed at a different alpha");
    const int m = p.m(), n = p.n();
    const int nb = m + 1, ng = n + 1, S = nb + ng;
    if (static_cast<int>(rhs.size()) != S)
        throw DomainError("two-sided exit right-hand side has the wrong length");
    Eigen::MatrixXcd A(S, S);
    Eigen::VectorXcd b(S);
    // Columns: betas anchored at H, then gammas anchored at h; all entries
    // bounded by 1 over the strip, which is the whole point of anchoring.
    auto beta_at = [&](int i, double x) { return std::exp(roots.betas[i] * (x - H)); };
    auto gamma_at = [&](int j, double x) { return std::exp(roots.gammas[j] * (x - h)); };
    int r = 0;
    for (int i = 0; i < nb; ++i) A(r, i) = Complex(1.0);
    for (int j = 0; j < ng; ++j) A(r, nb + j) = gamma_at(j, H);
    b(r) = rhs[r];
    ++r;
    for (int k = 0; k < m; ++k) {
        for (int i = 0; i < nb; ++i) A(r, i) = 1.0 / (p.up_rates[k] - roots.betas[i]);
        for (int j = 0; j < ng; ++j)
            A(r, nb + j) = gamma_at(j, H) / (p.up_rates[k] - roots.gammas[j]);
        b(r) = rhs[r];
        ++r;
    }
    for (int i = 0; i < nb; ++i) A(r, i) = beta_at(i, h);
    for (int j = 0; j < ng; ++j) A(r, nb + j) = Complex(1.0);
    b(r) = rhs[r];
    ++r;
    for (int l = 0; l < n; ++l) {
        for (int i = 0; i < nb; ++i)
            A(r, i) = beta_at(i, h) / (p.down_rates[l] + roots.betas[i]);
        for (int j = 0; j < ng; ++j) A(r, nb + j) = 1.0 / (p.down_rates[l] + roots.gammas[j]);
        b(r) = rhs[r];
        ++r;
    }
    Solved s = solve_checked(A, b);
    ExitCoefficients c;
    c.kind = ExitCoefficients::Kind::two_sided;
    c.alpha = alpha;
    c.h = h;
    c.H = H;
    c.omega.assign(s.x.data(), s.x.data() + nb);
    c.nu.assign(s.x.data() + nb, s.x.data() + S);
    c.beta_rates = roots.betas;
    c.gamma_rates = roots.gammas;
    c.solve_residual = s.residual;
    c.condition = s.condition;
    return c;
}

}  // namespace occ
