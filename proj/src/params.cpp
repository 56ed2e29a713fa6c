#include "occ/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "occ/errors.hpp"

namespace occ {

namespace {

constexpr double kSumTol = 1e-12;

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

// One side of the jump density: sum_i w_i r_i e^{-r_i y}, y >= 0.
double side_density(const std::vector<double>& w, const std::vector<double>& r,
                    double y) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * r[i] * std::exp(-r[i] * y);
    return s;
}

// Scans a signed exponential mixture for negativity on a geometric grid plus
// the dominant-term limits. Not exhaustive, but catches sign changes at the
// resolution the rates set.
void check_side_nonnegative(const std::vector<double>& w,
                            const std::vector<double>& r, const char* side,
                            std::vector<std::string>& out) {
    if (w.empty()) return;
    // y -> 0+: value is sum w_i r_i.
    if (side_density(w, r, 0.0) < -kSumTol)
        out.push_back(std::string(side) + " density negative at 0+");
    // y -> inf: slowest rate dominates; first nonzero weight must be positive.
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] != 0.0) {
            if (w[i] < 0.0)
                out.push_back(std::string(side) +
                              " density negative in the tail (leading weight " +
                              fmt(w[i]) + " at rate " + fmt(r[i]) + ")");
            break;
        }
    }
    const double rmin = *std::min_element(r.begin(), r.end());
    const double rmax = *std::max_element(r.begin(), r.end());
    const double lo = 1e-6 / rmax, hi = 50.0 / rmin;
    const int npts = 10000;
    const double step = std::pow(hi / lo, 1.0 / (npts - 1));
    double y = lo;
    for (int i = 0; i < npts; ++i, y *= step) {
        if (side_density(w, r, y) < -1e-14) {
            out.push_back(std::string(side) + " density negative near y=" + fmt(y));
            return;
        }
    }
}

void check_side_structure(const std::vector<double>& w,
                          const std::vector<double>& r, double side_prob,
                          double lambda, const char* side,
                          std::vector<std::string>& out) {
    if (w.size() != r.size()) {
        out.push_back(std::string(side) + " weights/rates size mismatch");
        return;
    }
    const bool active = lambda > 0.0 && side_prob > 0.0;
    if (!active) {
        if (lambda > 0.0 && !r.empty())
            out.push_back(std::string(side) +
                          " rates listed but side probability is zero");
        return;
    }
    if (r.empty()) {
        out.push_back(std::string(side) + " side active but has no components");
        return;
    }
    for (double x : r)
        if (!(x > 0.0)) out.push_back(std::string(side) + " rate not positive");
    if (!strictly_increasing(r))
        out.push_back(std::string(side) + " rates not strictly increasing");
    double sum = 0.0;
    for (double x : w) {
        sum += x;
        if (x == 0.0) out.push_back(std::string(side) + " weight is zero");
    }
    if (std::abs(sum - 1.0) > 1e-9)
        out.push_back(std::string(side) + " weights sum to " + fmt(sum) + ", not 1");
}

}  // namespace

double MEJDParams::min_rate() const {
    double r = std::numeric_limits<double>::infinity();
    if (has_up_jumps() && !up_rates.empty()) r = std::min(r, up_rates.front());
    if (has_down_jumps() && !down_rates.empty()) r = std::min(r, down_rates.front());
    return r;
}

ValidationReport validate(const MEJDParams& p) {
    ValidationReport rep;
    auto& v = rep.violations;
    if (!(p.sigma >= 0.0)) v.push_back("sigma < 0");
    if (!(p.lambda >= 0.0)) v.push_back("lambda < 0");
    if (p.lambda > 0.0) {
        if (p.p_up < 0.0 || p.p_up > 1.0) v.push_back("p_up not in [0,1]");
        if (p.q_down < 0.0 || p.q_down > 1.0) v.push_back("q_down not in [0,1]");
        if (std::abs(p.p_up + p.q_down - 1.0) > kSumTol)
            v.push_back("p_up+q_down != 1");
    }
    check_side_structure(p.up_weights, p.up_rates, p.p_up, p.lambda, "up", v);
    check_side_structure(p.down_weights, p.down_rates, p.q_down, p.lambda, "down", v);
    if (v.empty() && p.lambda > 0.0) {
        if (p.has_up_jumps()) check_side_nonnegative(p.up_weights, p.up_rates, "up", v);
        if (p.has_down_jumps())
            check_side_nonnegative(p.down_weights, p.down_rates, "down", v);
    }
    return rep;
}

double density_at(const MEJDParams& p, double y) {
    if (y >= 0.0)
        return p.p_up * side_density(p.up_weights, p.up_rates, y);
    return p.q_down * side_density(p.down_weights, p.down_rates, -y);
}

Complex levy_exponent(const MEJDParams& p, Complex zeta) {
    Complex jump(0.0, 0.0);
    if (p.lambda > 0.0) {
        for (std::size_t i = 0; i < p.up_rates.size(); ++i) {
            const double eta = p.up_rates[i];
            const Complex d = eta - zeta;
            if (std::abs(d) < 1e-12 * std::max(1.0, eta))
                throw PoleEvaluation("levy_exponent at pole eta=" + fmt(eta));
            jump += p.p_up * p.up_weights[i] * eta / d;
        }
        for (std::size_t j = 0; j < p.down_rates.size(); ++j) {
            const double th = p.down_rates[j];
            const Complex d = th + zeta;
            if (std::abs(d) < 1e-12 * std::max(1.0, th))
                throw PoleEvaluation("levy_exponent at pole -theta=" + fmt(-th));
            jump += p.q_down * p.down_weights[j] * th / d;
        }
        jump -= 1.0;
    }
    return p.mu * zeta + 0.5 * p.sigma * p.sigma * zeta * zeta + p.lambda * jump;
}

Complex levy_exponent_derivative(const MEJDParams& p, Complex zeta) {
    Complex jump(0.0, 0.0);
    if (p.lambda > 0.0) {
        for (std::size_t i = 0; i < p.up_rates.size(); ++i) {
            const double eta = p.up_rates[i];
            const Complex d = eta - zeta;
            jump += p.p_up * p.up_weights[i] * eta / (d * d);
        }
        for (std::size_t j = 0; j < p.down_rates.size(); ++j) {
            const double th = p.down_rates[j];
            const Complex d = th + zeta;
            jump -= p.q_down * p.down_weights[j] * th / (d * d);
        }
    }
    return p.mu + p.sigma * p.sigma * zeta + p.lambda * jump;
}

double trend(const MEJDParams& p) {
    double jump = 0.0;
    if (p.lambda > 0.0) {
        for (std::size_t i = 0; i < p.up_rates.size(); ++i)
            jump += p.p_up * p.up_weights[i] / p.up_rates[i];
        for (std::size_t j = 0; j < p.down_rates.size(); ++j)
            jump -= p.q_down * p.down_weights[j] / p.down_rates[j];
    }
    return p.mu + p.lambda * jump;
}

double exp_jump_moment(const MEJDParams& p) {
    if (p.lambda == 0.0) return 1.0;
    if (p.has_up_jumps() && !p.up_rates.empty() && p.up_rates.front() <= 1.0)
        throw MgfDivergence("E[e^Y] diverges: eta_1 <= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < p.up_rates.size(); ++i)
        s += p.p_up * p.up_weights[i] * p.up_rates[i] / (p.up_rates[i] - 1.0);
    for (std::size_t j = 0; j < p.down_rates.size(); ++j)
        s += p.q_down * p.down_weights[j] * p.down_rates[j] / (p.down_rates[j] + 1.0);
    return s;
}

double risk_neutral_drift(double r, const MEJDParams& p) {
    const double ey = exp_jump_moment(p);
    return r - 0.5 * p.sigma * p.sigma - p.lambda * (ey - 1.0);
}

MEJDParams with_risk_neutral_drift(double r, MEJDParams p) {
    p.mu = risk_neutral_drift(r, p);
    return p;
}

MEJDParams kou_params(double mu, double sigma, double lambda, double p_up,
                      double eta, double theta) {
    MEJDParams p;
    p.mu = mu;
    p.sigma = sigma;
    p.lambda = lambda;
    p.p_up = p_up;
    p.q_down = 1.0 - p_up;
    p.up_weights = {1.0};
    p.up_rates = {eta};
    p.down_weights = {1.0};
    p.down_rates = {theta};
    return p;
}

}  // namespace occ
