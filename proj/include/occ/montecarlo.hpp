#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "occ/exit.hpp"
#include "occ/occupation.hpp"
#include "occ/params.hpp"
#include "occ/pricing.hpp"

namespace occ {

struct PathConfig {
    std::size_t n_paths = 100000;
    std::size_t n_steps = 2000;  // time grid per unit of maturity
    std::uint64_t seed = 12345;
    bool antithetic = false;
};

struct MCEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

// Counter-split per-path stream: path i draws from xoshiro256++ seeded by
// splitmix64(seed, i), so estimates do not depend on thread count or
// scheduling.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream);
    double uniform();              // (0, 1)
    double normal();               // Box-Muller with a cached spare
    double exponential(double mean);
    void set_negate_normals(bool v) { negate_ = v; }

private:
    std::uint64_t next_raw();
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
    bool negate_ = false;
};

// One draw from the signed-mixture jump density. Sides with any negative
// weight use acceptance-rejection with the absolute-weight hyperexponential
// envelope; all-positive sides sample the mixture directly.
double sample_jump(const MEJDParams& p, PathRng& rng);

// Per-path summary functionals relative to barriers h <= H (pass h == H for
// a single barrier; occ_interval is 0 then).
struct PathFunctionals {
    double occ_below = 0.0;    // time with X <= h
    double occ_interval = 0.0; // time with h < X < H
    double occ_above = 0.0;    // time with X >= H
    double x_T = 0.0;
    double sup_x = 0.0;
    double quantile = 0.0;     // empirical level, only when requested
};

// Simulates n_paths paths to horizon T (jump times exact, diffusion on a
// uniform grid, occupation by trapezoidal indicator counting) and visits the
// records in path order. quantile_upsilon >= 0 requests the empirical
// occupation quantile at that time level.
void simulate_functionals(const MEJDParams& p, double T, double h, double H,
                          const PathConfig& cfg, double quantile_upsilon,
                          const std::function<void(std::size_t, const PathFunctionals&)>& visit,
                          double x0 = 0.0);

// Carson-clock estimate of the occupation transform: per path T ~ Exp(mean
// 1/alpha), average of e^{-rho.low occ_below - rho.mid occ_interval -
// rho.high occ_above + gamma X_T}. When grid_bias is non-null, a second pass
// on a 4x coarser grid (same seeds) reports est(coarse) - est(fine).
MCEstimate mc_carson_transform(const MEJDParams& p, double alpha,
                               const RhoProfile& rho, double gamma, double h,
                               double H, const PathConfig& cfg, double x0 = 0.0,
                               double* grid_bias = nullptr);

// Discounted payoff estimate for any priced instrument.
MCEstimate mc_price(const MEJDParams& p, const OptionSpec& spec,
                    const PathConfig& cfg);

// First-passage oracle E_x0[e^{-alpha tau} g(X_tau)] where tau is the first
// passage above H, below h, or whichever comes first when both are given.
// Diffusion crossings between grid points are resolved by Brownian-bridge
// Bernoulli draws so the estimator is not biased low.
MCEstimate mc_passage(const MEJDParams& p, double alpha, std::optional<double> h,
                      std::optional<double> H, const BoundaryFunctional& g,
                      double x0, const PathConfig& cfg);

// Worker cap honored by the MC loops: min(OCCPRICER_THREADS, hardware).
int worker_count();

}  // namespace occ
