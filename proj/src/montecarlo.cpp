#include "occ/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

#include "occ/errors.hpp"
#include "occ/exit.hpp"

namespace occ {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ (0xD1342543DE82EF95ULL * (stream + 1));
    for (int i = 0; i < 4; ++i) s_[i] = splitmix64(x);
}

std::uint64_t PathRng::next_raw() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double PathRng::uniform() {
    return (next_raw() >> 11) * 0x1.0p-53 + 0x1.0p-54;  // strictly inside (0,1)
}

double PathRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return negate_ ? -spare_ : spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    const double z = r * std::cos(kTwoPi * u2);
    return negate_ ? -z : z;
}

double PathRng::exponential(double mean) { return -mean * std::log(uniform()); }

int worker_count() {
    static const int n = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 4;
        if (const char* env = std::getenv("OCCPRICER_THREADS")) {
            const long cap = std::strtol(env, nullptr, 10);
            if (cap >= 1 && cap < hw) hw = static_cast<int>(cap);
        }
        return hw;
    }();
    return n;
}

double sample_jump(const MEJDParams& p, PathRng& rng) {
    const bool up = rng.uniform() < p.p_up;
    const auto& w = up ? p.up_weights : p.down_weights;
    const auto& r = up ? p.up_rates : p.down_rates;
    if (w.empty()) throw DomainError("sample_jump on a side with no components");
    bool signed_side = false;
    double wabs_total = 0.0;
    for (double x : w) {
        if (x < 0.0) signed_side = true;
        wabs_total += std::abs(x);
    }
    double y = 0.0;
    if (!signed_side) {
        double u = rng.uniform() * wabs_total;
        std::size_t i = 0;
        for (; i + 1 < w.size(); ++i) {
            if (u < w[i]) break;
            u -= w[i];
        }
        y = rng.exponential(1.0 / r[i]);
    } else {
        // Envelope: mixture of |w_i|; accept with f_side / envelope <= 1.
        for (std::size_t attempt = 0;; ++attempt) {
            if (attempt >= 1000000) throw RejectionStall("jump rejection loop stalled");
            double u = rng.uniform() * wabs_total;
            std::size_t i = 0;
            for (; i + 1 < w.size(); ++i) {
                if (u < std::abs(w[i])) break;
                u -= std::abs(w[i]);
            }
            y = rng.exponential(1.0 / r[i]);
            double f = 0.0, env = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                const double d = r[k] * std::exp(-r[k] * y);
                f += w[k] * d;
                env += std::abs(w[k]) * d;
            }
            if (rng.uniform() * env <= f) break;
        }
    }
    return up ? y : -y;
}

namespace {

// Diffusion-with-jumps walker: jump times exact, Brownian increments per
// merged-grid segment. seg(dt, x_left, x_right) sees the pre-jump right
// endpoint; jumps land exactly on merged-grid points.
template <class Seg>
double walk_path(const MEJDParams& p, double T, std::size_t nsteps, PathRng& rng,
                 double x0, Seg&& seg) {
    double x = x0;
    const double dt = T / static_cast<double>(nsteps);
    double next_jump = p.lambda > 0.0
                           ? rng.exponential(1.0 / p.lambda)
                           : std::numeric_limits<double>::infinity();
    double t = 0.0;
    std::size_t gi = 1;
    while (t < T) {
        const double t_grid = gi >= nsteps ? T : gi * dt;
        double t_next = std::min(t_grid, next_jump);
        if (t_next > T) t_next = T;
        const double d = t_next - t;
        double xr = x;
        if (d > 0.0) {
            xr = x + p.mu * d + p.sigma * std::sqrt(d) * rng.normal();
            seg(d, x, xr);
        }
        if (t_next == next_jump && next_jump <= T) {
            xr += sample_jump(p, rng);
            next_jump += rng.exponential(1.0 / p.lambda);
        }
        if (t_next == t_grid) ++gi;
        x = xr;
        t = t_next;
    }
    return x;
}

struct OccupationAccum {
    double h, H;
    double below = 0.0, mid = 0.0, above = 0.0;
    double sup = 0.0;

    void operator()(double d, double xl, double xr) {
        below += 0.5 * d * ((xl <= h) + (xr <= h));
        above += 0.5 * d * ((xl >= H) + (xr >= H));
        mid += 0.5 * d * ((xl > h && xl < H) + (xr > h && xr < H));
        sup = std::max(sup, std::max(xl, xr));
    }
};

struct ChunkMoments {
    long double sum = 0.0L, sumsq = 0.0L;
    std::size_t n = 0;
    void add(double v) {
        sum += v;
        sumsq += static_cast<long double>(v) * v;
        ++n;
    }
};

MCEstimate combine(const std::vector<ChunkMoments>& chunks) {
    long double sum = 0.0L, sumsq = 0.0L;
    std::size_t n = 0;
    for (const auto& c : chunks) {
        sum += c.sum;
        sumsq += c.sumsq;
        n += c.n;
    }
    MCEstimate e;
    e.n = n;
    e.mean = static_cast<double>(sum / n);
    const long double var = (sumsq - sum * sum / n) / (n > 1 ? (n - 1) : 1);
    e.stderr_ = static_cast<double>(std::sqrt(std::max(var, 0.0L) / n));
    return e;
}

// Runs fn(path_index, rng) over all paths, chunked across workers; the
// per-chunk moments are combined in chunk order so results are independent
// of scheduling. Antithetic mode pairs path 2i+1 with 2i by replaying the
// same stream with negated normal draws.
template <class PathFn>
MCEstimate run_paths(const PathConfig& cfg, PathFn&& fn) {
    if (cfg.n_paths == 0) throw DomainError("n_paths must be >= 1");
    if (cfg.antithetic && cfg.n_paths % 2 != 0)
        throw DomainError("antithetic runs need an even n_paths");
    const std::size_t units = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
    const std::size_t chunk = 4096;
    const std::size_t nchunks = (units + chunk - 1) / chunk;
    std::vector<ChunkMoments> moments(nchunks);

    auto run_chunk = [&](std::size_t ci) {
        const std::size_t lo = ci * chunk, hi = std::min(units, lo + chunk);
        for (std::size_t u = lo; u < hi; ++u) {
            if (!cfg.antithetic) {
                PathRng rng(cfg.seed, u);
                moments[ci].add(fn(u, rng));
            } else {
                PathRng rng(cfg.seed, u);
                moments[ci].add(fn(2 * u, rng));
                PathRng rng2(cfg.seed, u);
                rng2.set_negate_normals(true);
                moments[ci].add(fn(2 * u + 1, rng2));
            }
        }
    };

    const int workers = std::min<int>(worker_count(), static_cast<int>(nchunks));
    if (workers <= 1) {
        for (std::size_t ci = 0; ci < nchunks; ++ci) run_chunk(ci);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int wkr = 0; wkr < workers; ++wkr)
            pool.emplace_back([&] {
                for (std::size_t ci = next.fetch_add(1); ci < nchunks;
                     ci = next.fetch_add(1))
                    run_chunk(ci);
            });
        for (auto& th : pool) th.join();
    }
    return combine(moments);
}

std::size_t steps_for(const PathConfig& cfg, double T) {
    const double raw = static_cast<double>(cfg.n_steps) * T;
    return std::max<std::size_t>(4, static_cast<std::size_t>(std::llround(raw)));
}

}  // namespace

void simulate_functionals(const MEJDParams& p, double T, double h, double H,
                          const PathConfig& cfg, double quantile_upsilon,
                          const std::function<void(std::size_t, const PathFunctionals&)>& visit,
                          double x0) {
    if (!(h <= H)) throw DomainError("need h <= H");
    if (!(T > 0.0)) throw DomainError("need T > 0");
    const std::size_t nsteps = steps_for(cfg, T);
    const bool want_q = quantile_upsilon >= 0.0;

    const std::size_t chunk = 1024;
    const std::size_t nchunks = (cfg.n_paths + chunk - 1) / chunk;
    std::vector<std::vector<PathFunctionals>> results(nchunks);

    auto run_chunk = [&](std::size_t ci) {
        const std::size_t lo = ci * chunk, hi = std::min(cfg.n_paths, lo + chunk);
        results[ci].reserve(hi - lo);
        std::vector<std::pair<double, double>> samples;  // (x_left, dt)
        for (std::size_t i = lo; i < hi; ++i) {
            PathRng rng(cfg.seed, i);
            OccupationAccum occ{h, H};
            samples.clear();
            PathFunctionals f;
            if (want_q) {
                f.x_T = walk_path(p, T, nsteps, rng, x0, [&](double d, double xl, double xr) {
                    occ(d, xl, xr);
                    samples.emplace_back(xl, d);
                });
                std::sort(samples.begin(), samples.end());
                double cum = 0.0;
                f.quantile = samples.empty() ? x0 : samples.back().first;
                for (const auto& s : samples) {
                    cum += s.second;
                    if (cum > quantile_upsilon) {
                        f.quantile = s.first;
                        break;
                    }
                }
            } else {
                f.x_T = walk_path(p, T, nsteps, rng, x0, occ);
            }
            f.occ_below = occ.below;
            f.occ_interval = occ.mid;
            f.occ_above = occ.above;
            f.sup_x = std::max(occ.sup, std::max(x0, f.x_T));
            results[ci].push_back(f);
        }
    };

    const int workers = std::min<int>(worker_count(), static_cast<int>(nchunks));
    if (workers <= 1) {
        for (std::size_t ci = 0; ci < nchunks; ++ci) run_chunk(ci);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int wkr = 0; wkr < workers; ++wkr)
            pool.emplace_back([&] {
                for (std::size_t ci = next.fetch_add(1); ci < nchunks;
                     ci = next.fetch_add(1))
                    run_chunk(ci);
            });
        for (auto& th : pool) th.join();
    }
    std::size_t idx = 0;
    for (const auto& block : results)
        for (const auto& f : block) visit(idx++, f);
}

namespace {

MCEstimate mc_carson_once(const MEJDParams& p, double alpha, const RhoProfile& rho,
                          double gamma, double h, double H, const PathConfig& cfg,
                          double x0, std::size_t steps_per_unit) {
    return run_paths(cfg, [&](std::size_t, PathRng& rng) {
        const double T = std::min(rng.exponential(1.0 / alpha), 60.0 / alpha);
        const std::size_t nsteps = std::max<std::size_t>(
            4, static_cast<std::size_t>(std::llround(steps_per_unit * T)) + 1);
        OccupationAccum occ{h, H};
        const double xT = walk_path(p, T, nsteps, rng, x0, occ);
        return std::exp(-rho.low * occ.below - rho.mid * occ.mid -
                        rho.high * occ.above + gamma * xT);
    });
}

}  // namespace

MCEstimate mc_carson_transform(const MEJDParams& p, double alpha,
                               const RhoProfile& rho, double gamma, double h,
                               double H, const PathConfig& cfg, double x0,
                               double* grid_bias) {
    if (!(alpha > 0.0)) throw DomainError("carson clock needs alpha > 0");
    if (!(h <= H)) throw DomainError("need h <= H");
    MCEstimate fine = mc_carson_once(p, alpha, rho, gamma, h, H, cfg, x0, cfg.n_steps);
    if (grid_bias) {
        const std::size_t coarse_steps = std::max<std::size_t>(8, cfg.n_steps / 4);
        MCEstimate coarse =
            mc_carson_once(p, alpha, rho, gamma, h, H, cfg, x0, coarse_steps);
        *grid_bias = coarse.mean - fine.mean;
    }
    return fine;
}

MCEstimate mc_price(const MEJDParams& p, const OptionSpec& spec,
                    const PathConfig& cfg) {
    if (const auto* s = std::get_if<StepCall>(&spec)) {
        const double h = std::log(s->L / s->S0);
        const std::size_t nsteps = steps_for(cfg, s->T);
        const double disc = std::exp(-s->r * s->T);
        return run_paths(cfg, [&, h, nsteps, disc](std::size_t, PathRng& rng) {
            OccupationAccum occ{h, h};
            const double xT = walk_path(p, s->T, nsteps, rng, 0.0, occ);
            const double payoff = std::max(s->S0 * std::exp(xT) - s->K, 0.0);
            return disc * std::exp(-s->rho * occ.below) * payoff;
        });
    }
    if (const auto* s = std::get_if<DoubleStepCall>(&spec)) {
        if (!(s->L < s->U)) throw BarrierOrder("double-step requires L < U");
        const double h = std::log(s->L / s->S0), H = std::log(s->U / s->S0);
        const std::size_t nsteps = steps_for(cfg, s->T);
        const double disc = std::exp(-s->r * s->T);
        return run_paths(cfg, [&, h, H, nsteps, disc](std::size_t, PathRng& rng) {
            OccupationAccum occ{h, H};
            const double xT = walk_path(p, s->T, nsteps, rng, 0.0, occ);
            const double payoff = std::max(s->S0 * std::exp(xT) - s->K, 0.0);
            return disc * std::exp(-s->rho_minus * occ.below - s->rho_plus * occ.above) *
                   payoff;
        });
    }
    const auto& s = std::get<QuantileCall>(spec);
    const double upsilon = s.upsilon_frac * s.T;
    const std::size_t nsteps = steps_for(cfg, s.T);
    const double disc = std::exp(-s.r * s.T);
    return run_paths(cfg, [&, upsilon, nsteps, disc](std::size_t, PathRng& rng) {
        thread_local std::vector<std::pair<double, double>> samples;
        samples.clear();
        walk_path(p, s.T, nsteps, rng, 0.0, [&](double d, double xl, double) {
            samples.emplace_back(xl, d);
        });
        std::sort(samples.begin(), samples.end());
        double cum = 0.0, q = samples.empty() ? 0.0 : samples.back().first;
        for (const auto& sm : samples) {
            cum += sm.second;
            if (cum > upsilon) {
                q = sm.first;
                break;
            }
        }
        return disc * std::max(s.S0 * std::exp(s.lambda_q * q) - s.K, 0.0);
    });
}

MCEstimate mc_passage(const MEJDParams& p, double alpha, std::optional<double> h,
                      std::optional<double> H, const BoundaryFunctional& g,
                      double x0, const PathConfig& cfg) {
    if (!h && !H) throw DomainError("mc_passage needs at least one barrier");
    if (!(alpha > 0.0)) throw DomainError("mc_passage needs alpha > 0");
    if (H && x0 >= *H) throw DomainError("start at or above the upper barrier");
    if (h && x0 <= *h) throw DomainError("start at or below the lower barrier");
    const double Tmax = 40.0 / alpha;
    const std::size_t nsteps = steps_for(cfg, Tmax);
    const double dt = Tmax / static_cast<double>(nsteps);
    auto g_at = [&g](double y) {
        switch (g.kind) {
            case BoundaryFunctional::Kind::exponential: return std::exp(g.param * y);
            case BoundaryFunctional::Kind::constant: return g.param;
            case BoundaryFunctional::Kind::indicator_above: return y >= g.param ? 1.0 : 0.0;
            case BoundaryFunctional::Kind::indicator_below: return y <= g.param ? 1.0 : 0.0;
        }
        return 0.0;
    };

    return run_paths(cfg, [&](std::size_t, PathRng& rng) {
        double x = x0, t = 0.0;
        double next_jump = p.lambda > 0.0
                               ? rng.exponential(1.0 / p.lambda)
                               : std::numeric_limits<double>::infinity();
        std::size_t gi = 1;
        while (t < Tmax) {
            const double t_grid = gi >= nsteps ? Tmax : gi * dt;
            double t_next = std::min(t_grid, next_jump);
            if (t_next > Tmax) t_next = Tmax;
            const double d = t_next - t;
            double xr = x;
            if (d > 0.0) {
                xr = x + p.mu * d + p.sigma * std::sqrt(d) * rng.normal();
                // Endpoint crossings: diffusion paths creep, so X_tau sits on
                // the barrier; time by linear interpolation.
                double tau_up = std::numeric_limits<double>::infinity();
                double tau_dn = std::numeric_limits<double>::infinity();
                if (H) {
                    if (xr >= *H)
                        tau_up = t + d * (*H - x) / (xr - x);
                    else if (p.sigma > 0.0) {
                        const double pr =
                            std::exp(-2.0 * (*H - x) * (*H - xr) / (p.sigma * p.sigma * d));
                        if (rng.uniform() < pr) tau_up = t + 0.5 * d;
                    }
                }
                if (h) {
                    if (xr <= *h)
                        tau_dn = t + d * (x - *h) / (x - xr);
                    else if (p.sigma > 0.0) {
                        const double pr =
                            std::exp(-2.0 * (x - *h) * (xr - *h) / (p.sigma * p.sigma * d));
                        if (rng.uniform() < pr) tau_dn = t + 0.5 * d;
                    }
                }
                if (tau_up < tau_dn) return std::exp(-alpha * tau_up) * g.value_above(*H);
                if (tau_dn < tau_up) return std::exp(-alpha * tau_dn) * g.value_below(*h);
            }
            if (t_next == next_jump && next_jump <= Tmax) {
                xr += sample_jump(p, rng);
                next_jump += rng.exponential(1.0 / p.lambda);
                // Jump across a barrier exits with overshoot.
                if ((H && xr >= *H) || (h && xr <= *h))
                    return std::exp(-alpha * t_next) * g_at(xr);
            }
            if (t_next == t_grid) ++gi;
            x = xr;
            t = t_next;
        }
        return 0.0;  // not crossed; e^{-alpha Tmax} is below noise
    });
}

}  // namespace occ
