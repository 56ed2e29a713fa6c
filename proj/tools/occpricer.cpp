// occpricer: batch front-end for the occupation-time pricing library.
// Commands: validate | roots | transform | price | mc | invert-test.
// Exit codes: 0 success, 1 config/validation error, 2 numerical failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "occ/errors.hpp"
#include "occ/inversion.hpp"
#include "occ/montecarlo.hpp"
#include "occ/occupation.hpp"
#include "occ/params.hpp"
#include "occ/pricing.hpp"
#include "occ/roots.hpp"

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) ok = true;
        if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

double need_number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ConfigError(std::string("missing numeric '") + key + "' in " + where);
    return obj[key].get<double>();
}

double number_or(const json& obj, const char* key, double fallback) {
    return obj.contains(key) ? obj[key].get<double>() : fallback;
}

std::vector<double> vector_or(const json& obj, const char* key) {
    std::vector<double> v;
    if (obj.contains(key))
        for (const auto& x : obj[key]) v.push_back(x.get<double>());
    return v;
}

struct RunConfig {
    occ::MEJDParams model;
    bool risk_neutral = false;
    std::optional<occ::OptionSpec> instrument;
    double instrument_r = 0.0;
    occ::InversionConfig inversion;
    occ::PathConfig paths;
    bool price_with_mc = false;
    json transform;  // raw block, parsed per command
    json roots_block;
};

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json root;
    try {
        in >> root;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    reject_unknown(root, "config",
                   {"schema", "model", "instrument", "numerics", "transform",
                    "roots", "price"});
    if (!root.contains("schema") || root["schema"].get<int>() != 1)
        throw ConfigError("config must declare schema = 1");
    if (!root.contains("model")) throw ConfigError("config needs a model block");

    RunConfig cfg;
    const json& m = root["model"];
    reject_unknown(m, "model",
                   {"mu", "sigma", "lambda", "p_up", "q_down", "up_weights",
                    "up_rates", "down_weights", "down_rates", "risk_neutral"});
    cfg.risk_neutral = m.contains("risk_neutral") && m["risk_neutral"].get<bool>();
    cfg.model.mu = cfg.risk_neutral ? 0.0 : need_number(m, "model", "mu");
    cfg.model.sigma = need_number(m, "model", "sigma");
    cfg.model.lambda = need_number(m, "model", "lambda");
    cfg.model.p_up = number_or(m, "p_up", 0.0);
    cfg.model.q_down = number_or(m, "q_down", 0.0);
    cfg.model.up_weights = vector_or(m, "up_weights");
    cfg.model.up_rates = vector_or(m, "up_rates");
    cfg.model.down_weights = vector_or(m, "down_weights");
    cfg.model.down_rates = vector_or(m, "down_rates");

    if (root.contains("instrument")) {
        const json& ins = root["instrument"];
        const std::string type = ins.value("type", "");
        if (type == "step_call") {
            reject_unknown(ins, "instrument", {"type", "S0", "K", "L", "rho", "r", "T"});
            occ::StepCall s{need_number(ins, "instrument", "S0"),
                            need_number(ins, "instrument", "K"),
                            need_number(ins, "instrument", "L"),
                            need_number(ins, "instrument", "rho"),
                            need_number(ins, "instrument", "r"),
                            need_number(ins, "instrument", "T")};
            cfg.instrument = s;
            cfg.instrument_r = s.r;
        } else if (type == "double_step_call") {
            reject_unknown(ins, "instrument",
                           {"type", "S0", "K", "L", "U", "rho_minus", "rho_plus", "r", "T"});
            occ::DoubleStepCall s{need_number(ins, "instrument", "S0"),
                                  need_number(ins, "instrument", "K"),
                                  need_number(ins, "instrument", "L"),
                                  need_number(ins, "instrument", "U"),
                                  need_number(ins, "instrument", "rho_minus"),
                                  need_number(ins, "instrument", "rho_plus"),
                                  need_number(ins, "instrument", "r"),
                                  need_number(ins, "instrument", "T")};
            cfg.instrument = s;
            cfg.instrument_r = s.r;
        } else if (type == "quantile_call") {
            reject_unknown(ins, "instrument",
                           {"type", "S0", "K", "upsilon_frac", "lambda_q", "r", "T"});
            occ::QuantileCall s{need_number(ins, "instrument", "S0"),
                                need_number(ins, "instrument", "K"),
                                need_number(ins, "instrument", "upsilon_frac"),
                                need_number(ins, "instrument", "lambda_q"),
                                need_number(ins, "instrument", "r"),
                                need_number(ins, "instrument", "T")};
            cfg.instrument = s;
            cfg.instrument_r = s.r;
        } else {
            throw ConfigError("instrument.type must be step_call, double_step_call or "
                              "quantile_call");
        }
    }

    if (root.contains("numerics")) {
        const json& num = root["numerics"];
        reject_unknown(num, "numerics", {"inversion", "paths"});
        if (num.contains("inversion")) {
            const json& inv = num["inversion"];
            reject_unknown(inv, "numerics.inversion",
                           {"method", "euler_m", "euler_n", "gs_terms", "abscissa",
                            "rounds"});
            const std::string method = inv.value("method", "euler");
            if (method == "euler")
                cfg.inversion.method = occ::InversionMethod::euler;
            else if (method == "gaver-stehfest")
                cfg.inversion.method = occ::InversionMethod::gaver_stehfest;
            else
                throw ConfigError("inversion.method must be euler or gaver-stehfest");
            cfg.inversion.euler_m = static_cast<int>(number_or(inv, "euler_m", 32));
            cfg.inversion.euler_n = static_cast<int>(number_or(inv, "euler_n", 15));
            cfg.inversion.gs_terms = static_cast<int>(number_or(inv, "gs_terms", 14));
            cfg.inversion.abscissa = number_or(inv, "abscissa", 18.4);
            cfg.inversion.rounds = static_cast<int>(number_or(inv, "rounds", 1));
        }
        if (num.contains("paths")) {
            const json& pt = num["paths"];
            reject_unknown(pt, "numerics.paths",
                           {"n_paths", "n_steps", "seed", "antithetic"});
            cfg.paths.n_paths = static_cast<std::size_t>(number_or(pt, "n_paths", 100000));
            cfg.paths.n_steps = static_cast<std::size_t>(number_or(pt, "n_steps", 2000));
            cfg.paths.seed = static_cast<std::uint64_t>(number_or(pt, "seed", 12345));
            cfg.paths.antithetic =
                pt.contains("antithetic") && pt["antithetic"].get<bool>();
        }
    }
    if (root.contains("price")) {
        reject_unknown(root["price"], "price", {"with_mc"});
        cfg.price_with_mc = root["price"].value("with_mc", false);
    }
    if (root.contains("transform")) cfg.transform = root["transform"];
    if (root.contains("roots")) cfg.roots_block = root["roots"];
    return cfg;
}

void finalize_model(RunConfig& cfg) {
    if (cfg.risk_neutral) {
        if (!cfg.instrument)
            throw ConfigError("risk_neutral model needs an instrument block for r");
        cfg.model.mu = occ::risk_neutral_drift(cfg.instrument_r, cfg.model);
    }
}

// Atomic CSV sink: stdout when no path given, temp-file + rename otherwise.
class Output {
public:
    explicit Output(const std::string& path) : path_(path) {
        if (!path_.empty()) {
            tmp_ = path_ + ".tmp";
            file_.open(tmp_, std::ios::trunc);
            if (!file_) throw ConfigError("cannot open output " + tmp_);
        }
    }
    std::ostream& stream() { return path_.empty() ? std::cout : file_; }
    void commit() {
        if (path_.empty()) return;
        file_.flush();
        file_.close();
        std::filesystem::rename(tmp_, path_);
    }

private:
    std::string path_;
    std::string tmp_;
    std::ofstream file_;
};

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string describe(const occ::OptionSpec& spec) {
    if (const auto* s = std::get_if<occ::StepCall>(&spec)) {
        std::ostringstream os;
        os << "step_call,S0=" << s->S0 << ";K=" << s->K << ";L=" << s->L
           << ";rho=" << s->rho << ";r=" << s->r << ";T=" << s->T;
        return os.str();
    }
    if (const auto* s = std::get_if<occ::DoubleStepCall>(&spec)) {
        std::ostringstream os;
        os << "double_step_call,S0=" << s->S0 << ";K=" << s->K << ";L=" << s->L
           << ";U=" << s->U << ";rho_minus=" << s->rho_minus
           << ";rho_plus=" << s->rho_plus << ";r=" << s->r << ";T=" << s->T;
        return os.str();
    }
    const auto& s = std::get<occ::QuantileCall>(spec);
    std::ostringstream os;
    os << "quantile_call,S0=" << s.S0 << ";K=" << s.K
       << ";upsilon_frac=" << s.upsilon_frac << ";lambda_q=" << s.lambda_q
       << ";r=" << s.r << ";T=" << s.T;
    return os.str();
}

int cmd_validate(RunConfig& cfg, Output& out) {
    const auto report = occ::validate(cfg.model);
    out.stream() << "violation\n";
    for (const auto& v : report.violations) out.stream() << v << "\n";
    out.commit();
    return report.ok() ? 0 : 1;
}

int cmd_roots(RunConfig& cfg, Output& out, std::optional<double> alpha_flag) {
    finalize_model(cfg);
    double alpha;
    if (alpha_flag)
        alpha = *alpha_flag;
    else if (!cfg.roots_block.is_null() && cfg.roots_block.contains("alpha"))
        alpha = cfg.roots_block["alpha"].get<double>();
    else
        throw ConfigError("roots needs --alpha or a roots.alpha config entry");
    const auto rs = occ::find_roots(cfg.model, occ::Complex(alpha, 0.0));
    out.stream() << "type,index,real,imag,residual,interlaced\n";
    const char* inter = rs.interlaced ? "true" : "false";
    int i = 1;
    for (const auto& b : rs.betas)
        out.stream() << "beta," << i++ << "," << fmt(b.real()) << "," << fmt(b.imag())
                     << "," << fmt(rs.max_residual) << "," << inter << "\n";
    i = 1;
    for (const auto& g : rs.gammas)
        out.stream() << "gamma," << i++ << "," << fmt(g.real()) << ","
                     << fmt(g.imag()) << "," << fmt(rs.max_residual) << "," << inter
                     << "\n";
    out.commit();
    return 0;
}

int cmd_transform(RunConfig& cfg, Output& out, std::optional<int> grid_flag) {
    finalize_model(cfg);
    if (cfg.transform.is_null()) throw ConfigError("transform needs a transform block");
    const json& t = cfg.transform;
    reject_unknown(t, "transform",
                   {"kind", "alpha", "rho", "rho1", "rho2", "gamma", "h", "H",
                    "x_min", "x_max", "points"});
    const std::string kind = t.value("kind", "interval");
    const occ::Complex alpha(need_number(t, "transform", "alpha"), 0.0);
    const occ::Complex gamma(number_or(t, "gamma", 0.0), 0.0);
    const double h = need_number(t, "transform", "h");
    occ::PiecewiseExpSum w;
    occ::RhoProfile profile;
    if (kind == "interval") {
        const double H = need_number(t, "transform", "H");
        const double rho = need_number(t, "transform", "rho");
        w = occ::interval_occupation_transform(cfg.model, alpha, rho, gamma, h, H);
        profile = {0.0, rho, 0.0};
    } else if (kind == "two_barrier") {
        const double H = need_number(t, "transform", "H");
        const double r1 = need_number(t, "transform", "rho1");
        const double r2 = need_number(t, "transform", "rho2");
        w = occ::two_barrier_occupation_transform(cfg.model, alpha, r1, r2, gamma, h, H);
        profile = {r1, 0.0, r2};
    } else if (kind == "single_barrier") {
        const double r1 = need_number(t, "transform", "rho1");
        const double r2 = need_number(t, "transform", "rho2");
        w = occ::single_barrier_occupation_transform(cfg.model, alpha, r1, r2, gamma, h);
        profile = {r1, 0.0, r2};
    } else {
        throw ConfigError("transform.kind must be interval, two_barrier or single_barrier");
    }
    const double x0 = number_or(t, "x_min", h - 2.0);
    const double x1 = number_or(t, "x_max", (kind == "single_barrier" ? h : w.H) + 2.0);
    int npts = grid_flag ? *grid_flag : static_cast<int>(number_or(t, "points", 101));
    if (npts < 2) npts = 2;
    out.stream() << "x,re_w,im_w\n";
    for (int i = 0; i < npts; ++i) {
        const double x = x0 + (x1 - x0) * i / (npts - 1);
        const occ::Complex v = w.value(x);
        out.stream() << fmt(x) << "," << fmt(v.real()) << "," << fmt(v.imag()) << "\n";
    }
    out.commit();
    return 0;
}

int cmd_price(RunConfig& cfg, Output& out) {
    finalize_model(cfg);
    if (!cfg.instrument) throw ConfigError("price needs an instrument block");
    const double pr = occ::price(cfg.model, *cfg.instrument, cfg.inversion);
    out.stream() << "instrument,parameters,price,mc_mean,mc_stderr,abs_diff,rel_diff\n";
    if (cfg.price_with_mc) {
        const auto mc = occ::mc_price(cfg.model, *cfg.instrument, cfg.paths);
        const double ad = pr - mc.mean;
        out.stream() << describe(*cfg.instrument) << "," << fmt(pr) << ","
                     << fmt(mc.mean) << "," << fmt(mc.stderr_) << "," << fmt(ad) << ","
                     << fmt(std::abs(ad) / std::max(std::abs(mc.mean), 1e-300)) << "\n";
    } else {
        out.stream() << describe(*cfg.instrument) << "," << fmt(pr) << ",,,,\n";
    }
    out.commit();
    return 0;
}

int cmd_mc(RunConfig& cfg, Output& out) {
    finalize_model(cfg);
    if (!cfg.instrument) throw ConfigError("mc needs an instrument block");
    const auto mc = occ::mc_price(cfg.model, *cfg.instrument, cfg.paths);
    out.stream() << "instrument,parameters,estimate,stderr,n_paths,n_steps,seed\n";
    out.stream() << describe(*cfg.instrument) << "," << fmt(mc.mean) << ","
                 << fmt(mc.stderr_) << "," << mc.n << "," << cfg.paths.n_steps << ","
                 << cfg.paths.seed << "\n";
    out.commit();
    return 0;
}

int cmd_invert_test(RunConfig& cfg, Output& out) {
    out.stream() << "pair,argument,expected,got,rel_err\n";
    double worst = 0.0;
    auto row = [&](const std::string& name, const std::string& arg, double expected,
                   double got) {
        const double rel = std::abs(got - expected) / std::max(std::abs(expected), 1e-300);
        worst = std::max(worst, rel);
        out.stream() << name << "," << arg << "," << fmt(expected) << "," << fmt(got)
                     << "," << fmt(rel) << "\n";
    };
    const double g0 = 0.3;
    for (double T : {0.1, 0.5, 1.0, 2.0}) {
        const double got = occ::invert_carson(
            [g0](occ::Complex a) { return a / (a - g0); }, T, cfg.inversion);
        row("exponential", "T=" + fmt(T), std::exp(g0 * T), got);
    }
    for (double T : {0.5, 1.0, 2.0}) {
        const double got =
            occ::invert_carson([](occ::Complex a) { return 1.0 / a; }, T, cfg.inversion);
        row("ramp", "T=" + fmt(T), T, got);
    }
    occ::InversionConfig euler = cfg.inversion;
    euler.method = occ::InversionMethod::euler;
    for (auto [T, k] : {std::pair{0.5, 0.3}, std::pair{1.0, 1.0}}) {
        const double got = occ::invert_double(
            [](occ::Complex a, occ::Complex b) { return 1.0 / ((a - 1.0) * (b + 2.0)); },
            T, k, euler);
        row("separable", "T=" + fmt(T) + ";k=" + fmt(k), std::exp(T - 2.0 * k), got);
    }
    out.commit();
    return worst < 1e-6 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occupation-time option pricing engine"};
    app.require_subcommand(1);
    std::string config_path, output_path;
    std::optional<double> alpha_flag;
    std::optional<int> grid_flag;
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--output", output_path, "CSV output path (stdout when absent)");
    app.add_option("--alpha", alpha_flag, "transform argument for the roots command");
    app.add_option("--grid", grid_flag, "grid point count for the transform command");
    app.add_option("--seed", seed_flag, "Monte Carlo seed override");

    auto* validate = app.add_subcommand("validate", "check the model block");
    auto* roots = app.add_subcommand("roots", "Cramer-Lundberg roots at alpha");
    auto* transform = app.add_subcommand("transform", "tabulate an occupation transform");
    auto* price = app.add_subcommand("price", "invert the instrument's double transform");
    auto* mc = app.add_subcommand("mc", "Monte Carlo estimate for the instrument");
    auto* invtest = app.add_subcommand("invert-test", "closed-form inversion diagnostics");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = parse_config(config_path);
        if (seed_flag) cfg.paths.seed = *seed_flag;
        Output out(output_path);
        if (app.got_subcommand(validate)) return cmd_validate(cfg, out);
        if (app.got_subcommand(roots)) return cmd_roots(cfg, out, alpha_flag);
        if (app.got_subcommand(transform)) return cmd_transform(cfg, out, grid_flag);
        if (app.got_subcommand(price)) return cmd_price(cfg, out);
        if (app.got_subcommand(mc)) return cmd_mc(cfg, out);
        if (app.got_subcommand(invtest)) return cmd_invert_test(cfg, out);
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error,ConfigError," << e.what() << "\n";
        return 1;
    } catch (const occ::DomainError& e) {
        std::cerr << "error," << e.code() << "," << e.what() << "\n";
        return 1;
    } catch (const occ::BarrierOrder& e) {
        std::cerr << "error," << e.code() << "," << e.what() << "\n";
        return 1;
    } catch (const occ::MgfDivergence& e) {
        std::cerr << "error," << e.code() << "," << e.what() << "\n";
        return 1;
    } catch (const occ::Error& e) {
        std::cerr << "error," << e.code() << "," << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error,Unexpected," << e.what() << "\n";
        return 2;
    }
}
