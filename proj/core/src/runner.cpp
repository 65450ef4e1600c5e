#include "hjh/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hjh/almost_periodic.hpp"
#include "hjh/cell.hpp"
#include "hjh/effective.hpp"
#include "hjh/hj.hpp"
#include "hjh/metric.hpp"
#include "hjh/stats.hpp"

namespace fs = std::filesystem;

namespace hjh {

namespace {

constexpr const char* kCodeVersion = "hjhomog 0.1.0";

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& header, std::vector<std::string>& files)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path);
        files.push_back(path);
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out_ << ",";
            out_ << cells[k];
        }
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

std::string fd(double x) { return format_double(x); }

GridSpec grid_from_config(Config& cfg, int dim) {
    double radius = cfg.get_double_or("solver", "radius", 8.0);
    int grid_n = cfg.get_int_or("solver", "grid_n", 0);
    double h;
    if (grid_n > 1) {
        h = 2 * radius / (grid_n - 1);
        cfg.set_double("solver", "h", h);
    } else {
        h = cfg.get_double_or("solver", "h", 0.1);
    }
    return GridSpec::centered({0, 0}, radius, h, dim);
}

CellOptions cell_options_from_config(Config& cfg) {
    CellOptions o;
    o.h = cfg.get_double_or("solver", "cell_h", 0.25);
    o.window_radius = cfg.get_double_or("solver", "window_radius", 0.0);
    o.win_mult = cfg.get_double_or("solver", "win_mult", 4.0);
    o.win_cap = cfg.get_double_or("solver", "win_cap", 400.0);
    o.max_sweeps = cfg.get_int_or("solver", "max_sweeps", 100000);
    return o;
}

MetricRunOptions metric_options_from_config(Config& cfg) {
    MetricRunOptions o;
    o.h = cfg.get_double_or("solver", "h", 0.125);
    o.window_factor = cfg.get_double_or("solver", "window_factor", 1.35);
    o.window_pad = cfg.get_double_or("solver", "window_pad", 3.0);
    return o;
}

void run_metric(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    double mu = cfg.get_double_or("experiment", "mu", 1.0);
    std::uint64_t seed = cfg.get_u64_or("experiment", "seed", 1);
    auto src = cfg.get_list_or("experiment", "source", {0.0, 0.0});
    std::string oracle = cfg.get_or("experiment", "oracle", "none");
    GridSpec grid = grid_from_config(cfg, model.dimension());

    double radius = cfg.get_double("solver", "radius");
    RandomField field = sample_field(model, Box::centered({0, 0}, radius + 2), seed);
    Vec source{src[0], src.size() > 1 ? src[1] : 0.0};

    GridFunction m;
    if (oracle == "none") {
        m = solve_metric(field, model, mu, {source}, grid).values;
    } else if (oracle == "dijkstra16" || oracle == "dijkstra8") {
        m = dijkstra_oracle(field, model, mu, {source}, grid, oracle == "dijkstra16" ? 16 : 8);
    } else {
        throw std::invalid_argument("[experiment] oracle: must be none, dijkstra8 or dijkstra16");
    }

    CsvWriter csv(dir + "/metric.csv", "x,y,m", files);
    const GridSpec& g = m.grid();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Vec y = g.node(i, j);
            csv.row({fd(y.x), fd(y.y), fd(m.at(i, j))});
        }
}

void run_cell(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    double delta = cfg.get_double_or("experiment", "delta", 0.1);
    std::uint64_t seed = cfg.get_u64_or("experiment", "seed", 1);
    auto pv = cfg.get_list_or("experiment", "p", {1.0, 0.0});
    CellOptions opts = cell_options_from_config(cfg);

    RandomField field = sample_field(model, Box::centered({0, 0}, 1e6), seed);
    CellSolution sol = solve_cell(field, model, {pv[0], pv.size() > 1 ? pv[1] : 0.0}, delta, opts);

    CsvWriter csv(dir + "/cell.csv", "x,y,v,delta_v", files);
    const GridSpec& g = sol.grid();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Vec y = g.node(i, j);
            double v = sol.values.at(i, j);
            csv.row({fd(y.x), fd(y.y), fd(v), fd(delta * v)});
        }
}

void run_hbar(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    std::string route = cfg.get_or("experiment", "route", "both");
    auto p_list = cfg.get_list_or("experiment", "p_list", {0.0, 0.5, 1.0});
    int directions = cfg.get_int_or("experiment", "directions", 64);
    double t = cfg.get_double_or("experiment", "t", 16.0);
    auto delta_ladder = cfg.get_list_or("experiment", "delta_ladder", {0.3, 0.15, 0.075});
    int seeds = cfg.get_int_or("experiment", "seeds", 4);
    std::uint64_t base_seed = cfg.get_u64_or("experiment", "base_seed", 12345);
    double mu_hi = cfg.get_double_or("experiment", "mu_hi", 8.0);
    MetricRunOptions mopts = metric_options_from_config(cfg);
    CellOptions copts = cell_options_from_config(cfg);

    CsvWriter csv(dir + "/hbar.csv", "route,p_x,p_y,value,ci_low,ci_high,n_seeds", files);
    for (double pr : p_list) {
        Vec p{pr, 0.0};
        if (route == "metric" || route == "both") {
            HbarEstimate est =
                hbar_from_metric(model, p, kMuFloor, mu_hi, directions, t, seeds, base_seed, mopts);
            csv.row({"metric", fd(p.x), fd(p.y), fd(est.value), fd(est.ci_low), fd(est.ci_high),
                     std::to_string(est.n_seeds)});
        }
        if (route == "cell" || route == "both") {
            HbarEstimate est = hbar_from_cell(model, p, delta_ladder, seeds, base_seed, copts);
            csv.row({"cell", fd(p.x), fd(p.y), fd(est.value), fd(est.ci_low), fd(est.ci_high),
                     std::to_string(est.n_seeds)});
        }
    }
}

void run_fluct(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    double mu = cfg.get_double_or("experiment", "mu", 1.0);
    auto t_ladder = cfg.get_list_or("experiment", "t_ladder", {8.0, 16.0, 32.0});
    int n = cfg.get_int_or("experiment", "n", 100);
    std::uint64_t base_seed = cfg.get_u64_or("experiment", "base_seed", 12345);
    MetricRunOptions mopts = metric_options_from_config(cfg);

    FluctuationResult res = fluctuation_experiment(model, mu, {1, 0}, t_ladder, n, base_seed, mopts);

    CsvWriter raw(dir + "/fluct.csv", "experiment,seed,t,mu,m", files);
    for (std::size_t k = 0; k < t_ladder.size(); ++k)
        for (int s = 0; s < n; ++s)
            raw.row({"fluct", std::to_string(replica_seed(base_seed, experiment_id("fluct"), s)),
                     fd(t_ladder[k]), fd(mu), fd(res.samples[k][s])});

    CsvWriter sum(dir + "/fluct_summary.csv",
                  "t,mu,n,mean,variance,lambda_05,exc_05,lambda_10,exc_10,lambda_15,exc_15,"
                  "lambda_20,exc_20,var_envelope_C,var_envelope_ok,tail_envelope_C,tail_envelope_ok",
                  files);
    for (const auto& r : res.records) {
        std::vector<std::string> row{fd(r.t), fd(r.mu), std::to_string(r.n), fd(r.mean),
                                     fd(r.variance)};
        for (auto& [l, e] : r.tail_counts) {
            row.push_back(fd(l));
            row.push_back(fd(e));
        }
        row.push_back(fd(res.variance_envelope_C));
        row.push_back(res.variance_envelope_ok ? "1" : "0");
        row.push_back(fd(res.tail_envelope_C));
        row.push_back(res.tail_envelope_ok ? "1" : "0");
        sum.row(row);
    }
}

void run_bias(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    double mu = cfg.get_double_or("experiment", "mu", 1.0);
    auto t_ladder = cfg.get_list_or("experiment", "t_ladder", {6.0, 12.0, 24.0});
    int n = cfg.get_int_or("experiment", "n", 100);
    std::uint64_t base_seed = cfg.get_u64_or("experiment", "base_seed", 12345);
    MetricRunOptions mopts = metric_options_from_config(cfg);

    BiasResult res = bias_experiment(model, mu, t_ladder, n, base_seed, mopts);

    CsvWriter raw(dir + "/bias.csv", "experiment,seed,t,mu,m", files);
    for (std::size_t k = 0; k < t_ladder.size(); ++k)
        for (int s = 0; s < n; ++s)
            raw.row({"bias", std::to_string(replica_seed(base_seed, experiment_id("bias"), s)),
                     fd(t_ladder[k]), fd(mu), fd(res.samples[k][s])});

    CsvWriter sum(dir + "/bias_summary.csv",
                  "t,mean,se,bias,mbar_ref,one_sided_ok,growth_exponent,growth_sublinear", files);
    for (std::size_t k = 0; k < t_ladder.size(); ++k)
        sum.row({fd(t_ladder[k]), fd(res.means[k]), fd(res.ses[k]), fd(res.bias[k]),
                 fd(res.mbar_ref), res.one_sided_ok ? "1" : "0", fd(res.growth.exponent),
                 res.growth_sublinear ? "1" : "0"});
}

void run_gsigma(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    double mu = cfg.get_double_or("experiment", "mu", 1.0);
    auto sigmas = cfg.get_list_or("experiment", "sigma_list", {0.5, 1.0});
    auto ts = cfg.get_list_or("experiment", "t_list", {4.0, 8.0});
    int n = cfg.get_int_or("experiment", "n", 24);
    std::uint64_t base_seed = cfg.get_u64_or("experiment", "base_seed", 12345);
    MetricRunOptions mopts = metric_options_from_config(cfg);

    std::vector<GSigmaRecord> records;
    for (double t : ts)
        for (double s : sigmas)
            records.push_back(g_sigma_estimate(model, mu, s, t, n, base_seed, mopts));
    GSigmaSandwich sandwich = g_sigma_sandwich(records, mu);

    CsvWriter csv(dir + "/gsigma.csv",
                  "experiment,sigma,t,n,G_hat,g_hat,Em_hat,upper_ok,lower_ok,C_upper,C_lower",
                  files);
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        csv.row({"gsigma", fd(r.sigma), fd(r.t), std::to_string(r.n), fd(r.G_hat), fd(r.g_hat),
                 fd(r.Em_hat), sandwich.upper_ok[k] ? "1" : "0", sandwich.lower_ok[k] ? "1" : "0",
                 fd(sandwich.C_upper), fd(sandwich.C_lower)});
    }
}

void run_flatspot(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    auto deltas = cfg.get_list_or("experiment", "delta_list", {0.1, 0.05});
    double R = cfg.get_double_or("experiment", "R", 6.0);
    int n = cfg.get_int_or("experiment", "n", 20);
    std::uint64_t base_seed = cfg.get_u64_or("experiment", "base_seed", 12345);
    CellOptions copts = cell_options_from_config(cfg);

    double C_cal = cfg.get_double_or("experiment", "C_cal", 0.0);
    if (C_cal <= 0) {
        C_cal = calibrate_flat_spot_constant(copts);
        cfg.set_double("experiment", "C_cal", C_cal);
    }

    CsvWriter csv(dir + "/flatspot.csv",
                  "experiment,seed,delta,R,measured,lower,upper,sup_H0,pass", files);
    for (double delta : deltas)
        for (int s = 0; s < n; ++s) {
            std::uint64_t seed = replica_seed(base_seed, experiment_id("flatspot"), s);
            RandomField field = sample_field(model, Box::centered({0, 0}, 1e6), seed);
            FlatSpotReport rep = flat_spot_sandwich(field, model, delta, R, C_cal, copts);
            csv.row({"flatspot", std::to_string(seed), fd(delta), fd(R), fd(rep.measured),
                     fd(rep.lower), fd(rep.upper), fd(rep.sup_H0), rep.pass ? "1" : "0"});
        }
}

void run_subrate(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    auto deltas = cfg.get_list_or("experiment", "delta_ladder", {0.4, 0.2, 0.1, 0.05});
    int n = cfg.get_int_or("experiment", "n", 16);
    std::uint64_t base_seed = cfg.get_u64_or("experiment", "base_seed", 12345);
    int tail_samples = cfg.get_int_or("experiment", "tail_samples", 2000);
    auto lambda_grid = cfg.get_list_or("experiment", "tail_lambda_grid",
                                       {0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8});
    CellOptions copts = cell_options_from_config(cfg);

    TailLaw tail = estimate_tail(model, lambda_grid, tail_samples, base_seed);
    SubballisticResult res = subballistic_rate(model, deltas, n, base_seed, tail, copts);

    CsvWriter raw(dir + "/subrate.csv", "experiment,seed,delta,value", files);
    for (std::size_t k = 0; k < deltas.size(); ++k)
        for (int s = 0; s < n; ++s)
            raw.row({"subrate", std::to_string(replica_seed(base_seed, experiment_id("subrate"), s)),
                     fd(deltas[k]), fd(res.samples[k][s])});

    CsvWriter sum(dir + "/subrate_summary.csv",
                  "delta,mean_magnitude,se,fit_exponent,theta,alpha_envelope,envelope_ok", files);
    for (std::size_t k = 0; k < deltas.size(); ++k)
        sum.row({fd(deltas[k]), fd(res.mean_magnitude[k]), fd(res.ses[k]), fd(res.fit.exponent),
                 fd(res.theta), fd(res.alpha_envelope), res.envelope_ok ? "1" : "0"});
}

HbarTable hbar_table_for(Config& cfg, const HamiltonianModel& model) {
    auto delta_ladder = cfg.get_list_or("hbar", "delta_ladder", {0.3, 0.15});
    double r_max = cfg.get_double_or("hbar", "r_max", 2.5);
    int n_r = cfg.get_int_or("hbar", "n_r", 10);
    CellOptions copts;
    copts.h = cfg.get_double_or("hbar", "cell_h", 0.25);
    copts.periodic = cfg.get_int_or("hbar", "periodic_cell", 0) != 0;
    if (copts.periodic) copts.window_radius = 0.5 * model.spec().period;
    return hbar_table_from_cell(model, delta_ladder, r_max, n_r, copts);
}

void run_homog(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    std::string u0_kind = cfg.get_or("experiment", "u0", "quad");
    auto eps_ladder = cfg.get_list_or("experiment", "eps_ladder", {0.4, 0.2, 0.1});
    double T = cfg.get_double_or("experiment", "T", 1.0);
    int seeds = cfg.get_int_or("experiment", "seeds", 8);
    std::uint64_t base_seed = cfg.get_u64_or("experiment", "base_seed", 12345);

    U0Spec u0;
    u0.K = cfg.get_double_or("experiment", "u0_K", 2.0);
    if (u0_kind == "quad") u0.kind = InitialData::quad;
    else if (u0_kind == "cone") u0.kind = InitialData::cone;
    else if (u0_kind == "plane") {
        u0.kind = InitialData::plane;
        auto pv = cfg.get_list_or("experiment", "u0_p", {0.7, 0.3});
        u0.p = {pv[0], pv.size() > 1 ? pv[1] : 0.0};
    } else {
        throw std::invalid_argument("[experiment] u0: must be quad, cone or plane");
    }

    HjOptions hopts;
    hopts.h = cfg.get_double_or("solver", "hj_h", 0.05);
    hopts.n_frames = cfg.get_int_or("solver", "n_frames", 8);

    HbarTable table;
    if (model.kind() == ModelKind::deterministic) {
        // the effective Hamiltonian of a homogeneous medium is itself
        for (int k = 0; k <= 40; ++k) {
            double r = (1.2 * u0.lipschitz() + 0.5) * k / 40.0 * 2;
            RandomField f0 = sample_field(model, Box::centered({0, 0}, 4), 0);
            table.r.push_back(r);
            table.H.push_back(eval_H_unchecked(model, f0, {r, 0}, {0, 0}));
        }
    } else {
        table = hbar_table_for(cfg, model);
    }

    HomogenizationResult res =
        homogenization_error(model, table, u0, eps_ladder, T, seeds, base_seed, hopts);

    CsvWriter csv(dir + "/homog.csv", "eps,seed,sup_error", files);
    CsvWriter tim(dir + "/homog_timing.csv", "eps,seed,runtime", files);
    for (std::size_t k = 0; k < eps_ladder.size(); ++k)
        for (std::size_t s = 0; s < res.seed_errors[k].size(); ++s) {
            std::string seed = std::to_string(replica_seed(base_seed, experiment_id("homog"), s));
            csv.row({fd(eps_ladder[k]), seed, fd(res.seed_errors[k][s])});
            tim.row({fd(eps_ladder[k]), seed, fd(res.seed_runtimes[k][s])});
        }

    CsvWriter sum(dir + "/homog_summary.csv",
                  "eps,mean_error,se,fit_exponent,envelope_C,envelope_ok,decreasing_beyond_2se",
                  files);
    for (std::size_t k = 0; k < eps_ladder.size(); ++k)
        sum.row({fd(eps_ladder[k]), fd(res.mean_error[k]), fd(res.ses[k]), fd(res.fit.exponent),
                 fd(res.envelope_C), res.envelope_ok ? "1" : "0",
                 res.decreasing_beyond_2se ? "1" : "0"});
}

void run_aprate(Config& cfg, const std::string& dir, std::vector<std::string>& files) {
    HamiltonianModel model = model_from_config(cfg);
    double K = cfg.get_double_or("experiment", "K", 1.0);
    auto R_grid = cfg.get_list_or("experiment", "R_grid", {0.25, 0.5, 1.0, 2.0, 4.0, 8.0});
    auto delta_grid = cfg.get_list_or("experiment", "delta_grid", {0.2, 0.1, 0.05});
    auto eps_ladder = cfg.get_list_or("experiment", "eps_ladder", {0.4, 0.2, 0.1});
    double T = cfg.get_double_or("experiment", "T", 1.0);

    double L = compute_LK(model, K);
    auto rho_table = compute_rho(model, L, R_grid);
    APModulus mod = compute_eta(rho_table, L, delta_grid);
    mod.L = L;

    cfg.set_int("hbar", "periodic_cell",
                model.spec().potential == PotentialKind::periodic ? 1 : 0);
    HbarTable table = hbar_table_for(cfg, model);

    U0Spec u0;
    u0.kind = InitialData::cone;
    u0.K = cfg.get_double_or("experiment", "u0_K", 1.0);

    APRateOptions opts;
    opts.osc_delta_grid = delta_grid;
    opts.hj.h = cfg.get_double_or("solver", "hj_h", 0.05);
    opts.cell.h = cfg.get_double_or("solver", "cell_h", 0.02);
    APRateReport rep = ap_rate_check(model, mod, table, u0, eps_ladder, T, opts);

    CsvWriter rho_csv(dir + "/aprate_rho.csv", "R,rho", files);
    for (auto& [R, rho] : rho_table) rho_csv.row({fd(R), fd(rho)});

    CsvWriter eta_csv(dir + "/aprate_eta.csv", "delta,eta,table_limited", files);
    for (std::size_t k = 0; k < mod.eta_table.size(); ++k)
        eta_csv.row({fd(mod.eta_table[k].first), fd(mod.eta_table[k].second),
                     mod.eta_table_limited[k] ? "1" : "0"});

    CsvWriter osc_csv(dir + "/aprate_osc.csv", "delta,osc,eta_bound,ok", files);
    for (auto& c : rep.oscillation)
        osc_csv.row({fd(c.delta), fd(c.osc), fd(c.eta_bound), c.ok ? "1" : "0"});

    CsvWriter rate_csv(dir + "/aprate_rate.csv", "eps,error,envelope_C,envelope_ok", files);
    for (std::size_t k = 0; k < rep.eps_ladder.size(); ++k)
        rate_csv.row({fd(rep.eps_ladder[k]), fd(rep.errors[k]), fd(rep.envelope_C),
                      rep.envelope_ok ? "1" : "0"});
}

}  // namespace

const std::vector<std::string>& known_subcommands() {
    static const std::vector<std::string> cmds = {"metric",   "cell",    "hbar",    "fluct",
                                                  "bias",     "gsigma",  "flatspot", "subrate",
                                                  "homog",    "aprate"};
    return cmds;
}

std::string subcommand_help(const std::string& sub) {
    if (sub == "metric")
        return "Solve the metric problem; metric.csv columns: x,y,m. Set [experiment] "
               "oracle = dijkstra16 for the lattice shortest-path oracle.";
    if (sub == "cell")
        return "Solve the discounted corrector problem; cell.csv columns: x,y,v,delta_v.";
    if (sub == "hbar")
        return "Estimate the effective Hamiltonian; hbar.csv columns: "
               "route,p_x,p_y,value,ci_low,ci_high,n_seeds.";
    if (sub == "fluct")
        return "Fluctuations of the point-to-point cost; fluct.csv: experiment,seed,t,mu,m; "
               "fluct_summary.csv has variance and exceedance columns plus envelope checks.";
    if (sub == "bias")
        return "One-sided bias of the mean cost; bias.csv: experiment,seed,t,mu,m; "
               "bias_summary.csv: t,mean,se,bias,mbar_ref,one_sided_ok,growth_exponent,...";
    if (sub == "gsigma")
        return "Softmin plane functional; gsigma.csv: "
               "experiment,sigma,t,n,G_hat,g_hat,Em_hat,upper_ok,lower_ok,C_upper,C_lower.";
    if (sub == "flatspot")
        return "Per-realization sandwich for the flat-spot value; flatspot.csv: "
               "experiment,seed,delta,R,measured,lower,upper,sup_H0,pass.";
    if (sub == "subrate")
        return "Decay of the flat-spot value vs delta; subrate.csv: experiment,seed,delta,value; "
               "subrate_summary.csv adds the fit and tail-law envelope.";
    if (sub == "homog")
        return "Homogenization error vs epsilon; homog.csv: eps,seed,sup_error (wall time in "
               "homog_timing.csv); homog_summary.csv has the fit and envelope columns.";
    if (sub == "aprate")
        return "Almost-periodic moduli and deterministic rate check; writes aprate_rho.csv, "
               "aprate_eta.csv, aprate_osc.csv, aprate_rate.csv.";
    return "";
}

RunResult run_experiment(const std::string& subcommand, Config cfg, const std::string& out_dir,
                         int threads, bool write_manifest) {
    RunResult result;
    (void)threads;  // replica loops read HJH_THREADS through parallel_for

    auto t0 = std::chrono::steady_clock::now();
    try {
        fs::create_directories(out_dir);
        if (subcommand == "metric") run_metric(cfg, out_dir, result.files);
        else if (subcommand == "cell") run_cell(cfg, out_dir, result.files);
        else if (subcommand == "hbar") run_hbar(cfg, out_dir, result.files);
        else if (subcommand == "fluct") run_fluct(cfg, out_dir, result.files);
        else if (subcommand == "bias") run_bias(cfg, out_dir, result.files);
        else if (subcommand == "gsigma") run_gsigma(cfg, out_dir, result.files);
        else if (subcommand == "flatspot") run_flatspot(cfg, out_dir, result.files);
        else if (subcommand == "subrate") run_subrate(cfg, out_dir, result.files);
        else if (subcommand == "homog") run_homog(cfg, out_dir, result.files);
        else if (subcommand == "aprate") run_aprate(cfg, out_dir, result.files);
        else throw std::invalid_argument("unknown subcommand: " + subcommand);
    } catch (const std::exception& e) {
        // remove partial outputs, leave a machine-readable error file
        for (const auto& f : result.files) {
            std::error_code ec;
            fs::remove(f, ec);
        }
        result.files.clear();
        result.exit_code = 1;
        result.error = e.what();
        std::ofstream err(out_dir + "/error.txt");
        err << "subcommand: " << subcommand << "\n";
        err << "error: " << e.what() << "\n";
        return result;
    }

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (write_manifest) {
        cfg.set("run", "subcommand", subcommand);
        cfg.set("run", "code_version", kCodeVersion);
        std::string path = out_dir + "/manifest.ini";
        cfg.save(path, "wall_clock_s = " + format_double(wall));
        result.files.push_back(path);
    }
    return result;
}

}  // namespace hjh
