#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "hjh/config.hpp"
#include "hjh/parallel.hpp"
#include "hjh/runner.hpp"

namespace {

struct FlagValue {
    std::string section, key, value;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for metric, corrector and homogenization experiments\n"
                 "in random and almost-periodic media"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int threads = 0;
    bool manifest = false;
    app.add_option("--config", config_path, "configuration file (flat key = value sections)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (default: HJH_THREADS or hardware)");
    app.add_flag("--manifest", manifest, "write the fully resolved config next to the outputs");

    std::vector<FlagValue> overrides;
    auto opt = [&overrides](CLI::App* sub, const std::string& flag, const std::string& section,
                            const std::string& key, const std::string& help) {
        sub->add_option_function<std::string>(
            flag,
            [&overrides, section, key](const std::string& v) {
                overrides.push_back({section, key, v});
            },
            help);
    };

    std::string model_config;
    for (const std::string& name : hjh::known_subcommands()) {
        CLI::App* sub = app.add_subcommand(name, hjh::subcommand_help(name));
        sub->add_option("--model-config", model_config, "config file providing the [model] section");
        if (name == "metric") {
            opt(sub, "--mu", "experiment", "mu", "level of the metric problem");
            opt(sub, "--source", "experiment", "source", "source point x,y");
            opt(sub, "--grid-n", "solver", "grid_n", "nodes per side");
            opt(sub, "--h", "solver", "h", "grid spacing");
            opt(sub, "--radius", "solver", "radius", "half-width of the grid");
            opt(sub, "--seed", "experiment", "seed", "realization seed");
            opt(sub, "--oracle", "experiment", "oracle", "none | dijkstra8 | dijkstra16");
        } else if (name == "cell") {
            opt(sub, "--p", "experiment", "p", "slope vector p_x,p_y");
            opt(sub, "--delta", "experiment", "delta", "discount rate");
            opt(sub, "--h", "solver", "cell_h", "grid spacing");
            opt(sub, "--window-radius", "solver", "window_radius", "explicit window half-width");
            opt(sub, "--seed", "experiment", "seed", "realization seed");
        } else if (name == "hbar") {
            opt(sub, "--route", "experiment", "route", "metric | cell | both");
            opt(sub, "--p", "experiment", "p_list", "comma list of |p| values");
            opt(sub, "--directions", "experiment", "directions", "unit directions sampled");
            opt(sub, "--t-ladder", "experiment", "t", "metric-route scale t");
            opt(sub, "--delta-ladder", "experiment", "delta_ladder", "cell-route delta ladder");
            opt(sub, "--seeds", "experiment", "seeds", "Monte Carlo seeds");
        } else if (name == "fluct" || name == "bias") {
            opt(sub, "--mu", "experiment", "mu", "level of the metric problem");
            opt(sub, "--t-ladder", "experiment", "t_ladder", "comma list of scales t");
            opt(sub, "--n", "experiment", "n", "replicas per rung");
            opt(sub, "--base-seed", "experiment", "base_seed", "base seed");
        } else if (name == "gsigma") {
            opt(sub, "--mu", "experiment", "mu", "level of the metric problem");
            opt(sub, "--sigma", "experiment", "sigma_list", "comma list of sigma values");
            opt(sub, "--t", "experiment", "t_list", "comma list of plane distances");
            opt(sub, "--n", "experiment", "n", "replicas");
            opt(sub, "--base-seed", "experiment", "base_seed", "base seed");
        } else if (name == "flatspot") {
            opt(sub, "--delta", "experiment", "delta_list", "comma list of discount rates");
            opt(sub, "--R", "experiment", "R", "ball radius of the bounds");
            opt(sub, "--n", "experiment", "n", "realizations");
            opt(sub, "--base-seed", "experiment", "base_seed", "base seed");
        } else if (name == "subrate") {
            opt(sub, "--delta-ladder", "experiment", "delta_ladder", "comma list of deltas");
            opt(sub, "--n", "experiment", "n", "replicas per rung");
            opt(sub, "--base-seed", "experiment", "base_seed", "base seed");
        } else if (name == "homog") {
            opt(sub, "--u0", "experiment", "u0", "quad | cone | plane");
            opt(sub, "--eps-ladder", "experiment", "eps_ladder", "comma list of epsilons");
            opt(sub, "--T", "experiment", "T", "time horizon");
            opt(sub, "--seeds", "experiment", "seeds", "Monte Carlo seeds");
            opt(sub, "--base-seed", "experiment", "base_seed", "base seed");
        } else if (name == "aprate") {
            opt(sub, "--K", "experiment", "K", "p-ball radius for the moduli");
            opt(sub, "--R-grid", "experiment", "R_grid", "comma list of shift radii");
            opt(sub, "--delta-grid", "experiment", "delta_grid", "comma list of deltas");
            opt(sub, "--eps-ladder", "experiment", "eps_ladder", "comma list of epsilons");
        }
    }

    CLI11_PARSE(app, argc, argv);

    hjh::Config cfg;
    try {
        if (!config_path.empty()) cfg = hjh::Config::load(config_path);
        if (!model_config.empty()) {
            hjh::Config mc = hjh::Config::load(model_config);
            for (const auto& [k, v] : mc.sections().at("model")) cfg.set("model", k, v);
        }
        for (const auto& o : overrides) cfg.set(o.section, o.key, o.value);
        if (!cfg.has("model", "kind")) cfg.set("model", "kind", "h1_potential");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    std::string sub = app.get_subcommands().front()->get_name();
    hjh::RunResult res =
        hjh::run_experiment(sub, cfg, out_dir, hjh::resolve_threads(threads), manifest);
    if (res.exit_code != 0) {
        std::fprintf(stderr, "error: %s\n", res.error.c_str());
        return res.exit_code;
    }
    for (const auto& f : res.files) std::printf("%s\n", f.c_str());
    return 0;
}
