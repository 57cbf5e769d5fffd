#include <CLI11.hpp>
#include <cstdio>
#include <json.hpp>

#include "kfp/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    bool has_seed = false;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "JSON configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
    sub->add_option("--seed", opts.seed, "seed override");
}

int execute(const CommonOpts& opts, kfp::RunMode mode) {
    kfp::RunConfig cfg;
    try {
        cfg = kfp::parse_config(opts.config_path);
    } catch (const kfp::ConfigError& e) {
        nlohmann::ordered_json err;
        err["error"] = {{"type", "config"}, {"messages", e.errors}};
        std::fprintf(stderr, "%s\n", err.dump(2).c_str());
        return kfp::kExitConfigError;
    }
    if (cfg.mode != mode) {
        nlohmann::ordered_json err;
        err["error"] = {{"type", "config"},
                        {"messages",
                         {std::string("config mode '") + kfp::to_string(cfg.mode) +
                          "' does not match the requested subcommand"}}};
        std::fprintf(stderr, "%s\n", err.dump(2).c_str());
        return kfp::kExitConfigError;
    }
    if (!opts.out_dir.empty()) {
        cfg.out_dir = opts.out_dir;
        cfg.echo["output_dir"] = opts.out_dir;
    }
    if (opts.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(opts.seed);
        cfg.echo["seed"] = cfg.seed;
    }
    return kfp::run(cfg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Obstacle-problem solver for the kinetic Kolmogorov-Fokker-Planck operator"};
    app.require_subcommand(1);

    CommonOpts solve_opts, verify_opts, conv_opts, oracle_opts;
    CLI::App* solve = app.add_subcommand("solve", "march the obstacle problem");
    add_common(solve, solve_opts);
    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
    add_common(verify, verify_opts);
    CLI::App* conv = app.add_subcommand("convergence", "refinement study against u_exact");
    add_common(conv, conv_opts);
    CLI::App* oracle = app.add_subcommand("oracle", "stochastic cross-validation");
    add_common(oracle, oracle_opts);

    CLI11_PARSE(app, argc, argv);

    if (solve->parsed()) return execute(solve_opts, kfp::RunMode::Solve);
    if (verify->parsed()) return execute(verify_opts, kfp::RunMode::Verify);
    if (conv->parsed()) return execute(conv_opts, kfp::RunMode::Convergence);
    if (oracle->parsed()) return execute(oracle_opts, kfp::RunMode::Oracle);
    return kfp::kExitConfigError;
}
