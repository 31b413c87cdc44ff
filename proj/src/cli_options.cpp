#include <algorithm>

#include "icatcma/cli.hpp"

namespace icatcma::bench {

void add_config_options(CLI::App& app, ConfigOverrides& flags, std::string& config_path)
{
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    app.add_option("--problem", flags.problem, "f1, f2, f2tanh or f3");
    app.add_option("--n", flags.n, "continuous dimension");
    app.add_option("--m", flags.m, "binary dimension");
    app.add_option("--alpha", flags.alphas, "interaction strength (repeatable)");
    app.add_option("--algo", flags.algorithms, "catcma, ws, hr or icatcma (repeatable)");
    app.add_option("--trials", flags.trials, "instances per (alpha, algorithm) cell");
    app.add_option("--budget", flags.budget, "evaluation budget per run");
    app.add_option("--target", flags.target, "success threshold on f (strict)");
    app.add_option("--t-freeze", flags.t_freeze, "adaptive:A or fixed:T");
    app.add_option("--seed", flags.seed, "base seed");
    app.add_flag_callback("--traj", [&flags] { flags.trajectory = true; },
                          "record best-so-far trajectories");
    app.add_option("--workers", flags.workers, "parallel trials");
    app.add_option("--out", flags.output_dir, "output directory");
}

RunConfig parse_config(const ConfigOverrides& flags, const std::string& config_path)
{
    const nlohmann::json file = config_path.empty() ? nlohmann::json() : load_config_file(config_path);
    return resolve_config(file, flags);
}

RunConfig parse_config(std::vector<std::string> args)
{
    CLI::App app{"icatcma-bench"};
    ConfigOverrides flags;
    std::string config_path;
    add_config_options(app, flags, config_path);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(std::string("flags: ") + e.what());
    }
    return parse_config(flags, config_path);
}

}  // namespace icatcma::bench
