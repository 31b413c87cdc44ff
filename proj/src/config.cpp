#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "icatcma/bench.hpp"

namespace icatcma::bench {

namespace {

const std::set<std::string> kKnownKeys{"problem", "n",       "m",    "alpha",   "algo",
                                       "trials",  "budget",  "target", "t_freeze", "seed",
                                       "traj",    "workers", "out"};

template <typename T>
T get_field(const nlohmann::json& doc, const char* key)
{
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

std::vector<double> get_alphas(const nlohmann::json& doc)
{
    const auto& node = doc.at("alpha");
    if (node.is_number())
        return {node.get<double>()};
    return get_field<std::vector<double>>(doc, "alpha");
}

std::vector<std::string> get_algos(const nlohmann::json& doc)
{
    const auto& node = doc.at("algo");
    if (node.is_string())
        return {node.get<std::string>()};
    return get_field<std::vector<std::string>>(doc, "algo");
}

}  // namespace

void validate(const RunConfig& config)
{
    if (config.n < 1)
        throw std::invalid_argument("config: n must be >= 1");
    if (config.m < 1)
        throw std::invalid_argument("config: m must be >= 1");
    if (requires_square(config.problem) && config.n != config.m)
        throw std::invalid_argument("config: problem " + std::string(to_string(config.problem))
                                    + " requires n == m");
    if (config.alphas.empty())
        throw std::invalid_argument("config: alpha list is empty");
    for (const double a : config.alphas)
        if (!(a >= 0) || !std::isfinite(a))
            throw std::invalid_argument("config: alpha must be finite and >= 0");
    if (config.algorithms.empty())
        throw std::invalid_argument("config: algo list is empty");
    if (config.trials < 1)
        throw std::invalid_argument("config: trials must be >= 1");
    if (!(config.target > 0))
        throw std::invalid_argument("config: target must be > 0");
    if (config.workers < 1)
        throw std::invalid_argument("config: workers must be >= 1");
    for (const Algorithm algo : config.algorithms) {
        const Index ell = uses_hyper_representation(algo) ? affine_dim(config.n, config.m)
                                                          : config.n;
        const Index lambda = default_hyperparameters<double>(ell).lambda;
        if (config.budget < lambda)
            throw std::invalid_argument("config: budget " + std::to_string(config.budget)
                                        + " is below the population size "
                                        + std::to_string(lambda) + " of "
                                        + std::string(to_string(algo)));
    }
}

nlohmann::json to_json(const RunConfig& config)
{
    nlohmann::json algos = nlohmann::json::array();
    for (const Algorithm a : config.algorithms)
        algos.push_back(std::string(to_string(a)));
    return {
        {"problem", std::string(to_string(config.problem))},
        {"n", config.n},
        {"m", config.m},
        {"alpha", config.alphas},
        {"algo", algos},
        {"trials", config.trials},
        {"budget", config.budget},
        {"target", config.target},
        {"t_freeze", config.t_freeze.to_string()},
        {"seed", config.seed},
        {"traj", config.trajectory},
        {"workers", config.workers},
        {"out", config.output_dir.string()},
    };
}

nlohmann::json load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config file " + path.string() + " is not valid JSON: "
                                 + e.what());
    }
}

RunConfig resolve_config(const nlohmann::json& file, const ConfigOverrides& flags)
{
    if (!file.is_null() && !file.is_object())
        throw std::invalid_argument("config: top level must be a JSON object");
    if (file.is_object())
        for (const auto& item : file.items())
            if (!kKnownKeys.contains(item.key()))
                throw std::invalid_argument("config: unknown key '" + item.key() + "'");
    auto has = [&](const char* key) { return file.is_object() && file.contains(key); };

    RunConfig config;

    std::optional<std::string> problem = flags.problem;
    if (!problem && has("problem"))
        problem = get_field<std::string>(file, "problem");
    if (!problem)
        throw std::invalid_argument("config: missing required key 'problem'");
    config.problem = parse_problem_kind(*problem);

    std::optional<Index> n = flags.n;
    if (!n && has("n"))
        n = get_field<Index>(file, "n");
    if (!n)
        throw std::invalid_argument("config: missing required key 'n'");
    config.n = *n;

    std::optional<Index> m = flags.m;
    if (!m && has("m"))
        m = get_field<Index>(file, "m");
    if (!m)
        throw std::invalid_argument("config: missing required key 'm'");
    config.m = *m;

    if (!flags.alphas.empty())
        config.alphas = flags.alphas;
    else if (has("alpha"))
        config.alphas = get_alphas(file);

    std::vector<std::string> algos = flags.algorithms;
    if (algos.empty() && has("algo"))
        algos = get_algos(file);
    if (!algos.empty()) {
        config.algorithms.clear();
        for (const auto& name : algos)
            config.algorithms.push_back(parse_algorithm(name));
    }

    config.trials = flags.trials ? *flags.trials
                                 : (has("trials") ? get_field<int>(file, "trials") : config.trials);
    config.budget = flags.budget ? *flags.budget
                                 : (has("budget") ? get_field<std::int64_t>(file, "budget")
                                                  : config.budget);
    config.target = flags.target ? *flags.target
                                 : (has("target") ? get_field<double>(file, "target")
                                                  : config.target);
    if (flags.t_freeze)
        config.t_freeze = TFreezePolicy::parse(*flags.t_freeze);
    else if (has("t_freeze"))
        config.t_freeze = TFreezePolicy::parse(get_field<std::string>(file, "t_freeze"));
    config.seed = flags.seed ? *flags.seed
                             : (has("seed") ? get_field<std::uint64_t>(file, "seed") : config.seed);
    config.trajectory = flags.trajectory ? *flags.trajectory
                                         : (has("traj") ? get_field<bool>(file, "traj")
                                                        : config.trajectory);
    config.workers = flags.workers ? *flags.workers
                                   : (has("workers") ? get_field<int>(file, "workers")
                                                     : config.workers);
    if (flags.output_dir)
        config.output_dir = *flags.output_dir;
    else if (has("out"))
        config.output_dir = get_field<std::string>(file, "out");

    validate(config);
    return config;
}

}  // namespace icatcma::bench
