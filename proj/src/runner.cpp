#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "icatcma/bench.hpp"

namespace icatcma::bench {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t h, std::uint64_t value)
{
    return splitmix64(h ^ splitmix64(value));
}

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t instance_seed(std::uint64_t base_seed, ProblemKind problem, double alpha, int trial)
{
    std::uint64_t h = splitmix64(base_seed);
    h = combine(h, fnv1a(to_string(problem)));
    h = combine(h, std::bit_cast<std::uint64_t>(alpha + 0.0));  // folds -0 into +0
    return combine(h, static_cast<std::uint64_t>(trial));
}

std::uint64_t run_seed(std::uint64_t instance_seed, Algorithm algorithm)
{
    return combine(instance_seed, fnv1a(to_string(algorithm)));
}

std::string make_run_id(ProblemKind problem, double alpha, int trial, Algorithm algorithm)
{
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%04d", trial);
    return std::string(to_string(problem)) + "_a" + format_double(alpha) + "_t" + buffer + "_"
           + std::string(to_string(algorithm));
}

RunRecord run_single(Algorithm algorithm, const ProblemInstance<double>& instance,
                     const RunConfig& config, std::uint64_t seed)
{
    if (instance.kind != config.problem || instance.n != config.n || instance.m != config.m)
        throw std::invalid_argument("run_single: instance does not match the configuration");

    const auto start = std::chrono::steady_clock::now();
    RunRecord record;
    record.problem = instance.kind;
    record.n = instance.n;
    record.m = instance.m;
    record.alpha = instance.alpha;
    record.algorithm = algorithm;
    record.instance_seed = instance.seed;
    record.run_seed = seed;

    auto objective = [&instance](const BinaryVector& c, const Vector<double>& x) {
        return evaluate(instance, c, x);
    };
    ICatCMA<double> optimizer = make_icatcma<double>(objective, instance.n, instance.m, algorithm,
                                                     config.t_freeze);
    record.t_freeze = optimizer.t_freeze();

    Rng rng(seed);
    try {
        while (should_terminate(optimizer.state(), config.budget, config.target)
               == Termination::Continue) {
            optimizer.step(rng);
            if (config.trajectory)
                record.trajectory.push_back(
                    {optimizer.state().evals_used, optimizer.state().best_value});
        }
    } catch (const NumericalFailure& e) {
        record.diagnostic = std::string("numerical-failure: ") + e.what();
    }

    record.evals_used = optimizer.objective_calls();
    record.best_value = optimizer.state().best_value;
    record.success = record.best_value < config.target;
    record.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now()
                                                               - start)
                         .count();
    return record;
}

std::vector<RunRecord> run_suite(const RunConfig& config)
{
    validate(config);

    struct Task {
        double alpha;
        int trial;
        Algorithm algorithm;
        std::uint64_t instance_seed;
    };
    std::vector<Task> tasks;
    std::set<std::uint64_t> seeds;
    for (const double alpha : config.alphas) {
        for (int trial = 0; trial < config.trials; ++trial) {
            const std::uint64_t iseed = instance_seed(config.seed, config.problem, alpha, trial);
            if (!seeds.insert(iseed).second)
                throw std::runtime_error("run_suite: instance seed collision at alpha "
                                         + format_double(alpha) + ", trial "
                                         + std::to_string(trial));
            for (const Algorithm algo : config.algorithms)
                tasks.push_back({alpha, trial, algo, iseed});
        }
    }

    std::vector<RunRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                const Task& task = tasks[i];
                // Instances are cheap to regenerate; each worker builds its own copy.
                const auto instance = generate_instance<double>(config.problem, config.n, config.m,
                                                                task.alpha, task.instance_seed);
                RunRecord record = run_single(task.algorithm, instance, config,
                                              run_seed(task.instance_seed, task.algorithm));
                record.run_id = make_run_id(config.problem, task.alpha, task.trial,
                                            task.algorithm);
                records[i] = std::move(record);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };

    const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(tasks.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);
    return records;
}

std::vector<TableRow> aggregate(const std::vector<RunRecord>& records)
{
    using Key = std::tuple<int, double, int>;
    std::map<Key, std::pair<TableRow, std::vector<std::int64_t>>> cells;
    for (const RunRecord& r : records) {
        auto& [row, evals] = cells[{static_cast<int>(r.problem), r.alpha,
                                    static_cast<int>(r.algorithm)}];
        row.problem = r.problem;
        row.alpha = r.alpha;
        row.algorithm = r.algorithm;
        ++row.trials;
        if (r.success) {
            ++row.successes;
            evals.push_back(r.evals_used);
        }
    }

    std::vector<TableRow> table;
    for (auto& [key, cell] : cells) {
        auto& [row, evals] = cell;
        row.success_rate = double(row.successes) / double(row.trials);
        if (!evals.empty()) {
            std::sort(evals.begin(), evals.end());
            const std::size_t mid = evals.size() / 2;
            row.median_evals = evals.size() % 2 ? double(evals[mid])
                                                : 0.5 * double(evals[mid - 1] + evals[mid]);
        }
        table.push_back(row);
    }
    return table;
}

std::optional<TableRow> find_cell(const std::vector<TableRow>& table, ProblemKind problem,
                                  double alpha, Algorithm algorithm)
{
    for (const TableRow& row : table)
        if (row.problem == problem && row.alpha == alpha && row.algorithm == algorithm)
            return row;
    return std::nullopt;
}

}  // namespace icatcma::bench
