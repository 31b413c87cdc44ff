#ifndef ICATCMA_BENCH_HPP
#define ICATCMA_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "icatcma/problems.hpp"
#include "icatcma/treatments.hpp"

namespace icatcma::bench {

/// Resolved experiment configuration.
struct RunConfig {
    ProblemKind problem = ProblemKind::F2;
    Index n = 0;
    Index m = 0;
    std::vector<double> alphas{1, 2, 4, 8, 16};
    std::vector<Algorithm> algorithms{Algorithm::CatCMA, Algorithm::WarmStart,
                                      Algorithm::HyperRepresentation, Algorithm::ICatCMA};
    int trials = 100;
    std::int64_t budget = 1'000'000;
    double target = 1e-10;
    TFreezePolicy t_freeze = TFreezePolicy::adaptive(5.0);
    std::uint64_t seed = 0;
    bool trajectory = false;
    int workers = 1;
    std::filesystem::path output_dir = "results";
};

/// Throws std::invalid_argument naming the offending field.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

/// Values given on the command line; unset fields fall back to the config
/// file, then to the defaults.
struct ConfigOverrides {
    std::optional<std::string> problem;
    std::optional<Index> n;
    std::optional<Index> m;
    std::vector<double> alphas;
    std::vector<std::string> algorithms;
    std::optional<int> trials;
    std::optional<std::int64_t> budget;
    std::optional<double> target;
    std::optional<std::string> t_freeze;
    std::optional<std::uint64_t> seed;
    std::optional<bool> trajectory;
    std::optional<int> workers;
    std::optional<std::string> output_dir;
};

/// Merges a JSON config document (may be null) with command-line overrides.
/// Unknown JSON keys are rejected; missing problem/n/m are reported by name.
RunConfig resolve_config(const nlohmann::json& file, const ConfigOverrides& flags);

/// Reads a JSON config file.
nlohmann::json load_config_file(const std::filesystem::path& path);

struct TrajectoryPoint {
    std::int64_t evals = 0;
    double best = 0;
};

struct RunRecord {
    std::string run_id;
    ProblemKind problem = ProblemKind::F2;
    Index n = 0;
    Index m = 0;
    double alpha = 0;
    Algorithm algorithm = Algorithm::CatCMA;
    Index t_freeze = 0;
    std::uint64_t instance_seed = 0;
    std::uint64_t run_seed = 0;
    std::int64_t evals_used = 0;
    double best_value = 0;
    bool success = false;
    double wall_ms = 0;
    std::string diagnostic;  // non-empty when the optimizer aborted
    std::vector<TrajectoryPoint> trajectory;
};

nlohmann::json to_json(const RunRecord& record);

std::uint64_t instance_seed(std::uint64_t base_seed, ProblemKind problem, double alpha,
                            int trial);
std::uint64_t run_seed(std::uint64_t instance_seed, Algorithm algorithm);
std::string make_run_id(ProblemKind problem, double alpha, int trial, Algorithm algorithm);

/// Runs one variant on one instance until success or budget exhaustion.
/// Numerical aborts produce a failed record with a diagnostic.
RunRecord run_single(Algorithm algorithm, const ProblemInstance<double>& instance,
                     const RunConfig& config, std::uint64_t run_seed);

/// Every (alpha, trial) instance is shared by all algorithms. Records are
/// returned in grid order (alpha, trial, algorithm) independent of workers.
std::vector<RunRecord> run_suite(const RunConfig& config);

struct TableRow {
    ProblemKind problem = ProblemKind::F2;
    double alpha = 0;
    Algorithm algorithm = Algorithm::CatCMA;
    int trials = 0;
    int successes = 0;
    double success_rate = 0;
    std::optional<double> median_evals;  // among successful runs
};

std::vector<TableRow> aggregate(const std::vector<RunRecord>& records);

/// Looks up a cell; nullopt when no run of that cell exists.
std::optional<TableRow> find_cell(const std::vector<TableRow>& table, ProblemKind problem,
                                  double alpha, Algorithm algorithm);

/// Writes runs.csv, table.csv, config.json and (when recorded) traj/<run_id>.csv.
void write_results(const std::vector<RunRecord>& records, const std::vector<TableRow>& table,
                   const RunConfig& config, const std::filesystem::path& dir);

void write_runs_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path);
void write_table_csv(const std::vector<TableRow>& table, const std::filesystem::path& path);

/// Parses a runs.csv written by write_runs_csv (trajectories are not restored).
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace icatcma::bench

#endif  // ICATCMA_BENCH_HPP
