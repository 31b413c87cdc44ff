#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "icatcma/bench.hpp"
#include "icatcma/cli.hpp"

using namespace icatcma;
using namespace icatcma::bench;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("icatcma_test_" + name))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        lines.push_back(line);
    return lines;
}

RunConfig small_config()
{
    RunConfig c;
    c.problem = ProblemKind::F2;
    c.n = 3;
    c.m = 3;
    c.alphas = {1, 2};
    c.trials = 3;
    c.budget = 3000;
    return c;
}

// Drops the trailing wall_ms column of every row.
std::string without_wall_time(const std::string& csv)
{
    std::string out;
    for (const auto& line : lines_of(csv))
        out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

RunRecord make_record(double alpha, Algorithm algo, bool success, std::int64_t evals)
{
    RunRecord r;
    r.problem = ProblemKind::F2;
    r.n = r.m = 5;
    r.alpha = alpha;
    r.algorithm = algo;
    r.success = success;
    r.evals_used = evals;
    r.best_value = success ? 1e-11 : 0.5;
    return r;
}

}  // namespace

TEST_CASE("parse_config from flags")
{
    const auto c = parse_config({"--problem", "f2", "--n", "5", "--m", "5", "--alpha", "4",
                                 "--algo", "icatcma", "--trials", "20"});
    CHECK(c.problem == ProblemKind::F2);
    CHECK(c.n == 5);
    CHECK(c.m == 5);
    CHECK(c.alphas == std::vector<double>{4});
    CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::ICatCMA});
    CHECK(c.trials == 20);
    CHECK(c.budget == 1000000);
    CHECK(c.target == 1e-10);
    CHECK(c.t_freeze == TFreezePolicy::adaptive(5));
    CHECK_FALSE(c.trajectory);

    const auto d = parse_config({"--problem", "f3", "--n", "5", "--m", "5", "--alpha", "1",
                                 "--alpha", "16", "--algo", "ws", "--algo", "catcma",
                                 "--t-freeze", "fixed:5000", "--traj", "--workers", "3",
                                 "--seed", "42", "--budget", "5000", "--target", "1e-8",
                                 "--out", "somewhere"});
    CHECK(d.alphas == std::vector<double>{1, 16});
    CHECK(d.algorithms == std::vector<Algorithm>{Algorithm::WarmStart, Algorithm::CatCMA});
    CHECK(d.t_freeze == TFreezePolicy::fixed(5000));
    CHECK(d.trajectory);
    CHECK(d.workers == 3);
    CHECK(d.seed == 42);
    CHECK(d.budget == 5000);
    CHECK(d.target == 1e-8);
    CHECK(d.output_dir == "somewhere");

    const auto all = parse_config({"--problem", "f2", "--n", "5", "--m", "5"});
    CHECK(all.algorithms.size() == 4);
    CHECK(all.trials == 100);
}

TEST_CASE("parse_config errors")
{
    auto message = [](std::vector<std::string> args) {
        try {
            parse_config(std::move(args));
        } catch (const std::exception& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message({"--n", "5", "--m", "5"}).find("'problem'") != std::string::npos);
    CHECK(message({"--problem", "f2", "--m", "5"}).find("'n'") != std::string::npos);
    CHECK(message({"--problem", "f2", "--n", "5"}).find("'m'") != std::string::npos);
    CHECK_FALSE(message({"--problem", "f9", "--n", "5", "--m", "5"}).empty());
    CHECK_FALSE(message({"--problem", "f1", "--n", "5", "--m", "4"}).empty());
    CHECK_FALSE(message({"--problem", "f2", "--n", "5", "--m", "5", "--trials", "0"}).empty());
    CHECK_FALSE(message({"--problem", "f2", "--n", "5", "--m", "5", "--budget", "3"}).empty());
    CHECK_FALSE(message({"--problem", "f2", "--n", "5", "--m", "5", "--t-freeze", "5"}).empty());
    CHECK_FALSE(message({"--problem", "f2", "--n", "5", "--m", "5", "--algo", "x"}).empty());
}

TEST_CASE("config file and precedence")
{
    TempDir dir("config");
    const fs::path file = dir.path / "c.json";
    {
        std::ofstream out(file);
        out << R"({"problem": "f2", "n": 5, "m": 5, "alpha": [1, 4], "algo": "hr",
                   "trials": 100, "t_freeze": "fixed:5000", "traj": true})";
    }
    const auto from_file = parse_config({"--config", file.string()});
    CHECK(from_file.trials == 100);
    CHECK(from_file.alphas == std::vector<double>{1, 4});
    CHECK(from_file.algorithms == std::vector<Algorithm>{Algorithm::HyperRepresentation});
    CHECK(from_file.t_freeze == TFreezePolicy::fixed(5000));
    CHECK(from_file.trajectory);

    const auto overridden = parse_config({"--config", file.string(), "--trials", "20",
                                          "--alpha", "8"});
    CHECK(overridden.trials == 20);
    CHECK(overridden.alphas == std::vector<double>{8});
    CHECK(overridden.algorithms == std::vector<Algorithm>{Algorithm::HyperRepresentation});

    {
        std::ofstream out(file);
        out << R"({"problem": "f2", "n": 5, "m": 5, "colour": "blue"})";
    }
    CHECK_THROWS_WITH_AS(parse_config({"--config", file.string()}),
                         doctest::Contains("colour"), std::invalid_argument);
    {
        std::ofstream out(file);
        out << "{ not json";
    }
    CHECK_THROWS_AS(parse_config({"--config", file.string()}), std::runtime_error);
    CHECK_THROWS_AS(parse_config({"--config", (dir.path / "missing.json").string()}),
                    std::runtime_error);
}

TEST_CASE("config json echo round trips")
{
    auto c = small_config();
    c.t_freeze = TFreezePolicy::adaptive(2.5);
    c.seed = 9;
    const auto back = resolve_config(to_json(c), ConfigOverrides{});
    CHECK(back.problem == c.problem);
    CHECK(back.alphas == c.alphas);
    CHECK(back.algorithms == c.algorithms);
    CHECK(back.trials == c.trials);
    CHECK(back.budget == c.budget);
    CHECK(back.t_freeze == c.t_freeze);
    CHECK(back.seed == c.seed);
}

TEST_CASE("seeds and run ids")
{
    const auto a = instance_seed(0, ProblemKind::F2, 4.0, 0);
    CHECK(a == instance_seed(0, ProblemKind::F2, 4.0, 0));
    CHECK(a != instance_seed(1, ProblemKind::F2, 4.0, 0));
    CHECK(a != instance_seed(0, ProblemKind::F3, 4.0, 0));
    CHECK(a != instance_seed(0, ProblemKind::F2, 8.0, 0));
    CHECK(a != instance_seed(0, ProblemKind::F2, 4.0, 1));
    CHECK(run_seed(a, Algorithm::CatCMA) != run_seed(a, Algorithm::ICatCMA));
    CHECK(make_run_id(ProblemKind::F2, 4.0, 7, Algorithm::ICatCMA) == "f2_a4_t0007_icatcma");
    CHECK(make_run_id(ProblemKind::F2Tanh, 0.5, 12, Algorithm::WarmStart) == "f2tanh_a0.5_t0012_ws");
}

TEST_CASE("run_single")
{
    auto config = small_config();
    const auto inst = generate_instance<double>(ProblemKind::F2, 3, 3, 1.0, 5);

    SUBCASE("huge target succeeds after one generation")
    {
        config.target = 1e9;
        const auto r = run_single(Algorithm::CatCMA, inst, config, 1);
        CHECK(r.success);
        CHECK(r.evals_used == 7);  // lambda for N = 3
    }
    SUBCASE("budget of one population")
    {
        config.budget = 7;
        config.trajectory = true;
        const auto r = run_single(Algorithm::CatCMA, inst, config, 1);
        CHECK(r.evals_used == 7);
        CHECK(r.trajectory.size() == 1);
    }
    SUBCASE("deterministic")
    {
        config.trajectory = true;
        for (auto algo : {Algorithm::CatCMA, Algorithm::WarmStart, Algorithm::HyperRepresentation,
                          Algorithm::ICatCMA}) {
            const auto a = run_single(algo, inst, config, 11);
            const auto b = run_single(algo, inst, config, 11);
            CHECK(a.evals_used == b.evals_used);
            CHECK(a.best_value == b.best_value);
            CHECK(a.t_freeze == b.t_freeze);
            REQUIRE(a.trajectory.size() == b.trajectory.size());
            for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
                CHECK(a.trajectory[i].evals == b.trajectory[i].evals);
                CHECK(a.trajectory[i].best == b.trajectory[i].best);
            }
        }
    }
    SUBCASE("accounting")
    {
        config.trajectory = true;
        for (auto algo : {Algorithm::CatCMA, Algorithm::ICatCMA}) {
            const auto r = run_single(algo, inst, config, 3);
            CHECK(r.success == (r.best_value < config.target));
            CHECK(r.evals_used == r.trajectory.back().evals);
            CHECK(r.evals_used <= config.budget + 20 - 1);
            for (std::size_t i = 1; i < r.trajectory.size(); ++i)
                CHECK(r.trajectory[i].best <= r.trajectory[i - 1].best);
        }
    }
    SUBCASE("mismatched instance")
    {
        const auto other = generate_instance<double>(ProblemKind::F3, 3, 3, 1.0, 5);
        CHECK_THROWS_AS(run_single(Algorithm::CatCMA, other, config, 1), std::invalid_argument);
    }
}

TEST_CASE("run_suite grid and determinism")
{
    auto config = small_config();
    const auto records = run_suite(config);
    REQUIRE(records.size() == 24);
    for (std::size_t i = 0; i < records.size(); i += 4) {
        for (std::size_t k = 1; k < 4; ++k) {
            CHECK(records[i + k].instance_seed == records[i].instance_seed);
            CHECK(records[i + k].alpha == records[i].alpha);
            CHECK(records[i + k].run_seed != records[i].run_seed);
        }
    }
    CHECK(records.front().run_id == "f2_a1_t0000_catcma");
    CHECK(records.back().run_id == "f2_a2_t0002_icatcma");

    config.workers = 8;
    const auto parallel = run_suite(config);
    REQUIRE(parallel.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(parallel[i].run_id == records[i].run_id);
        CHECK(parallel[i].evals_used == records[i].evals_used);
        CHECK(parallel[i].best_value == records[i].best_value);
        CHECK(parallel[i].success == records[i].success);
    }
}

TEST_CASE("aggregate")
{
    std::vector<RunRecord> records{
        make_record(4, Algorithm::CatCMA, true, 100), make_record(4, Algorithm::CatCMA, true, 300),
        make_record(4, Algorithm::CatCMA, false, 1000), make_record(4, Algorithm::CatCMA, true, 200),
        make_record(4, Algorithm::WarmStart, false, 1000),
        make_record(4, Algorithm::WarmStart, false, 1000),
        make_record(1, Algorithm::CatCMA, true, 50), make_record(1, Algorithm::CatCMA, true, 70),
    };
    const auto table = aggregate(records);
    CHECK(table.size() == 3);

    const auto cat4 = find_cell(table, ProblemKind::F2, 4, Algorithm::CatCMA);
    REQUIRE(cat4);
    CHECK(cat4->trials == 4);
    CHECK(cat4->success_rate == 0.75);
    CHECK(cat4->median_evals == 200.0);

    const auto ws4 = find_cell(table, ProblemKind::F2, 4, Algorithm::WarmStart);
    REQUIRE(ws4);
    CHECK(ws4->success_rate == 0.0);
    CHECK_FALSE(ws4->median_evals);

    const auto cat1 = find_cell(table, ProblemKind::F2, 1, Algorithm::CatCMA);
    REQUIRE(cat1);
    CHECK(cat1->median_evals == 60.0);

    CHECK_FALSE(find_cell(table, ProblemKind::F2, 16, Algorithm::CatCMA));
    CHECK(aggregate({}).empty());
}

TEST_CASE("format_double")
{
    CHECK(format_double(4.0) == "4");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1e-10) == "1e-10");
    CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("write_results files")
{
    TempDir dir("results");
    auto config = small_config();
    config.trajectory = true;
    const auto records = run_suite(config);
    const auto table = aggregate(records);
    write_results(records, table, config, dir.path);

    const auto runs = lines_of(slurp(dir.path / "runs.csv"));
    REQUIRE(runs.size() == 25);
    CHECK(runs[0]
          == "run_id,problem,n,m,alpha,algorithm,t_freeze,instance_seed,run_seed,evals_used,"
             "best_value,success,wall_ms");
    for (std::size_t i = 1; i < runs.size(); ++i) {
        CHECK(std::count(runs[i].begin(), runs[i].end(), ',') == 12);
        const auto success = runs[i].substr(0, runs[i].rfind(','));
        const char flag = success.back();
        CHECK((flag == '0' || flag == '1'));
    }

    const auto table_lines = lines_of(slurp(dir.path / "table.csv"));
    REQUIRE(table_lines.size() == 9);
    CHECK(table_lines[0] == "problem,alpha,algorithm,trials,success_rate,median_evals");

    const auto echo = load_config_file(dir.path / "config.json");
    CHECK(echo.at("trials") == 3);
    CHECK(echo.at("problem") == "f2");

    for (const auto& r : records) {
        const auto traj = lines_of(slurp(dir.path / "traj" / (r.run_id + ".csv")));
        REQUIRE(traj.size() == r.trajectory.size() + 1);
        CHECK(traj[0] == "evals,best_f");
    }

    SUBCASE("read back")
    {
        const auto back = read_runs_csv(dir.path / "runs.csv");
        REQUIRE(back.size() == records.size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            CHECK(back[i].run_id == records[i].run_id);
            CHECK(back[i].algorithm == records[i].algorithm);
            CHECK(back[i].alpha == records[i].alpha);
            CHECK(back[i].instance_seed == records[i].instance_seed);
            CHECK(back[i].run_seed == records[i].run_seed);
            CHECK(back[i].evals_used == records[i].evals_used);
            CHECK(back[i].best_value == records[i].best_value);
            CHECK(back[i].success == records[i].success);
            CHECK(back[i].t_freeze == records[i].t_freeze);
        }
        const auto again = aggregate(back);
        REQUIRE(again.size() == table.size());
        for (std::size_t i = 0; i < table.size(); ++i) {
            CHECK(again[i].success_rate == table[i].success_rate);
            CHECK(again[i].median_evals == table[i].median_evals);
        }
    }
    SUBCASE("rerun is byte identical apart from wall time")
    {
        const auto first = slurp(dir.path / "runs.csv");
        const auto first_table = slurp(dir.path / "table.csv");
        const auto rerun = run_suite(config);
        write_results(rerun, aggregate(rerun), config, dir.path);
        CHECK(without_wall_time(slurp(dir.path / "runs.csv")) == without_wall_time(first));
        CHECK(slurp(dir.path / "table.csv") == first_table);
    }
    SUBCASE("bad runs.csv")
    {
        const auto bad = dir.path / "bad.csv";
        {
            std::ofstream out(bad);
            out << "run_id,problem\n";
        }
        CHECK_THROWS_AS(read_runs_csv(bad), std::runtime_error);
        {
            std::ofstream out(bad);
            out << runs[0] << "\nf2_a1_t0000_catcma,f2,3,3,1\n";
        }
        CHECK_THROWS_AS(read_runs_csv(bad), std::runtime_error);
        CHECK_THROWS_AS(read_runs_csv(dir.path / "nope.csv"), std::runtime_error);
    }
}

TEST_CASE("unwritable output directory names the path")
{
    TempDir dir("unwritable");
    const auto blocker = dir.path / "file";
    {
        std::ofstream out(blocker);
        out << "x";
    }
    auto config = small_config();
    CHECK_THROWS_WITH_AS(write_results({}, {}, config, blocker / "sub"),
                         doctest::Contains("file"), std::runtime_error);
}
