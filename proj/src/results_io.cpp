#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "icatcma/bench.hpp"

namespace icatcma::bench {

namespace {

constexpr const char* kRunsHeader = "run_id,problem,n,m,alpha,algorithm,t_freeze,instance_seed,"
                                    "run_seed,evals_used,best_value,success,wall_ms";
constexpr const char* kTableHeader = "problem,alpha,algorithm,trials,success_rate,median_evals";

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

template <typename T>
T parse_number(const std::string& text, const char* column, std::size_t line)
{
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw std::runtime_error("runs.csv line " + std::to_string(line) + ": bad " + column
                                 + " '" + text + "'");
    return value;
}

double parse_double(const std::string& text, const char* column, std::size_t line)
{
    if (text == "inf")
        return std::numeric_limits<double>::infinity();
    if (text == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    return parse_number<double>(text, column, line);
}

}  // namespace

std::string format_double(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc())
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buffer, ptr);
}

nlohmann::json to_json(const RunRecord& r)
{
    nlohmann::json doc{
        {"run_id", r.run_id},
        {"problem", std::string(to_string(r.problem))},
        {"n", r.n},
        {"m", r.m},
        {"alpha", r.alpha},
        {"algorithm", std::string(to_string(r.algorithm))},
        {"t_freeze", r.t_freeze},
        {"instance_seed", r.instance_seed},
        {"run_seed", r.run_seed},
        {"evals_used", r.evals_used},
        {"best_value", format_double(r.best_value)},
        {"success", r.success},
        {"wall_ms", r.wall_ms},
    };
    if (!r.diagnostic.empty())
        doc["diagnostic"] = r.diagnostic;
    return doc;
}

void write_runs_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << kRunsHeader << '\n';
    for (const RunRecord& r : records) {
        out << r.run_id << ',' << to_string(r.problem) << ',' << r.n << ',' << r.m << ','
            << format_double(r.alpha) << ',' << to_string(r.algorithm) << ',' << r.t_freeze << ','
            << r.instance_seed << ',' << r.run_seed << ',' << r.evals_used << ','
            << format_double(r.best_value) << ',' << (r.success ? 1 : 0) << ','
            << format_double(std::round(r.wall_ms * 1000.0) / 1000.0) << '\n';
    }
    finish(out, path);
}

void write_table_csv(const std::vector<TableRow>& table, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << kTableHeader << '\n';
    for (const TableRow& row : table) {
        out << to_string(row.problem) << ',' << format_double(row.alpha) << ','
            << to_string(row.algorithm) << ',' << row.trials << ','
            << format_double(row.success_rate) << ','
            << (row.median_evals ? format_double(*row.median_evals) : std::string()) << '\n';
    }
    finish(out, path);
}

void write_results(const std::vector<RunRecord>& records, const std::vector<TableRow>& table,
                   const RunConfig& config, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + dir.string() + ": "
                                 + ec.message());
    write_runs_csv(records, dir / "runs.csv");
    write_table_csv(table, dir / "table.csv");

    const auto config_path = dir / "config.json";
    auto config_out = open_for_write(config_path);
    config_out << to_json(config).dump(2) << '\n';
    finish(config_out, config_path);

    bool any_trajectory = false;
    for (const RunRecord& r : records)
        any_trajectory = any_trajectory || !r.trajectory.empty();
    if (!any_trajectory)
        return;
    const auto traj_dir = dir / "traj";
    std::filesystem::create_directories(traj_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + traj_dir.string() + ": "
                                 + ec.message());
    for (const RunRecord& r : records) {
        if (r.trajectory.empty())
            continue;
        const auto path = traj_dir / (r.run_id + ".csv");
        auto out = open_for_write(path);
        out << "evals,best_f\n";
        for (const TrajectoryPoint& p : r.trajectory)
            out << p.evals << ',' << format_double(p.best) << '\n';
        finish(out, path);
    }
}

std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kRunsHeader)
        throw std::runtime_error(path.string() + ": unexpected header, expected '" + kRunsHeader
                                 + "'");
    std::vector<RunRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 13)
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no)
                                     + ": expected 13 columns");
        RunRecord r;
        r.run_id = f[0];
        r.problem = parse_problem_kind(f[1]);
        r.n = parse_number<Index>(f[2], "n", line_no);
        r.m = parse_number<Index>(f[3], "m", line_no);
        r.alpha = parse_double(f[4], "alpha", line_no);
        r.algorithm = parse_algorithm(f[5]);
        r.t_freeze = parse_number<Index>(f[6], "t_freeze", line_no);
        r.instance_seed = parse_number<std::uint64_t>(f[7], "instance_seed", line_no);
        r.run_seed = parse_number<std::uint64_t>(f[8], "run_seed", line_no);
        r.evals_used = parse_number<std::int64_t>(f[9], "evals_used", line_no);
        r.best_value = parse_double(f[10], "best_value", line_no);
        if (f[11] != "0" && f[11] != "1")
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no)
                                     + ": success must be 0 or 1");
        r.success = f[11] == "1";
        r.wall_ms = parse_double(f[12], "wall_ms", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace icatcma::bench
