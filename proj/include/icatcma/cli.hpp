#ifndef ICATCMA_CLI_HPP
#define ICATCMA_CLI_HPP

#include <string>
#include <vector>

#include "CLI11.hpp"

#include "icatcma/bench.hpp"

namespace icatcma::bench {

/// Registers the experiment flags (--problem, --n, ..., --config) on `app`.
void add_config_options(CLI::App& app, ConfigOverrides& flags, std::string& config_path);

/// Loads the --config file (when given) and applies the parsed flags on top.
RunConfig parse_config(const ConfigOverrides& flags, const std::string& config_path);

/// Convenience for tests and scripts: parses flag tokens (without a program
/// name) into a resolved configuration.
RunConfig parse_config(std::vector<std::string> args);

}  // namespace icatcma::bench

#endif  // ICATCMA_CLI_HPP
