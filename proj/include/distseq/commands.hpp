#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "distseq/pool.hpp"
#include "distseq/seqcore.hpp"
#include "distseq/simlab.hpp"

namespace distseq {

/// Everything the command line can set. Unset optionals fall back to the
/// scenario preset (simulate, compare-dc) or to library defaults (fit).
struct CommandOptions {
  std::string scenario = "s1";
  double d = 0.2;
  double alpha = 0.05;
  int m = 1;
  std::size_t n0 = 0;
  Selection selection = Selection::random;
  PoolMode pool = PoolMode::partitioned;
  Executor executor = Executor::sequential;
  bool ase = false;
  AseConfig ase_cfg;
  std::size_t reps = 500;
  std::optional<std::uint64_t> seed;
  std::optional<double> contamination_rho;
  std::optional<std::size_t> pool_size;
  std::size_t threads = 1;
  bool timing = false;

  std::string csv;
  std::string response;
  std::vector<std::string> covariates;
  bool standardize = true;
  bool intercept = false;
};

struct CommandOutput {
  nlohmann::json json;
  std::string table;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
};

/// Seed from the options, or a fresh one from std::random_device.
std::uint64_t resolve_seed(const CommandOptions& opts);

ScenarioConfig scenario_from_options(const CommandOptions& opts, std::uint64_t seed);

CommandOutput cmd_simulate(const CommandOptions& opts);
CommandOutput cmd_fit(const CommandOptions& opts);
CommandOutput cmd_compare_dc(const CommandOptions& opts);

}  // namespace distseq
