#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "distseq/pool.hpp"
#include "distseq/seqcore.hpp"
#include "distseq/types.hpp"

namespace distseq {

/// Synthetic data model and Monte-Carlo settings.
///
/// Rows are x = (1, X_2, ..., X_p) with X_k ~ N(covariate_mean, 1) and
/// y = x^T beta0 + noise_sd * e, e ~ N(0, 1). Contaminated rows use the same
/// covariates with beta_noise in place of beta0.
struct ScenarioConfig {
  std::string name = "custom";
  Vector beta0;
  double covariate_mean = 1.0;
  double noise_sd = 1.0;
  std::size_t pool_size = 6000;
  double contamination_rho = 0.0;
  Vector beta_noise;

  int M = 1;
  double d = 0.2;
  double alpha = 0.05;
  std::size_t n0 = 0;  // 0: p + 5
  Selection selection = Selection::random;
  std::optional<AseConfig> ase;
  PoolMode pool_mode = PoolMode::partitioned;
  Executor executor = Executor::sequential;

  std::size_t reps = 500;
  std::uint64_t seed = 1;
  std::size_t threads = 1;  // replication workers
  std::size_t boundary_points = 100;
  bool keep_records = false;

  Index p() const { return beta0.size(); }
  void validate() const;
  ProcedureConfig procedure_config() const;
};

/// Data models: s1, s2 (plain), ase1, ase2 (sparse, shrinkage on) and
/// wide20 (p = 20, clean; used for the divide-and-conquer sweep over M).
ScenarioConfig scenario_preset(std::string_view name);

struct Sample {
  Matrix X;
  Vector y;
  std::vector<bool> contaminated;
};

Sample gen_clean(const ScenarioConfig& cfg, std::size_t n, Rng& rng);

/// pool_size clean rows plus round(rho * pool_size) rows from the noise model,
/// shuffled together.
Sample gen_contaminated(const ScenarioConfig& cfg, Rng& rng);

struct Metrics {
  double se = 0.0;
  double ad = 0.0;
};

Metrics metrics(const Vector& beta_hat, const Vector& beta0);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

Summary summarize(const std::vector<double>& values);

/// Per-replication outcome; kept only when ScenarioConfig::keep_records is set.
struct ReplicationRecord {
  std::size_t N_star = 0;
  std::vector<std::size_t> N;
  bool covered_exact = false;
  bool covered_approx = false;
  bool covered_ase = false;
  double se = 0.0;
  double ad = 0.0;
  int p0_hat = 0;
  bool exhausted = false;
  double seconds = 0.0;
};

struct RunReport {
  ScenarioConfig config;
  Summary n_stop;
  std::vector<Summary> per_procedure;
  double coverage_exact = 0.0;
  double coverage_approx = 0.0;
  std::optional<double> coverage_ase;
  Summary se;
  Summary ad;
  std::optional<Summary> p0_hat;
  std::size_t exhausted_reps = 0;

  // Geometry audit: largest max_axis / (2d) seen over all replications, and
  // the number of sampled boundary points of the approximate set falling
  // outside the exact set.
  double max_axis_ratio_exact = 0.0;
  double max_axis_ratio_approx = 0.0;
  double max_axis_ratio_ase = 0.0;
  std::size_t containment_violations = 0;
  std::size_t claim_violations = 0;
  std::size_t pseudo_inverse_reps = 0;

  // Wall clock per replication, taken as the slowest procedure.
  Summary seconds;
  std::vector<ReplicationRecord> records;
};

RunReport run_psm_experiment(const ScenarioConfig& cfg);

struct DcReport {
  ScenarioConfig config;
  std::size_t N = 0;
  Summary se;
  Summary ad;
  std::size_t failed_partitions = 0;
};

/// Divide-and-conquer baseline: the whole pool is split into M near-equal
/// blocks, each fitted by least squares, and the fits are averaged unweighted.
DcReport run_dc(const ScenarioConfig& cfg);

/// Least squares on one block; nullopt when the block has fewer than p + 2
/// rows or is rank deficient.
std::optional<Vector> fit_lse(const Matrix& X, const Vector& y);

// Serialization. Timing is excluded from JSON unless requested so that fixed
// seeds give byte-identical output.
nlohmann::json to_json(const RunReport& report, bool include_timing = false);
nlohmann::json to_json(const DcReport& report);
std::string to_table(const RunReport& report);
std::string to_table(const DcReport& report);
nlohmann::json config_json(const ScenarioConfig& cfg);

std::string_view to_string(Selection s);
std::string_view to_string(PoolMode m);
std::string_view to_string(Executor e);

}  // namespace distseq
