#include "distseq/commands.hpp"

#include <random>

#include <fmt/format.h>

#include "distseq/aggregate.hpp"
#include "distseq/dataset.hpp"

namespace distseq {

namespace {

nlohmann::json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void exhaustion_warnings(const RunReport& r, CommandOutput& out) {
  if (r.exhausted_reps > 0) {
    out.warnings.push_back(fmt::format(
        "{} of {} replications ran out of data before the stopping criterion was satisfied",
        r.exhausted_reps, r.config.reps));
  }
  if (r.pseudo_inverse_reps > 0) {
    out.warnings.push_back(fmt::format("{} replications needed a pseudo-inverse in the shrinkage set",
                                       r.pseudo_inverse_reps));
  }
}

}  // namespace

std::uint64_t resolve_seed(const CommandOptions& opts) {
  if (opts.seed) {
    return *opts.seed;
  }
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

ScenarioConfig scenario_from_options(const CommandOptions& opts, std::uint64_t seed) {
  ScenarioConfig cfg = scenario_preset(opts.scenario);
  cfg.d = opts.d;
  cfg.alpha = opts.alpha;
  cfg.M = opts.m;
  cfg.n0 = opts.n0;
  cfg.selection = opts.selection;
  cfg.pool_mode = opts.pool;
  cfg.executor = opts.executor;
  if (opts.ase) {
    cfg.ase = opts.ase_cfg;
  } else if (cfg.ase) {
    cfg.ase = opts.ase_cfg;  // preset turns shrinkage on; tuning still comes from flags
  }
  cfg.reps = opts.reps;
  cfg.seed = seed;
  cfg.threads = opts.threads;
  if (opts.contamination_rho) {
    cfg.contamination_rho = *opts.contamination_rho;
  }
  if (opts.pool_size) {
    cfg.pool_size = *opts.pool_size;
  }
  cfg.validate();
  return cfg;
}

CommandOutput cmd_simulate(const CommandOptions& opts) {
  CommandOutput out;
  out.seed = resolve_seed(opts);
  const RunReport report = run_psm_experiment(scenario_from_options(opts, out.seed));
  out.json = to_json(report, opts.timing);
  out.table = to_table(report);
  exhaustion_warnings(report, out);
  return out;
}

CommandOutput cmd_compare_dc(const CommandOptions& opts) {
  CommandOutput out;
  out.seed = resolve_seed(opts);
  ScenarioConfig cfg = scenario_from_options(opts, out.seed);
  if (!opts.contamination_rho) {
    cfg.contamination_rho = 0.15;
  }
  const RunReport psm = run_psm_experiment(cfg);
  const DcReport dc = run_dc(cfg);
  out.json = {{"psm", to_json(psm, opts.timing)}, {"dc", to_json(dc)}};
  out.table = fmt::format("{:<8} {:>8} {:>30} {:>30}\n", "method", "N", "SE", "AD");
  out.table += fmt::format("{:<8} {:>8.12g} {:>30} {:>30}\n", cfg.M == 1 ? "SM" : "PSM",
                           psm.n_stop.mean,
                           fmt::format("{:.12g}({:.12g})", psm.se.mean, psm.se.sd),
                           fmt::format("{:.12g}({:.12g})", psm.ad.mean, psm.ad.sd));
  out.table += fmt::format("{:<8} {:>8} {:>30} {:>30}\n", "DC", dc.N,
                           fmt::format("{:.12g}({:.12g})", dc.se.mean, dc.se.sd),
                           fmt::format("{:.12g}({:.12g})", dc.ad.mean, dc.ad.sd));
  exhaustion_warnings(psm, out);
  if (dc.failed_partitions > 0) {
    out.warnings.push_back(
        fmt::format("{} divide-and-conquer blocks could not be fitted", dc.failed_partitions));
  }
  return out;
}

CommandOutput cmd_fit(const CommandOptions& opts) {
  if (opts.csv.empty() || opts.response.empty() || opts.covariates.empty()) {
    throw std::invalid_argument("fit needs --csv, --response and --covariates");
  }
  CommandOutput out;
  out.seed = resolve_seed(opts);
  const Dataset data =
      load_csv(opts.csv, opts.response, opts.covariates, opts.standardize, opts.intercept);
  if (data.n() < static_cast<std::size_t>(data.p()) + 2) {
    throw DatasetError(fmt::format("{} rows is too few for {} coefficients", data.n(), data.p()));
  }

  ProcedureConfig pc = ProcedureConfig::make(data.p(), opts.d, opts.alpha, opts.m);
  if (opts.n0 != 0) {
    pc.n0 = opts.n0;
  }
  pc.selection = opts.selection;
  if (opts.ase) {
    pc.ase = opts.ase_cfg;
  }
  pc.validate(data.p());

  DataPool pool(data.X, data.y, opts.pool);
  Rng rng = make_rng(out.seed);
  auto handles = partition(pool, static_cast<std::size_t>(opts.m), rng, pc.n0);
  std::vector<Rng> streams;
  for (std::size_t j = 0; j < handles.size(); ++j) {
    streams.push_back(make_rng(out.seed, 0, j + 1));
  }
  const auto results = run_procedures(handles, pc, std::move(streams), opts.executor);
  const CombinedEstimate est = combine(results);
  const auto exact = ellipsoid_exact(est, results, opts.d);
  const auto approx = ellipsoid_approx(est, results, opts.d);

  nlohmann::json procs = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json pj = {{"N", r.N},
                         {"sigma2_hat", r.sigma2_hat},
                         {"mu", r.mu},
                         {"stopped", r.stopped_naturally},
                         {"beta_hat", vec_json(r.beta_hat)}};
    if (opts.timing) {
      pj["seconds"] = r.elapsed_seconds;
    }
    procs.push_back(std::move(pj));
  }

  auto& j = out.json;
  j["seed"] = out.seed;
  j["rows"] = data.n();
  j["dropped_rows"] = data.dropped_rows;
  j["covariates"] = data.covariates;
  j["standardized"] = data.scaling.has_value();
  j["N_star"] = est.N_star;
  j["beta_hat"] = vec_json(est.beta_hat);
  j["sigma2_hat"] = est.sigma2_pooled;
  j["mu_star"] = est.mu_star;
  j["per_procedure"] = procs;
  j["exhausted"] = est.exhausted;
  j["ellipsoid"] = {{"radius", exact.radius},
                    {"max_axis_exact", max_axis(exact)},
                    {"max_axis_approx", max_axis(approx)}};
  const RawCoefficients raw = raw_coefficients(data, est.beta_hat);
  j["raw_scale"] = {{"intercept", raw.intercept}, {"slopes", vec_json(raw.slopes)}};

  std::vector<std::string> selected;
  if (est.indicator_star) {
    const auto ase = ellipsoid_ase(results, opts.d);
    for (Index k = 0; k < data.p(); ++k) {
      if ((*est.indicator_star)(k) != 0) {
        selected.push_back(data.covariates[static_cast<std::size_t>(k)]);
      }
    }
    j["selected"] = selected;
    j["p0_hat"] = est.indicator_star->sum();
    j["ellipsoid"]["radius_ase"] = ase.radius;
    j["ellipsoid"]["max_axis_ase"] = max_axis(ase);
    j["ellipsoid"]["degenerate_ase"] = ase.degenerate;
  }

  std::string& t = out.table;
  t += fmt::format("{:<20} {:>20}\n", "coefficient", "estimate");
  for (Index k = 0; k < data.p(); ++k) {
    t += fmt::format("{:<20} {:>20.12g}\n", data.covariates[static_cast<std::size_t>(k)],
                     est.beta_hat(k));
  }
  t += fmt::format("N* {}  sigma2 {:.12g}  radius {:.12g}\n", est.N_star, est.sigma2_pooled,
                   exact.radius);
  for (std::size_t r = 0; r < results.size(); ++r) {
    t += fmt::format("procedure {} N {}{}\n", r, results[r].N, results[r].stopped_naturally ? "" : " *");
  }
  if (est.indicator_star) {
    t += fmt::format("selected: {}\n", fmt::join(selected, ", "));
  }
  if (est.exhausted) {
    out.warnings.push_back("the stopping criterion is not satisfied; all available data was used");
  }
  return out;
}

}  // namespace distseq
