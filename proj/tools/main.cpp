// distseq: simulate | fit | compare-dc
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "distseq/commands.hpp"
#include "distseq/dataset.hpp"

namespace {

using distseq::CommandOptions;

struct Io {
  std::string out;
  std::string format = "table";
  std::string selection = "random";
  std::string pool = "partitioned";
  std::string executor = "sequential";
};

void apply_choices(const Io& io, CommandOptions& o) {
  o.selection = io.selection == "doptimal" ? distseq::Selection::d_optimal : distseq::Selection::random;
  o.pool = io.pool == "shared" ? distseq::PoolMode::shared : distseq::PoolMode::partitioned;
  o.executor =
      io.executor == "parallel" ? distseq::Executor::parallel : distseq::Executor::sequential;
}

void add_common(CLI::App& cmd, CommandOptions& o, Io& io) {
  cmd.add_option("--d", o.d, "Half-width bound: the longest axis is at most 2d")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--alpha", o.alpha, "Miscoverage level")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--m", o.m, "Number of parallel procedures")->check(CLI::PositiveNumber);
  cmd.add_option("--n0", o.n0, "Initial sample size per procedure (default p + 5)");
  cmd.add_option("--selection", io.selection, "Row selection rule")
      ->check(CLI::IsMember({"random", "doptimal"}));
  cmd.add_option("--pool", io.pool, "How procedures share the data")
      ->check(CLI::IsMember({"partitioned", "shared"}));
  cmd.add_option("--executor", io.executor, "sequential (reproducible) or parallel (threads)")
      ->check(CLI::IsMember({"sequential", "parallel"}));
  cmd.add_flag("--ase", o.ase, "Adaptive shrinkage variable selection");
  cmd.add_option("--gamma", o.ase_cfg.gamma, "Shrinkage weight exponent");
  cmd.add_option("--epsilon", o.ase_cfg.epsilon, "Shrinkage threshold");
  cmd.add_option("--lambda-exponent", o.ase_cfg.lambda_exponent,
                 "Penalty decay: lambda(n) = n^-e");
  cmd.add_option("--seed", o.seed, "Random seed (default: fresh entropy, printed)");
  cmd.add_option("--out", io.out, "Write <out>.json and <out>.txt");
  cmd.add_option("--format", io.format, "Format on stdout")
      ->check(CLI::IsMember({"json", "table"}));
  cmd.add_flag("--timing", o.timing, "Include wall-clock timings in JSON");
}

void add_simulation(CLI::App& cmd, CommandOptions& o) {
  cmd.add_option("--scenario", o.scenario, "Data model")
      ->check(CLI::IsMember({"s1", "s2", "ase1", "ase2", "wide20"}));
  cmd.add_option("--reps", o.reps, "Monte-Carlo replications")->check(CLI::PositiveNumber);
  cmd.add_option("--contamination-rho", o.contamination_rho, "Share of rows from the noise model")
      ->check(CLI::Range(0.0, 0.999999));
  cmd.add_option("--pool-size", o.pool_size, "Clean rows per replication");
  cmd.add_option("--threads", o.threads, "Replication worker threads")->check(CLI::PositiveNumber);
}

void emit(const distseq::CommandOutput& result, const Io& io, bool seed_given) {
  if (!seed_given) {
    std::cerr << "seed: " << result.seed << '\n';
  }
  for (const auto& w : result.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  const std::string json = result.json.dump(2) + "\n";
  if (!io.out.empty()) {
    std::ofstream(io.out + ".json") << json;
    std::ofstream(io.out + ".txt") << result.table;
  }
  std::cout << (io.format == "json" ? json : result.table);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed sequential fixed-size confidence sets for linear regression"};
  app.require_subcommand(1);

  CommandOptions sim_opts, fit_opts, dc_opts;
  Io sim_io, fit_io, dc_io;

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo coverage and stopping-time study");
  add_common(*sim, sim_opts, sim_io);
  add_simulation(*sim, sim_opts);

  auto* fit = app.add_subcommand("fit", "Fit M procedures on a CSV pool");
  add_common(*fit, fit_opts, fit_io);
  fit->add_option("--csv", fit_opts.csv, "Input file")->required()->check(CLI::ExistingFile);
  fit->add_option("--response", fit_opts.response, "Response column")->required();
  fit->add_option("--covariates", fit_opts.covariates, "Covariate columns")
      ->required()
      ->delimiter(',');
  fit->add_flag("--standardize,!--no-standardize", fit_opts.standardize,
                "z-score covariates and response (default on)");
  fit->add_flag("--intercept", fit_opts.intercept, "Add an intercept column");

  auto* dc = app.add_subcommand("compare-dc", "Sequential procedures against divide-and-conquer");
  add_common(*dc, dc_opts, dc_io);
  add_simulation(*dc, dc_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  apply_choices(sim_io, sim_opts);
  apply_choices(fit_io, fit_opts);
  apply_choices(dc_io, dc_opts);

  try {
    if (sim->parsed()) {
      emit(distseq::cmd_simulate(sim_opts), sim_io, sim_opts.seed.has_value());
    } else if (fit->parsed()) {
      emit(distseq::cmd_fit(fit_opts), fit_io, fit_opts.seed.has_value());
    } else {
      emit(distseq::cmd_compare_dc(dc_opts), dc_io, dc_opts.seed.has_value());
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
