#include "distseq/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>

#include "distseq/aggregate.hpp"
#include "distseq/linalg.hpp"

namespace distseq {

namespace {

constexpr std::uint64_t kBoundaryStream = 1'000'000;

Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double value : values) {
    v(i++) = value;
  }
  return v;
}

Vector padded(std::initializer_list<double> head, Index p) {
  Vector v = Vector::Zero(p);
  v.head(static_cast<Index>(head.size())) = make_vector(head);
  return v;
}

void fill_rows(Matrix& X, Vector& y, Index begin, Index end, const Vector& beta, double mean,
               double noise_sd, Rng& rng) {
  boost::random::normal_distribution<double> covariate(mean, 1.0);
  boost::random::normal_distribution<double> noise(0.0, 1.0);
  const Index p = X.cols();
  for (Index i = begin; i < end; ++i) {
    X(i, 0) = 1.0;
    for (Index k = 1; k < p; ++k) {
      X(i, k) = covariate(rng);
    }
    const double e = noise(rng);
    y(i) = X.row(i).dot(beta) + noise_sd * e;
  }
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
}

std::vector<std::size_t> shuffled_ids(std::size_t n, Rng& rng) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  shuffle_in_place(ids, rng);
  return ids;
}

// Runs body(rep) for rep in [0, reps) on `threads` workers.
template <typename Body>
void for_each_replication(std::size_t reps, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, reps));
  if (threads == 1) {
    for (std::size_t rep = 0; rep < reps; ++rep) {
      body(rep);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t rep = next++; rep < reps && !failed; rep = next++) {
          try {
            body(rep);
          } catch (...) {
            if (!failed.exchange(true)) {
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

std::string with_sd(const Summary& s) { return fmt::format("{:.12g}({:.12g})", s.mean, s.sd); }

nlohmann::json summary_json(const Summary& s) { return {{"mean", s.mean}, {"sd", s.sd}}; }

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::string_view to_string(Selection s) { return s == Selection::random ? "random" : "doptimal"; }
std::string_view to_string(PoolMode m) {
  return m == PoolMode::partitioned ? "partitioned" : "shared";
}
std::string_view to_string(Executor e) {
  return e == Executor::sequential ? "sequential" : "parallel";
}

void ScenarioConfig::validate() const {
  if (beta0.size() < 1) {
    throw std::invalid_argument("scenario: beta0 is empty");
  }
  if (contamination_rho < 0.0 || contamination_rho >= 1.0) {
    throw std::invalid_argument("scenario: contamination rate must lie in [0, 1)");
  }
  if (contamination_rho > 0.0 && beta_noise.size() != beta0.size()) {
    throw std::invalid_argument("scenario: beta_noise must match beta0 in length");
  }
  if (M < 1 || reps < 1 || pool_size < 1) {
    throw std::invalid_argument("scenario: M, reps and pool size must be positive");
  }
  if (!(noise_sd >= 0.0)) {
    throw std::invalid_argument("scenario: noise sd must be non-negative");
  }
  procedure_config().validate(p());
}

ProcedureConfig ScenarioConfig::procedure_config() const {
  ProcedureConfig pc = ProcedureConfig::make(p(), d, alpha, M);
  if (n0 != 0) {
    pc.n0 = n0;
  }
  pc.selection = selection;
  pc.ase = ase;
  return pc;
}

ScenarioConfig scenario_preset(std::string_view name) {
  ScenarioConfig cfg;
  cfg.name = std::string(name);
  if (name == "s1") {
    cfg.beta0 = make_vector({-1.0, 1.0});
    cfg.beta_noise = make_vector({-5.0, 5.0});
    cfg.covariate_mean = 1.0;
  } else if (name == "s2") {
    cfg.beta0 = make_vector({-1.0, 1.0, 0.7, 0.5, 0.2});
    cfg.beta_noise = make_vector({-5.0, 5.0, 5.0, 5.0, 5.0});
    cfg.covariate_mean = 0.2;
  } else if (name == "ase1") {
    cfg.beta0 = padded({-2.0, 1.0, 1.5, 2.0}, 10);
    cfg.covariate_mean = 0.2;
    cfg.ase = AseConfig{};
  } else if (name == "ase2") {
    cfg.beta0 = padded({-2.0, 2.0, 2.0, 2.0}, 50);
    cfg.covariate_mean = 0.2;
    cfg.ase = AseConfig{};
  } else if (name == "wide20") {
    cfg.beta0 = Vector::Ones(20);
    cfg.covariate_mean = 0.2;
  } else {
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
  }
  return cfg;
}

Sample gen_clean(const ScenarioConfig& cfg, std::size_t n, Rng& rng) {
  if (n < 1) {
    throw std::invalid_argument("gen_clean: n must be at least 1");
  }
  Sample s{Matrix(static_cast<Index>(n), cfg.p()), Vector(static_cast<Index>(n)),
           std::vector<bool>(n, false)};
  fill_rows(s.X, s.y, 0, static_cast<Index>(n), cfg.beta0, cfg.covariate_mean, cfg.noise_sd, rng);
  return s;
}

Sample gen_contaminated(const ScenarioConfig& cfg, Rng& rng) {
  const std::size_t clean = cfg.pool_size;
  const auto noisy =
      static_cast<std::size_t>(std::llround(cfg.contamination_rho * static_cast<double>(clean)));
  if (noisy == 0) {
    return gen_clean(cfg, clean, rng);
  }
  if (cfg.beta_noise.size() != cfg.p()) {
    throw std::invalid_argument("gen_contaminated: beta_noise missing for contaminated scenario");
  }
  const std::size_t total = clean + noisy;
  Matrix X(static_cast<Index>(total), cfg.p());
  Vector y(static_cast<Index>(total));
  fill_rows(X, y, 0, static_cast<Index>(clean), cfg.beta0, cfg.covariate_mean, cfg.noise_sd, rng);
  fill_rows(X, y, static_cast<Index>(clean), static_cast<Index>(total), cfg.beta_noise,
            cfg.covariate_mean, cfg.noise_sd, rng);

  const auto order = shuffled_ids(total, rng);
  Sample s{Matrix(static_cast<Index>(total), cfg.p()), Vector(static_cast<Index>(total)),
           std::vector<bool>(total)};
  for (std::size_t i = 0; i < total; ++i) {
    const auto src = static_cast<Index>(order[i]);
    s.X.row(static_cast<Index>(i)) = X.row(src);
    s.y(static_cast<Index>(i)) = y(src);
    s.contaminated[i] = order[i] >= clean;
  }
  return s;
}

Metrics metrics(const Vector& beta_hat, const Vector& beta0) {
  if (beta_hat.size() != beta0.size()) {
    throw std::invalid_argument("metrics: dimension mismatch");
  }
  const Vector diff = beta_hat - beta0;
  return {diff.squaredNorm(), diff.cwiseAbs().sum()};
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) {
    return s;
  }
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) {
      ss += (v - s.mean) * (v - s.mean);
    }
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

namespace {

struct Audit {
  double axis_exact = 0.0;
  double axis_approx = 0.0;
  double axis_ase = 0.0;
  std::size_t containment_violations = 0;
  bool claims_ok = true;
  bool pseudo_inverse = false;
};

ReplicationRecord run_replication(const ScenarioConfig& cfg, const ProcedureConfig& pc,
                                  std::size_t rep, Audit& audit) {
  Rng rng = make_rng(cfg.seed, rep);
  Sample sample = gen_contaminated(cfg, rng);
  DataPool pool(std::move(sample.X), std::move(sample.y), cfg.pool_mode);
  auto handles = partition(pool, static_cast<std::size_t>(cfg.M), rng, pc.n0);

  std::vector<Rng> streams;
  streams.reserve(handles.size());
  for (std::size_t j = 0; j < handles.size(); ++j) {
    streams.push_back(make_rng(cfg.seed, rep, j + 1));
  }
  const auto results = run_procedures(handles, pc, std::move(streams), cfg.executor);
  const CombinedEstimate est = combine(results);

  ReplicationRecord rec;
  rec.N_star = est.N_star;
  for (const auto& r : results) {
    rec.N.push_back(r.N);
    rec.seconds = std::max(rec.seconds, r.elapsed_seconds);
  }
  rec.exhausted = est.exhausted;

  const auto exact = ellipsoid_exact(est, results, cfg.d);
  const auto approx = ellipsoid_approx(est, results, cfg.d);
  rec.covered_exact = contains(exact, cfg.beta0);
  rec.covered_approx = contains(approx, cfg.beta0);
  const double two_d = 2.0 * cfg.d;
  audit.axis_exact = max_axis(exact) / two_d;
  audit.axis_approx = max_axis(approx) / two_d;

  // The approximate set must sit inside the exact one.
  Rng boundary_rng = make_rng(cfg.seed, rep, kBoundaryStream);
  for (const Vector& z : sample_boundary(approx, cfg.boundary_points, boundary_rng)) {
    const Vector delta = z - exact.center;
    if (delta.dot(exact.shape * delta) > exact.radius * (1.0 + 1e-9)) {
      ++audit.containment_violations;
    }
  }
  audit.claims_ok = claims_consistent(pool, results);

  if (est.indicator_star) {
    const auto ase = ellipsoid_ase(results, cfg.d);
    rec.covered_ase = contains(ase, cfg.beta0);
    rec.p0_hat = est.indicator_star->sum();
    audit.axis_ase = max_axis(ase) / two_d;
    audit.pseudo_inverse = ase.pseudo_inverse_used;
  } else {
    rec.p0_hat = static_cast<int>(cfg.p());
  }
  const Metrics m = metrics(est.beta_hat, cfg.beta0);
  rec.se = m.se;
  rec.ad = m.ad;
  return rec;
}

}  // namespace

RunReport run_psm_experiment(const ScenarioConfig& cfg) {
  cfg.validate();
  const ProcedureConfig pc = cfg.procedure_config();

  std::vector<ReplicationRecord> records(cfg.reps);
  std::vector<Audit> audits(cfg.reps);
  for_each_replication(cfg.reps, cfg.threads,
                       [&](std::size_t rep) { records[rep] = run_replication(cfg, pc, rep, audits[rep]); });

  RunReport report;
  report.config = cfg;
  const double reps = static_cast<double>(cfg.reps);
  std::vector<double> n_star, se, ad, p0, secs;
  std::vector<std::vector<double>> per(static_cast<std::size_t>(cfg.M));
  double exact = 0, approx = 0, ase = 0;
  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    const auto& r = records[rep];
    const auto& a = audits[rep];
    n_star.push_back(static_cast<double>(r.N_star));
    for (std::size_t j = 0; j < r.N.size(); ++j) {
      per[j].push_back(static_cast<double>(r.N[j]));
    }
    se.push_back(r.se);
    ad.push_back(r.ad);
    p0.push_back(r.p0_hat);
    secs.push_back(r.seconds);
    exact += r.covered_exact;
    approx += r.covered_approx;
    ase += r.covered_ase;
    report.exhausted_reps += r.exhausted;
    report.max_axis_ratio_exact = std::max(report.max_axis_ratio_exact, a.axis_exact);
    report.max_axis_ratio_approx = std::max(report.max_axis_ratio_approx, a.axis_approx);
    report.max_axis_ratio_ase = std::max(report.max_axis_ratio_ase, a.axis_ase);
    report.containment_violations += a.containment_violations;
    report.claim_violations += !a.claims_ok;
    report.pseudo_inverse_reps += a.pseudo_inverse;
  }
  report.n_stop = summarize(n_star);
  for (const auto& v : per) {
    report.per_procedure.push_back(summarize(v));
  }
  report.coverage_exact = exact / reps;
  report.coverage_approx = approx / reps;
  if (cfg.ase) {
    report.coverage_ase = ase / reps;
    report.p0_hat = summarize(p0);
  }
  report.se = summarize(se);
  report.ad = summarize(ad);
  report.seconds = summarize(secs);
  if (cfg.keep_records) {
    report.records = std::move(records);
  }
  return report;
}

std::optional<Vector> fit_lse(const Matrix& X, const Vector& y) {
  if (X.rows() < X.cols() + 2) {
    return std::nullopt;
  }
  const Matrix gram = X.transpose() * X;
  try {
    const auto f = factorize_spd(gram);
    return f.inverse * (X.transpose() * y);
  } catch (const RankDeficient&) {
    return std::nullopt;
  }
}

DcReport run_dc(const ScenarioConfig& cfg) {
  if (cfg.beta0.size() < 1 || cfg.M < 1 || cfg.reps < 1) {
    throw std::invalid_argument("run_dc: invalid scenario");
  }
  DcReport report;
  report.config = cfg;
  std::vector<double> se(cfg.reps), ad(cfg.reps);
  std::vector<std::size_t> failures(cfg.reps), sizes(cfg.reps);
  std::vector<bool> usable(cfg.reps, false);

  for_each_replication(cfg.reps, cfg.threads, [&](std::size_t rep) {
    Rng rng = make_rng(cfg.seed, rep);
    const Sample s = gen_contaminated(cfg, rng);
    const std::size_t rows = static_cast<std::size_t>(s.X.rows());
    sizes[rep] = rows;
    const auto order = shuffled_ids(rows, rng);
    const auto M = static_cast<std::size_t>(cfg.M);
    const std::size_t base = rows / M;
    const std::size_t extra = rows % M;

    Vector sum = Vector::Zero(cfg.p());
    std::size_t fitted = 0;
    std::size_t offset = 0;
    for (std::size_t j = 0; j < M; ++j) {
      const std::size_t size = base + (j < extra ? 1 : 0);
      Matrix Xj(static_cast<Index>(size), cfg.p());
      Vector yj(static_cast<Index>(size));
      for (std::size_t i = 0; i < size; ++i) {
        Xj.row(static_cast<Index>(i)) = s.X.row(static_cast<Index>(order[offset + i]));
        yj(static_cast<Index>(i)) = s.y(static_cast<Index>(order[offset + i]));
      }
      offset += size;
      if (auto b = fit_lse(Xj, yj)) {
        sum += *b;
        ++fitted;
      } else {
        ++failures[rep];
      }
    }
    if (fitted > 0) {
      const Metrics m = metrics(sum / static_cast<double>(fitted), cfg.beta0);
      se[rep] = m.se;
      ad[rep] = m.ad;
      usable[rep] = true;
    }
  });

  std::vector<double> se_ok, ad_ok;
  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    report.failed_partitions += failures[rep];
    if (usable[rep]) {
      se_ok.push_back(se[rep]);
      ad_ok.push_back(ad[rep]);
    }
  }
  report.N = sizes.front();
  report.se = summarize(se_ok);
  report.ad = summarize(ad_ok);
  return report;
}

nlohmann::json config_json(const ScenarioConfig& cfg) {
  nlohmann::json j = {{"scenario", cfg.name},
                      {"p", cfg.p()},
                      {"beta0", vector_json(cfg.beta0)},
                      {"covariate_mean", cfg.covariate_mean},
                      {"pool_size", cfg.pool_size},
                      {"contamination_rho", cfg.contamination_rho},
                      {"M", cfg.M},
                      {"d", cfg.d},
                      {"alpha", cfg.alpha},
                      {"n0", cfg.procedure_config().n0},
                      {"selection", to_string(cfg.selection)},
                      {"pool", to_string(cfg.pool_mode)},
                      {"executor", to_string(cfg.executor)},
                      {"reps", cfg.reps},
                      {"seed", cfg.seed}};
  if (cfg.ase) {
    j["ase"] = {{"lambda_exponent", cfg.ase->lambda_exponent},
                {"gamma", cfg.ase->gamma},
                {"epsilon", cfg.ase->epsilon}};
  }
  return j;
}

nlohmann::json to_json(const RunReport& r, bool include_timing) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& s : r.per_procedure) {
    per.push_back(summary_json(s));
  }
  nlohmann::json j = {{"config", config_json(r.config)},
                      {"n_stop", summary_json(r.n_stop)},
                      {"per_procedure", per},
                      {"coverage_exact", r.coverage_exact},
                      {"coverage_approx", r.coverage_approx},
                      {"se", summary_json(r.se)},
                      {"ad", summary_json(r.ad)},
                      {"exhausted_reps", r.exhausted_reps},
                      {"audit",
                       {{"max_axis_ratio_exact", r.max_axis_ratio_exact},
                        {"max_axis_ratio_approx", r.max_axis_ratio_approx},
                        {"max_axis_ratio_ase", r.max_axis_ratio_ase},
                        {"containment_violations", r.containment_violations},
                        {"claim_violations", r.claim_violations},
                        {"pseudo_inverse_reps", r.pseudo_inverse_reps}}}};
  if (r.coverage_ase) {
    j["coverage_ase"] = *r.coverage_ase;
  }
  if (r.p0_hat) {
    j["p0_hat"] = summary_json(*r.p0_hat);
  }
  if (include_timing) {
    j["seconds"] = summary_json(r.seconds);
  }
  return j;
}

nlohmann::json to_json(const DcReport& r) {
  return {{"config", config_json(r.config)},
          {"method", "dc"},
          {"N", r.N},
          {"se", summary_json(r.se)},
          {"ad", summary_json(r.ad)},
          {"failed_partitions", r.failed_partitions}};
}

std::string to_table(const RunReport& r) {
  const auto& c = r.config;
  const bool ase = r.coverage_ase.has_value();
  std::string coverage = ase ? fmt::format("{:.12g}", *r.coverage_ase)
                             : c.M == 1 ? fmt::format("{:.12g}", r.coverage_exact)
                                        : fmt::format("({:.12g},{:.12g})", r.coverage_exact,
                                                      r.coverage_approx);
  std::string out;
  out += fmt::format("{:<8} {:>6} {:>3} {:<6} {:>34} {:>30} {:>30}", "scenario", "d", "M", "method",
                     "stopping time", "coverage probability", "time");
  if (ase) {
    out += fmt::format(" {:>30}", "p0_hat");
  }
  out += '\n';
  out += fmt::format("{:<8} {:>6.12g} {:>3} {:<6} {:>34} {:>30} {:>30}", c.name, c.d, c.M,
                     c.M == 1 ? "SM" : "PSM", with_sd(r.n_stop), coverage, with_sd(r.seconds));
  if (ase) {
    out += fmt::format(" {:>30}", with_sd(*r.p0_hat));
  }
  out += '\n';
  out += fmt::format("SE {}  AD {}  exhausted {}\n", with_sd(r.se), with_sd(r.ad), r.exhausted_reps);
  return out;
}

std::string to_table(const DcReport& r) {
  return fmt::format("{:<8} {:>3} {:<6} {:>8} {:>30} {:>30}\n{:<8} {:>3} {:<6} {:>8} {:>30} {:>30}\n",
                     "scenario", "M", "method", "N", "SE", "AD", r.config.name, r.config.M, "DC",
                     r.N, with_sd(r.se), with_sd(r.ad));
}

}  // namespace distseq
