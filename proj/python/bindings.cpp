#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "distseq/aggregate.hpp"
#include "distseq/commands.hpp"
#include "distseq/linalg.hpp"
#include "distseq/pool.hpp"
#include "distseq/seqcore.hpp"
#include "distseq/shrinkage.hpp"
#include "distseq/simlab.hpp"

namespace py = pybind11;
using namespace distseq;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Selection parse_selection(const std::string& s) {
  if (s == "random") return Selection::random;
  if (s == "doptimal") return Selection::d_optimal;
  throw std::invalid_argument("selection must be 'random' or 'doptimal'");
}

PoolMode parse_pool(const std::string& s) {
  if (s == "partitioned") return PoolMode::partitioned;
  if (s == "shared") return PoolMode::shared;
  throw std::invalid_argument("pool must be 'partitioned' or 'shared'");
}

Executor parse_executor(const std::string& s) {
  if (s == "sequential") return Executor::sequential;
  if (s == "parallel") return Executor::parallel;
  throw std::invalid_argument("executor must be 'sequential' or 'parallel'");
}

py::dict ellipsoid_dict(const ConfidenceEllipsoid& e) {
  py::dict d;
  d["center"] = e.center;
  d["shape"] = e.shape;
  d["radius"] = e.radius;
  d["max_axis"] = max_axis(e);
  if (e.active) d["active"] = Eigen::VectorXi(*e.active);
  d["degenerate"] = e.degenerate;
  return d;
}

// M sequential procedures on one in-memory pool, merged.
py::dict fit(const Matrix& X, const Vector& y, int M, double d, double alpha, const std::string& selection,
             bool ase, std::uint64_t seed, const std::string& pool_mode, const std::string& executor,
             std::size_t n0) {
  if (X.rows() != y.size()) throw std::invalid_argument("X and y disagree on the number of rows");
  ProcedureConfig pc = ProcedureConfig::make(X.cols(), d, alpha, M);
  if (n0 != 0) pc.n0 = n0;
  pc.selection = parse_selection(selection);
  if (ase) pc.ase = AseConfig{};
  pc.validate(X.cols());

  std::vector<ProcedureResult> results;
  {
    py::gil_scoped_release nogil;
    DataPool pool(X, y, parse_pool(pool_mode));
    Rng rng = make_rng(seed);
    auto handles = partition(pool, static_cast<std::size_t>(M), rng, pc.n0);
    std::vector<Rng> streams;
    for (std::size_t j = 0; j < handles.size(); ++j) streams.push_back(make_rng(seed, 0, j + 1));
    results = run_procedures(handles, pc, std::move(streams), parse_executor(executor));
  }
  const CombinedEstimate est = combine(results);

  py::list procs;
  for (const auto& r : results) {
    py::dict p;
    p["N"] = r.N;
    p["beta_hat"] = r.beta_hat;
    p["sigma2_hat"] = r.sigma2_hat;
    p["mu"] = r.mu;
    p["stopped"] = r.stopped_naturally;
    p["claimed_ids"] = r.claimed_ids;
    if (r.indicator) p["indicator"] = Eigen::VectorXi(*r.indicator);
    procs.append(p);
  }
  py::dict out;
  out["N_star"] = est.N_star;
  out["beta_hat"] = est.beta_hat;
  out["rho"] = est.rho;
  out["mu_star"] = est.mu_star;
  out["sigma2_hat"] = est.sigma2_pooled;
  out["exhausted"] = est.exhausted;
  out["per_procedure"] = procs;
  out["exact"] = ellipsoid_dict(ellipsoid_exact(est, results, d));
  out["approx"] = ellipsoid_dict(ellipsoid_approx(est, results, d));
  if (est.indicator_star) {
    out["indicator"] = Eigen::VectorXi(*est.indicator_star);
    out["ase"] = ellipsoid_dict(ellipsoid_ase(results, d));
  }
  return out;
}

ScenarioConfig scenario(const std::string& name, int M, double d, double alpha, const std::string& selection,
                        std::size_t reps, std::uint64_t seed, double rho, std::size_t pool_size,
                        const std::string& executor) {
  ScenarioConfig cfg = scenario_preset(name);
  cfg.M = M;
  cfg.d = d;
  cfg.alpha = alpha;
  cfg.selection = parse_selection(selection);
  cfg.reps = reps;
  cfg.seed = seed;
  cfg.contamination_rho = rho;
  if (pool_size != 0) cfg.pool_size = pool_size;
  cfg.executor = parse_executor(executor);
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_distseq, m) {
  m.doc() = "Distributed sequential fixed-size confidence sets for linear regression";

  py::register_exception<RankDeficient>(m, "RankDeficient", PyExc_ArithmeticError);
  py::register_exception<UndefinedVariance>(m, "UndefinedVariance", PyExc_ArithmeticError);
  py::register_exception<SetupError>(m, "SetupError", PyExc_ValueError);

  py::class_<GramState>(m, "GramState")
      .def(py::init<Index, std::size_t>(), py::arg("p"), py::arg("refresh_every") = kDefaultRefreshEvery)
      .def("absorb", &GramState::absorb, py::arg("x"), py::arg("y"))
      .def("refresh", &GramState::refresh)
      .def_property_readonly("n", &GramState::n)
      .def_property_readonly("p", &GramState::p)
      .def_property_readonly("invertible", &GramState::invertible)
      .def_property_readonly("gram", &GramState::gram)
      .def_property_readonly("xty", &GramState::xty)
      .def_property_readonly("gram_inv", &GramState::gram_inv)
      .def_property_readonly("log_det", &GramState::log_det)
      .def("beta_hat", [](const GramState& s) { return beta_hat(s); })
      .def("sigma2_hat", [](const GramState& s) { return sigma2_hat(s); })
      .def("mu", [](const GramState& s) { return mu_n(s); });

  m.def("factorize_spd", [](const Matrix& a) {
    const Factorization f = factorize_spd(a);
    return py::make_tuple(f.inverse, f.log_det);
  }, "Inverse and log-determinant of an SPD matrix.");
  m.def("min_eig", &min_eig);
  m.def("max_eig", &max_eig);
  m.def("chi2_quantile", &chi2_quantile, py::arg("dof"), py::arg("prob"));
  m.def("stopping_inequality", &stopping_inequality, py::arg("n"), py::arg("sigma2"), py::arg("mu"),
        py::arg("a_tilde_sq"), py::arg("d"));
  m.def("d_optimal_score", [](const Vector& x, const Matrix& gram_inv) { return d_optimal_score(x, gram_inv); });
  m.def("shrink", [](const Vector& beta, std::size_t n, double lambda_exponent, double gamma, double epsilon) {
    AseConfig cfg{lambda_exponent, gamma, epsilon};
    cfg.validate();
    const AseState s = shrink(beta, n, cfg);
    return py::make_tuple(Eigen::VectorXi(s.indicator), s.beta_star);
  }, py::arg("beta"), py::arg("n"), py::arg("lambda_exponent") = 0.75, py::arg("gamma") = 1.0,
        py::arg("epsilon") = 1.0);

  m.def("contains", [](const Vector& center, const Matrix& shape, double radius, const Vector& z) {
    ConfidenceEllipsoid e;
    e.center = center;
    e.shape = shape;
    e.radius = radius;
    return contains(e, z);
  }, py::arg("center"), py::arg("shape"), py::arg("radius"), py::arg("z"));

  m.def("fit", &fit, py::arg("X"), py::arg("y"), py::arg("M") = 1, py::arg("d") = 0.2,
        py::arg("alpha") = 0.05, py::arg("selection") = "random", py::arg("ase") = false,
        py::arg("seed") = 1, py::arg("pool") = "partitioned", py::arg("executor") = "sequential",
        py::arg("n0") = 0);

  m.def("gen_clean", [](const std::string& name, std::size_t n, std::uint64_t seed) {
    ScenarioConfig cfg = scenario_preset(name);
    Rng rng = make_rng(seed);
    Sample s = gen_clean(cfg, n, rng);
    return py::make_tuple(s.X, s.y, cfg.beta0);
  }, py::arg("scenario"), py::arg("n"), py::arg("seed") = 1);

  m.def("simulate", [](const std::string& name, int M, double d, double alpha, const std::string& selection,
                       std::size_t reps, std::uint64_t seed, double rho, std::size_t pool_size,
                       const std::string& executor) {
    const ScenarioConfig cfg = scenario(name, M, d, alpha, selection, reps, seed, rho, pool_size, executor);
    RunReport r;
    {
      py::gil_scoped_release nogil;
      r = run_psm_experiment(cfg);
    }
    return to_python(to_json(r));
  }, py::arg("scenario") = "s1", py::arg("M") = 1, py::arg("d") = 0.2, py::arg("alpha") = 0.05,
        py::arg("selection") = "random", py::arg("reps") = 500, py::arg("seed") = 1, py::arg("rho") = 0.0,
        py::arg("pool_size") = 0, py::arg("executor") = "sequential");

  m.def("divide_and_conquer", [](const std::string& name, int M, std::size_t reps, std::uint64_t seed,
                                 double rho, std::size_t pool_size) {
    const ScenarioConfig cfg = scenario(name, M, 0.2, 0.05, "random", reps, seed, rho, pool_size, "sequential");
    DcReport r;
    {
      py::gil_scoped_release nogil;
      r = run_dc(cfg);
    }
    return to_python(to_json(r));
  }, py::arg("scenario") = "s1", py::arg("M") = 2, py::arg("reps") = 500, py::arg("seed") = 1,
        py::arg("rho") = 0.0, py::arg("pool_size") = 0);
}
