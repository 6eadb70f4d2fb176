#include <doctest.h>

#include "distseq/pool.hpp"
#include "distseq/seqcore.hpp"
#include "support.hpp"

using namespace distseq;

TEST_SUITE("seqcore") {

TEST_CASE("orthogonal design") {
  GramState s(2);
  s.absorb(Vector::Unit(2, 0), 2.0);
  s.absorb(Vector::Unit(2, 1), -1.0);
  CHECK(beta_hat(s)(0) == doctest::Approx(2.0));
  CHECK(beta_hat(s)(1) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(sigma2_hat(s), UndefinedVariance);
}

TEST_CASE("noise-free data is fitted exactly") {
  std::mt19937_64 g(1);
  const Matrix X = testsupport::random_matrix(g, 30, 3);
  const Vector b0 = (Vector(3) << -1.0, 1.0, 0.5).finished();
  const GramState s = testsupport::state_from(X, X * b0);
  CHECK((beta_hat(s) - b0).norm() < 1e-12);
  CHECK(sigma2_hat(s) < 1e-10);
}

TEST_CASE("estimates agree with a dense solve") {
  std::mt19937_64 g(2);
  Matrix X = testsupport::random_matrix(g, 50, 2);
  X.col(0).setOnes();
  const Vector y = X * (Vector(2) << -1.0, 1.0).finished() + testsupport::random_matrix(g, 50, 1);
  const GramState s = testsupport::state_from(X, y);
  const Vector direct = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  CHECK((beta_hat(s) - direct).norm() / direct.norm() < 1e-10);
  const double rss = (y - X * direct).squaredNorm();
  CHECK(sigma2_hat(s) == doctest::Approx(rss / 48.0).epsilon(1e-10));
}

TEST_CASE("residual variance by hand") {
  // x = (1, t) through the points (0,0), (1,1), (2,3).
  Matrix X(3, 2);
  X << 1, 0, 1, 1, 1, 2;
  const Vector y = (Vector(3) << 0.0, 1.0, 3.0).finished();
  const GramState s = testsupport::state_from(X, y);
  // Line -1/6 + 3/2 t; residuals 1/6, -1/3, 1/6; RSS = 1/6.
  CHECK(beta_hat(s)(0) == doctest::Approx(-1.0 / 6.0));
  CHECK(beta_hat(s)(1) == doctest::Approx(1.5));
  CHECK(sigma2_hat(s) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("variance concentrates") {
  std::mt19937_64 g(3);
  Matrix X = testsupport::random_matrix(g, 10'000, 2);
  X.col(0).setOnes();
  const Vector y = X * Vector::Ones(2) + testsupport::random_matrix(g, 10'000, 1);
  const double s2 = sigma2_hat(testsupport::state_from(X, y));
  CHECK(s2 > 0.9);
  CHECK(s2 < 1.1);
}

TEST_CASE("mu is the largest eigenvalue of n gram^-1") {
  auto with_gram_over_n = [](const Matrix& a) {
    // two rows whose outer products sum to 2a, so gram / n = a
    Eigen::LLT<Matrix> llt(2.0 * a);
    const Matrix L = llt.matrixL();
    GramState s(2);
    s.absorb(L.col(0), 0.0);
    s.absorb(L.col(1), 0.0);
    return mu_n(s);
  };
  CHECK(with_gram_over_n(Matrix::Identity(2, 2)) == doctest::Approx(1.0));
  Matrix a(2, 2);
  a << 1, 1, 1, 2;
  CHECK(with_gram_over_n(a) == doctest::Approx(2.0 / (3.0 - std::sqrt(5.0))));
  CHECK(with_gram_over_n(Vector(Vector::LinSpaced(2, 4.0, 0.25)).asDiagonal().toDenseMatrix()) ==
        doctest::Approx(4.0));
}

TEST_CASE("stopping inequality by direct evaluation") {
  const double mu = (3.0 + std::sqrt(5.0)) / 2.0;
  CHECK_FALSE(stopping_inequality(100, 1.0, mu, 5.991465, 0.2));
  CHECK(stopping_inequality(400, 1.0, mu, 5.991465, 0.2));
  const double dn = 400.0;
  CHECK(0.04 * dn / (5.991465 * mu) == doctest::Approx(1.02).epsilon(1e-3));
}

TEST_CASE("no stop before n0") {
  ProcedureConfig cfg = ProcedureConfig::make(2, 100.0, 0.05, 1);
  cfg.n0 = 10;
  GramState s(2);
  for (int i = 0; i < 9; ++i) s.absorb((Vector(2) << 1.0, i).finished(), i);
  CHECK_FALSE(should_stop(s, cfg));
  s.absorb((Vector(2) << 1.0, 9.0).finished(), 9.0);
  CHECK(should_stop(s, cfg));
}

TEST_CASE("config defaults and validation") {
  const ProcedureConfig cfg = ProcedureConfig::make(2, 0.2, 0.05, 5);
  CHECK(cfg.n0 == 7);
  CHECK(cfg.a_tilde_sq * 5 == doctest::Approx(-2.0 * std::log(0.05)));
  ProcedureConfig bad = cfg;
  bad.d = 0.0;
  CHECK_THROWS(bad.validate(2));
  bad = cfg;
  bad.n0 = 3;
  CHECK_THROWS(bad.validate(2));
}

TEST_CASE("exhausted pool is flagged") {
  std::mt19937_64 g(4);
  ProcedureConfig cfg = ProcedureConfig::make(2, 0.01, 0.05, 1);
  Matrix X = testsupport::random_matrix(g, static_cast<long>(cfg.n0), 2);
  DataPool pool(X, testsupport::random_matrix(g, X.rows(), 1));
  Rng rng = make_rng(1);
  auto hs = partition(pool, 1, rng);
  const ProcedureResult r = run_procedure(hs[0], cfg, make_rng(2));
  CHECK_FALSE(r.stopped_naturally);
  CHECK(r.N == cfg.n0);
}

TEST_CASE("too few visible rows") {
  ProcedureConfig cfg = ProcedureConfig::make(2, 0.2, 0.05, 1);
  DataPool pool(Matrix::Ones(3, 2), Vector::Ones(3));
  PoolHandle h(pool, 0, {0, 1, 2});
  CHECK_THROWS_AS(run_procedure(h, cfg, make_rng(1)), SetupError);
}

TEST_CASE("executors agree in partitioned mode") {
  std::mt19937_64 g(5);
  Matrix X = testsupport::random_matrix(g, 3000, 2);
  X.col(0).setOnes();
  const Vector y = X * Vector::Ones(2) + testsupport::random_matrix(g, 3000, 1);
  const ProcedureConfig cfg = ProcedureConfig::make(2, 0.3, 0.05, 3);
  auto run = [&](Executor e) {
    DataPool pool(X, y);
    Rng rng = make_rng(10);
    auto hs = partition(pool, 3, rng, cfg.n0);
    std::vector<Rng> rs{make_rng(10, 0, 1), make_rng(10, 0, 2), make_rng(10, 0, 3)};
    return run_procedures(hs, cfg, std::move(rs), e);
  };
  const auto a = run(Executor::sequential);
  const auto b = run(Executor::parallel);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(a[j].N == b[j].N);
    CHECK(a[j].claimed_ids == b[j].claimed_ids);
  }
}

}
