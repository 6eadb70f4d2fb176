#include <doctest.h>

#include "distseq/seqcore.hpp"
#include "distseq/shrinkage.hpp"
#include "support.hpp"

using namespace distseq;

TEST_SUITE("shrinkage") {

TEST_CASE("keep or zero by penalty") {
  const AseConfig cfg;
  Vector b(3);
  b << 0.0, 1.0, 0.1;
  const AseState s = shrink(b, 256, cfg);
  CHECK(s.indicator(0) == 0);
  CHECK(s.indicator(1) == 1);  // 256^-1/4 = 0.25
  CHECK(s.indicator(2) == 0);  // 2.5
  CHECK(s.p0_hat == 1);
  CHECK(s.beta_star(1) == 1.0);
  CHECK(s.beta_star(2) == 0.0);
}

TEST_CASE("bad tuning is rejected") {
  AseConfig cfg;
  cfg.epsilon = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = AseConfig{};
  cfg.gamma = -1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("chi-square quantiles") {
  CHECK(chi2_quantile(1, 0.95) == doctest::Approx(3.841459).epsilon(1e-6));
  CHECK(chi2_quantile(2, 0.95) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-12));
  CHECK(chi2_quantile(5, 0.95) == doctest::Approx(11.070498).epsilon(1e-6));
  for (int k : {1, 3, 4, 10, 50}) {
    CAPTURE(k);
    CHECK(testsupport::chi2_cdf_simpson(k, chi2_quantile(k, 0.95)) ==
          doctest::Approx(0.95).epsilon(1e-6));
  }
  CHECK_THROWS_AS(chi2_quantile(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(chi2_quantile(2, 1.0), std::invalid_argument);
}

TEST_CASE("all-ones indicator reduces to the plain rule") {
  std::mt19937_64 g(9);
  const long p = 3;
  ProcedureConfig cfg = ProcedureConfig::make(p, 0.5, 0.05, 2);
  cfg.ase = AseConfig{};
  const Matrix X = testsupport::random_matrix(g, 400, p);
  const Vector y = X * Vector::Constant(p, 3.0) + testsupport::random_matrix(g, 400, 1);
  GramState s(p);
  int agree = 0;
  for (long i = 0; i < X.rows(); ++i) {
    s.absorb(X.row(i).transpose(), y(i));
    if (s.n() < cfg.n0) continue;
    AseState a{Indicator::Ones(p), beta_hat(s), static_cast<int>(p)};
    CHECK(should_stop_ase(s, a, cfg) == should_stop(s, cfg));
    CHECK(restricted_mu(s, a.indicator) == doctest::Approx(mu_n(s)));
    ++agree;
  }
  CHECK(agree > 300);
}

TEST_CASE("empty support never stops") {
  const long p = 2;
  ProcedureConfig cfg = ProcedureConfig::make(p, 10.0, 0.05, 1);
  cfg.ase = AseConfig{};
  GramState s(p);
  for (int i = 0; i < 50; ++i) s.absorb(Vector::Unit(p, i % 2), 0.0);
  AseState a{Indicator::Zero(p), Vector::Zero(p), 0};
  CHECK_FALSE(should_stop_ase(s, a, cfg));
}

TEST_CASE("restricted mu uses the active block") {
  GramState s(2);
  // gram = diag(4, 0.25) * n with n = 2
  s.absorb((Vector(2) << 2.0, 0.0).finished(), 0.0);
  s.absorb((Vector(2) << 0.0, std::sqrt(0.5)).finished(), 0.0);
  // n * gram_inv = 2 * diag(1/4, 2) = diag(0.5, 4)
  CHECK(restricted_mu(s, (Indicator(2) << 1, 0).finished()) == doctest::Approx(0.5));
  CHECK(restricted_mu(s, (Indicator(2) << 0, 1).finished()) == doctest::Approx(4.0));
}

}
