#include <doctest.h>

#include "distseq/aggregate.hpp"
#include "distseq/pool.hpp"
#include "support.hpp"

using namespace distseq;

namespace {

ProcedureResult fake(std::size_t N, const Vector& beta, const Matrix& gram, double mu = 1.0) {
  ProcedureResult r;
  r.N = N;
  r.beta_hat = beta;
  r.gram = gram;
  r.gram_inv = gram.inverse();
  r.mu = mu;
  r.sigma2_hat = 1.0;
  r.stopped_naturally = true;
  return r;
}

}  // namespace

TEST_SUITE("aggregate") {

TEST_CASE("weights follow stopping times") {
  const Matrix I = Matrix::Identity(2, 2);
  std::vector<ProcedureResult> rs{fake(100, Vector::Zero(2), I), fake(300, Vector::Constant(2, 4.0), I)};
  const CombinedEstimate e = combine(rs);
  CHECK(e.N_star == 400);
  CHECK(e.beta_hat(0) == doctest::Approx(3.0));
  CHECK(e.beta_hat(1) == doctest::Approx(3.0));
  std::vector<ProcedureResult> same{fake(50, Vector::Constant(2, 0.7), I), fake(50, Vector::Constant(2, 0.7), I)};
  CHECK((combine(same).beta_hat - Vector::Constant(2, 0.7)).norm() < 1e-15);
}

TEST_CASE("single procedure reduces to its own set") {
  std::mt19937_64 g(1);
  const Matrix G = testsupport::random_spd(g, 3);
  const Vector b = testsupport::random_matrix(g, 3, 1);
  std::vector<ProcedureResult> rs{fake(80, b, G, 2.5)};
  const CombinedEstimate e = combine(rs);
  const auto own = procedure_ellipsoid(rs[0], 0.2);
  for (const auto& set : {ellipsoid_exact(e, rs, 0.2), ellipsoid_approx(e, rs, 0.2)}) {
    CHECK(set.center == own.center);
    CHECK(set.shape == own.shape);
    CHECK(set.radius == own.radius);
  }
}

TEST_CASE("two identical procedures") {
  std::mt19937_64 g(2);
  const Matrix G = testsupport::random_spd(g, 2);
  const double mu = 1.7, d = 0.3;
  std::vector<ProcedureResult> rs{fake(60, Vector::Zero(2), G, mu), fake(60, Vector::Zero(2), G, mu)};
  const CombinedEstimate e = combine(rs);
  const auto set = ellipsoid_exact(e, rs, d);
  CHECK(testsupport::rel_err(set.shape, 2.0 * G) < 1e-12);
  CHECK(set.radius == doctest::Approx(2.0 * 60 * d * d / mu));
}

TEST_CASE("approximate set lies inside the exact set") {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<ProcedureResult> rs;
    for (int j = 0; j < 4; ++j)
      rs.push_back(fake(50 + 10 * j, testsupport::random_matrix(g, 3, 1), testsupport::random_spd(g, 3),
                        1.0 + j));
    const CombinedEstimate e = combine(rs);
    const auto R = ellipsoid_exact(e, rs, 0.2);
    const auto Rp = ellipsoid_approx(e, rs, 0.2);
    Rng rng = make_rng(5, static_cast<std::uint64_t>(rep));
    for (const Vector& z : sample_boundary(Rp, 100, rng)) {
      const Vector dz = z - R.center;
      CHECK(dz.dot(R.shape * dz) <= R.radius * (1 + 1e-9));
    }
  }
}

TEST_CASE("hand Schur complement") {
  Matrix total(2, 2);
  total << 4, 1, 1, 2;
  ProcedureResult r = fake(40, (Vector(2) << 1.0, 0.0).finished(), total, 1.0);
  r.indicator = (Indicator(2) << 1, 0).finished();
  std::vector<ProcedureResult> rs{r};
  const auto set = ellipsoid_ase(rs, 0.2);
  CHECK(set.shape(0, 0) == doctest::Approx(3.5));
  CHECK(set.shape(1, 1) == 0.0);
  // nu = lambda_max of N * (total^-1) on the active block = 40 * 2/7
  CHECK(set.radius == doctest::Approx(40 * 0.04 / (40 * 2.0 / 7.0)));
  CHECK_FALSE(contains(set, (Vector(2) << 1.0, 0.01).finished()));
  CHECK(contains(set, (Vector(2) << 1.0, 0.0).finished()));
}

TEST_CASE("all-active shrinkage set shares center and shape with the approximate set") {
  std::mt19937_64 g(4);
  std::vector<ProcedureResult> rs;
  for (int j = 0; j < 3; ++j) {
    rs.push_back(fake(70, testsupport::random_matrix(g, 2, 1), testsupport::random_spd(g, 2)));
    rs.back().indicator = Indicator::Ones(2);
  }
  const CombinedEstimate e = combine(rs);
  const auto ase = ellipsoid_ase(rs, 0.2);
  const auto approx = ellipsoid_approx(e, rs, 0.2);
  CHECK((ase.center - approx.center).norm() < 1e-15);
  CHECK(testsupport::rel_err(ase.shape, approx.shape) < 1e-15);
}

TEST_CASE("empty active set is degenerate") {
  ProcedureResult r = fake(30, Vector::Zero(2), Matrix::Identity(2, 2));
  r.indicator = Indicator::Zero(2);
  std::vector<ProcedureResult> rs{r};
  const auto set = ellipsoid_ase(rs, 0.2);
  CHECK(set.degenerate);
  CHECK(contains(set, Vector::Zero(2)));
  CHECK(max_axis(set) == 0.0);
}

TEST_CASE("membership at the center and past the axis end") {
  ConfidenceEllipsoid s;
  s.center = Vector::Ones(2);
  s.shape = Matrix::Identity(2, 2);
  s.radius = 0.04;
  CHECK(contains(s, s.center));
  CHECK(contains(s, s.center + Vector::Unit(2, 0) * (0.2 - 1e-12)));
  CHECK_FALSE(contains(s, s.center + Vector::Unit(2, 0) * (0.2 + 1e-9)));
}

TEST_CASE("longest axis") {
  ConfidenceEllipsoid s;
  s.center = Vector::Zero(3);
  s.shape = Matrix::Identity(3, 3);
  s.radius = 0.04;
  CHECK(max_axis(s) == doctest::Approx(0.4));
  s.shape *= 4.0;
  s.radius = 4 * 0.04;
  CHECK(max_axis(s) == doctest::Approx(0.4));
  s.shape = Vector(Vector::LinSpaced(3, 1.0, 9.0)).asDiagonal();
  s.radius = 1.0;
  CHECK(max_axis(s) == doctest::Approx(2.0));
}

TEST_CASE("claim audit") {
  DataPool pool(Matrix::Ones(4, 1), Vector::Ones(4));
  REQUIRE(pool.try_claim(0, 0));
  REQUIRE(pool.try_claim(3, 1));
  ProcedureResult a, b;
  a.claimed_ids = {0};
  b.claimed_ids = {3};
  std::vector<ProcedureResult> rs{a, b};
  CHECK(claims_consistent(pool, rs));
  rs[1].claimed_ids = {0};
  CHECK_FALSE(claims_consistent(pool, rs));
}

}
