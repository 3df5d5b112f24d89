#include "fate/errors.hpp"
#include "fate/numerics.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <cmath>
#include <vector>

using namespace fate;

namespace {

Matrix random_matrix(long r, long c, std::uint64_t seed) {
  Rng rng({seed, 0});
  Matrix m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("least squares on the identity returns the right-hand side") {
  Vector b(3);
  b << 1, 2, 3;
  const Matrix x = solve_least_squares(Matrix::Identity(3, 3), b);
  CHECK((x - b).norm() < 1e-14);
}

TEST_CASE("least squares matches the hand-solved normal equations") {
  Matrix a(3, 2);
  a << 1, 0, 1, 1, 1, 2;
  Vector b(3);
  b << 1, 3, 5;
  // A'A = [[3,3],[3,5]], A'b = (9,13) -> x = (1,2)
  const Matrix x = solve_least_squares(a, b);
  CHECK(x(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("duplicated column is rank deficient") {
  Matrix a(4, 2);
  a << 1, 1, 2, 2, 3, 3, 4, 4;
  Vector b = Vector::Ones(4);
  try {
    solve_least_squares(a, b);
    FAIL("expected RankDeficient");
  } catch (const RankDeficientError& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
    CHECK(e.effective_rank() == 1);
  }
}

TEST_CASE("square nonsingular systems are solved exactly") {
  const Matrix a = random_matrix(6, 6, 3);
  const Matrix x0 = random_matrix(6, 2, 4);
  const Matrix x = solve_least_squares(a, a * x0);
  CHECK((x - x0).norm() / x0.norm() < 1e-10);
}

TEST_CASE("residualize annihilates the projection space") {
  const Matrix x = random_matrix(20, 2, 5);
  CHECK(residualize(x, x).cwiseAbs().maxCoeff() < 1e-12);

  Vector m(3);
  m << 1, 2, 3;
  const Matrix r = residualize(m, Matrix::Ones(3, 1));
  CHECK(r(0, 0) == doctest::Approx(-1.0));
  CHECK(std::abs(r(1, 0)) < 1e-14);
  CHECK(r(2, 0) == doctest::Approx(1.0));

  const Matrix big = random_matrix(20, 3, 6);
  const Matrix res = residualize(big, x);
  const Matrix inner = x.transpose() * res;
  CHECK(inner.cwiseAbs().maxCoeff() < 1e-10);
  CHECK((residualize(res, x) - res).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gram inverse and symmetric inverse agree with a direct inverse") {
  const Matrix x = random_matrix(30, 4, 7);
  const Matrix direct = (x.transpose() * x).inverse();
  CHECK((LeastSquares(x).gram_inverse() - direct).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((symmetric_inverse(x.transpose() * x) - direct).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(symmetric_inverse(Matrix::Ones(3, 3)), RankDeficientError);
}

TEST_CASE("chi-square tail: boundary and reference values") {
  for (int k = 1; k <= 10; ++k) CHECK(chi_square_sf(0.0, k) == 1.0);
  CHECK(chi_square_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-4 / 0.05));
  CHECK(chi_square_sf(1e6, 1) < 1e-12);
  // closed forms: df = 1 is erfc(sqrt(x/2)), df = 2 is exp(-x/2)
  for (double x : {0.01, 0.5, 1.0, 3.841459, 10.0, 50.0}) {
    CHECK(std::abs(chi_square_sf(x, 1) - std::erfc(std::sqrt(x / 2.0))) < 1e-13);
    CHECK(std::abs(chi_square_sf(x, 2) - std::exp(-x / 2.0)) < 1e-13);
  }
}

TEST_CASE("chi-square tail agrees with an independent incomplete-gamma implementation") {
  double worst = 0.0;
  for (int df = 1; df <= 200; df += 3) {
    for (double x = 0.0; x <= 1000.0; x += 7.3) {
      const double oracle = boost::math::gamma_q(df / 2.0, x / 2.0);
      worst = std::max(worst, std::abs(chi_square_sf(x, df) - oracle));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("chi-square tail monotonicity") {
  for (int df : {1, 4, 17}) {
    double prev = 1.0;
    for (double x = 0.1; x < 60; x += 0.37) {
      const double p = chi_square_sf(x, df);
      CHECK(p <= prev);
      prev = p;
    }
  }
  for (double x : {0.5, 3.0, 12.0}) {
    double prev = 0.0;
    for (int df = 1; df <= 40; ++df) {
      const double p = chi_square_sf(x, df);
      CHECK(p >= prev);
      prev = p;
    }
  }
  CHECK_THROWS_AS(chi_square_sf(-1.0, 1), Error);
  CHECK_THROWS_AS(chi_square_sf(1.0, 0), Error);
}

TEST_CASE("pairwise sum") {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  CHECK(pairwise_sum(v) == 5050.0);
  CHECK(pairwise_sum(std::span<const double>()) == 0.0);
  std::vector<double> tiny(1 << 16, 0.1);
  CHECK(std::abs(pairwise_sum(tiny) - 0.1 * (1 << 16)) < 1e-9);
}

TEST_CASE("rng streams are reproducible and mutually uncorrelated") {
  Rng a({11, 3});
  Rng b({11, 3});
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

  const int n = 100000;
  Rng s1({11, 1});
  Rng s2({11, 2});
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s1.normal();
    const double y = s2.normal();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double corr = cov / std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  CHECK(std::abs(corr) < 0.02);

  Rng c({12, 1});
  Rng d({11, 1});
  CHECK(c.normal() != d.normal());
}

TEST_CASE("rng categorical and bernoulli frequencies") {
  Rng r({5, 0});
  const std::vector<double> p{0.2, 0.5, 0.3};
  std::vector<int> count(3, 0);
  int heads = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    ++count[r.categorical(p)];
    heads += r.bernoulli(0.25) ? 1 : 0;
  }
  for (int k = 0; k < 3; ++k) CHECK(std::abs(count[k] / double(n) - p[k]) < 0.01);
  CHECK(std::abs(heads / double(n) - 0.25) < 0.01);
}

TEST_CASE("require_finite rejects NaN") {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = std::nan("");
  CHECK_THROWS_AS(require_finite(m, "m"), Error);
}
