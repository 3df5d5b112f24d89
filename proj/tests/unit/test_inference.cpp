#include "fate/errors.hpp"
#include "fate/inference.hpp"

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>

using namespace fate;
using namespace fate::inference;

namespace {

Matrix random_matrix(long rows, long cols, std::uint64_t seed) {
  Rng rng({seed, 0});
  return Matrix::NullaryExpr(rows, cols, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
}

}  // namespace

TEST_CASE("constant moments have zero covariance") {
  Matrix g(5, 2);
  g.col(0).setConstant(3.0);
  g.col(1).setConstant(-1.0);
  CHECK(moment_covariance(g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("alternating +-1 moments have unit variance") {
  Matrix g(4, 1);
  g << 1, -1, 1, -1;
  CHECK(moment_covariance(g)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("moment covariance is the centered outer-product average") {
  const Matrix g = random_matrix(37, 3, 5);
  Matrix oracle = Matrix::Zero(3, 3);
  const Vector mean = g.colwise().mean().transpose();
  for (long i = 0; i < g.rows(); ++i) {
    const Vector c = g.row(i).transpose() - mean;
    oracle += c * c.transpose();
  }
  oracle /= 37.0;
  CHECK((moment_covariance(g) - oracle).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sandwich collapses to (G' S^-1 G)^-1 / N under efficient weighting") {
  const Matrix a = random_matrix(6, 6, 1);
  const Matrix s = a * a.transpose() + Matrix::Identity(6, 6);
  const Matrix g = random_matrix(6, 3, 2);
  const Matrix w = s.inverse();
  const Matrix v = sandwich_vcov(g, w, s, 250);
  const Matrix oracle = (g.transpose() * w * g).inverse() / 250.0;
  CHECK((v - oracle).cwiseAbs().maxCoeff() < 1e-12 * oracle.cwiseAbs().maxCoeff());
  CHECK((v - v.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar just-identified sandwich is s / (g^2 N)") {
  Matrix g(1, 1), w(1, 1), s(1, 1);
  g << -2.0;
  w << 0.7;
  s << 3.0;
  CHECK(sandwich_vcov(g, w, s, 10)(0, 0) == doctest::Approx(3.0 / (4.0 * 10.0)).epsilon(1e-15));
}

TEST_CASE("doubling N halves the variance") {
  const Matrix a = random_matrix(4, 4, 3);
  const Matrix s = a * a.transpose() + Matrix::Identity(4, 4);
  const Matrix g = random_matrix(4, 2, 4);
  const Matrix w = Matrix::Identity(4, 4);
  const Matrix v1 = sandwich_vcov(g, w, s, 100);
  const Matrix v2 = sandwich_vcov(g, w, s, 200);
  CHECK((v1 - 2.0 * v2).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sandwich rejects mismatched dimensions") {
  const Matrix g = random_matrix(4, 2, 1);
  CHECK_THROWS_AS(sandwich_vcov(g, Matrix::Identity(3, 3), Matrix::Identity(4, 4), 10), Error);
}

TEST_CASE("J is zero at a zero moment vector and p is one") {
  const auto r = hansen_j(Vector::Zero(4), Matrix::Identity(4, 4), 100, 2);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("J with zero degrees of freedom has p = 1") {
  Vector g(2);
  g << 0.1, 0.2;
  const auto r = hansen_j(g, Matrix::Identity(2, 2), 10, 0);
  CHECK(r.statistic == doctest::Approx(10.0 * 0.05).epsilon(1e-14));
  CHECK(r.p_value == 1.0);
}

TEST_CASE("J p-value matches an independent chi-square tail") {
  Vector g(3);
  g << 0.05, -0.02, 0.03;
  const Matrix w = Matrix::Identity(3, 3) * 2.0;
  const auto r = hansen_j(g, w, 1000, 2);
  const double stat = 1000.0 * 2.0 * g.squaredNorm();
  CHECK(r.statistic == doctest::Approx(stat).epsilon(1e-14));
  const boost::math::chi_squared dist(2.0);
  CHECK(r.p_value == doctest::Approx(boost::math::cdf(boost::math::complement(dist, stat))).epsilon(1e-12));
}

TEST_CASE("J is invariant to a joint permutation of moments and weight") {
  const Matrix a = random_matrix(5, 5, 7);
  const Matrix w = a * a.transpose();
  const Vector g = random_matrix(5, 1, 8).col(0);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(5);
  p.indices() << 3, 0, 4, 1, 2;
  const auto base = hansen_j(g, w, 40, 3);
  const auto perm = hansen_j(p * g, p * w * p.transpose(), 40, 3);
  CHECK(perm.statistic == doctest::Approx(base.statistic).epsilon(1e-13));
}

TEST_CASE("J p-value decreases in the statistic") {
  double last = 2.0;
  for (double scale = 0.0; scale < 3.0; scale += 0.25) {
    Vector g(2);
    g << scale, scale;
    const double p = hansen_j(g, Matrix::Identity(2, 2), 5, 2).p_value;
    CHECK(p < last);
    last = p;
  }
}

TEST_CASE("tiny negative J is clamped, clearly negative J is an error") {
  Vector g(1);
  g << 1e-7;
  Matrix w(1, 1);
  w << -1.0;
  const auto r = hansen_j(g, w, 1, 1);
  CHECK(r.clamped);
  CHECK(r.statistic == 0.0);
  g << 1.0;
  try {
    hansen_j(g, w, 10, 1);
    FAIL("expected NegativeStatistic");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NegativeStatistic);
  }
}

TEST_CASE("efficient weight inverts a regular covariance and ridges a singular one") {
  const Matrix a = random_matrix(3, 3, 9);
  const Matrix s = a * a.transpose() + Matrix::Identity(3, 3);
  const auto w = efficient_weight(s);
  CHECK_FALSE(w.ridge);
  CHECK((w.weight * s - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  Vector v(3);
  v << 1.0, 2.0, -1.0;
  const Matrix singular = v * v.transpose();
  const auto r = efficient_weight(singular);
  CHECK(r.ridge);
  CHECK(r.weight.allFinite());
}

TEST_CASE("weight root factors the weight") {
  const Matrix a = random_matrix(4, 4, 12);
  const Matrix w = a * a.transpose() + 0.1 * Matrix::Identity(4, 4);
  const Matrix c = weight_root(w);
  CHECK((c.transpose() * c - w).cwiseAbs().maxCoeff() < 1e-12);

  Vector v(4);
  v << 1.0, 0.0, 2.0, 1.0;
  const Matrix psd = v * v.transpose();
  const Matrix cs = weight_root(psd);
  CHECK((cs.transpose() * cs - psd).cwiseAbs().maxCoeff() < 1e-12);
}
