#include "fate/dgp.hpp"
#include "fate/errors.hpp"
#include "fate/iv.hpp"

#include <doctest.h>

#include <cmath>

using namespace fate;

namespace {

Dataset make_data(long n, long k, long j, long r, std::uint64_t seed, double noise = 1.0) {
  Rng rng({seed, 0});
  Dataset d;
  d.z.resize(n, k);
  d.x.resize(n, r);
  for (long i = 0; i < n; ++i) {
    d.x(i, 0) = 1.0;
    for (long c = 1; c < r; ++c) d.x(i, c) = rng.normal();
    for (long c = 0; c < k; ++c) d.z(i, c) = rng.normal();
  }
  Vector gamma(k);
  for (long c = 0; c < k; ++c) gamma(c) = 0.5 + 0.2 * static_cast<double>(c);
  const Vector u = Vector::NullaryExpr(n, [&](Eigen::Index) { return rng.normal(); });
  d.d = d.z * gamma + 0.3 * d.x.col(0) + u;
  d.y.resize(n, j);
  for (long c = 0; c < j; ++c) {
    for (long i = 0; i < n; ++i) {
      d.y(i, c) = (1.0 + static_cast<double>(c)) * d.d(i) + 0.5 * u(i) + noise * rng.normal() + 0.2;
    }
  }
  ensure_names(d);
  return d;
}

/// Exactly identified IV of Y on [D W] with instruments [z_k W], where W
/// holds the other instruments and the controls; returns the D coefficient
/// and its HC0 standard error per outcome.
std::pair<Vector, Vector> iv_oracle(const Dataset& d, long k) {
  const long n = d.n();
  const long kk = d.num_instruments();
  const long w_cols = kk - 1 + d.num_controls();
  Matrix w(n, w_cols);
  long c = 0;
  for (long i = 0; i < kk; ++i) {
    if (i != k) w.col(c++) = d.z.col(i);
  }
  w.rightCols(d.num_controls()) = d.x;
  Matrix a(n, 1 + w_cols), b(n, 1 + w_cols);
  a << d.z.col(k), w;
  b << d.d, w;
  const Matrix abinv = (a.transpose() * b).inverse();
  Vector pi(d.num_outcomes()), se(d.num_outcomes());
  for (long j = 0; j < d.num_outcomes(); ++j) {
    const Vector coef = abinv * (a.transpose() * d.y.col(j));
    const Vector e = d.y.col(j) - b * coef;
    const Matrix ae = a.array().colwise() * e.array();
    const Matrix v = abinv * (ae.transpose() * ae) * abinv.transpose();
    pi(j) = coef(0);
    se(j) = std::sqrt(v(0, 0));
  }
  return {pi, se};
}

}  // namespace

TEST_CASE("first stage on a six-row hand example matches the normal equations") {
  Dataset d;
  d.z.resize(6, 1);
  d.z << 0, 1, 2, 3, 4, 5;
  d.x = Matrix::Ones(6, 1);
  d.d.resize(6);
  d.d << 1, 2, 2, 4, 5, 5;
  d.y = d.d;
  ensure_names(d);
  const auto fs = iv::first_stage(d);
  // slope = Sxy / Sxx with zbar = 2.5, dbar = 19/6
  const double sxx = 17.5;
  double sxy = 0.0;
  for (long i = 0; i < 6; ++i) sxy += (d.z(i, 0) - 2.5) * (d.d(i) - 19.0 / 6.0);
  CHECK(fs.gamma(0) == doctest::Approx(sxy / sxx).epsilon(1e-13));
  CHECK(fs.gamma_x(0) == doctest::Approx(19.0 / 6.0 - 2.5 * sxy / sxx).epsilon(1e-13));
  // HC0 slope variance: sum((z - zbar)^2 e^2) / Sxx^2
  double meat = 0.0;
  for (long i = 0; i < 6; ++i) {
    const double e = fs.residuals(i);
    meat += std::pow(d.z(i, 0) - 2.5, 2) * e * e;
  }
  CHECK(fs.gamma_se(0) == doctest::Approx(std::sqrt(meat) / sxx).epsilon(1e-12));
  CHECK(fs.f_joint == doctest::Approx(std::pow(fs.gamma(0) / fs.gamma_se(0), 2)).epsilon(1e-10));
  CHECK(fs.f_single(0) == doctest::Approx(fs.f_joint).epsilon(1e-10));
}

TEST_CASE("just-identified IV agrees with the stacked IV oracle and its HC0 errors") {
  const auto d = make_data(400, 3, 2, 2, 11);
  for (long k = 0; k < 3; ++k) {
    const auto est = iv::just_identified_iv(d, k);
    const auto [pi, se] = iv_oracle(d, k);
    for (long j = 0; j < 2; ++j) {
      CHECK(est.pi(j) == doctest::Approx(pi(j)).epsilon(1e-10));
      CHECK(est.se(j) == doctest::Approx(se(j)).epsilon(1e-8));
    }
  }
}

TEST_CASE("with one instrument the IV ratio is cov(z, y) / cov(z, d)") {
  const auto d = make_data(300, 1, 1, 1, 5);
  const Vector zc = d.z.col(0).array() - d.z.col(0).mean();
  const double ratio = zc.dot(d.y.col(0)) / zc.dot(d.d);
  CHECK(iv::just_identified_iv(d, 0).pi(0) == doctest::Approx(ratio).epsilon(1e-12));
}

TEST_CASE("treatment equal to an instrument gives the exact slope") {
  Rng rng({3, 0});
  Dataset d;
  d.z.resize(50, 2);
  for (long i = 0; i < 50; ++i) d.z.row(i) << rng.normal(), rng.normal();
  d.x = Matrix::Ones(50, 1);
  d.d = d.z.col(0);
  d.y = (3.0 * d.d.array() + 1.0).matrix();
  ensure_names(d);
  CHECK(iv::just_identified_iv(d, 0).pi(0) == doctest::Approx(3.0).epsilon(1e-12));
  // the second instrument carries no residual first stage once z1 is held fixed
  CHECK_THROWS_AS(iv::just_identified_iv(d, 1), Error);
  try {
    iv::pi_matrix(d);
    FAIL("expected DivisionByZeroFirstStage");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivisionByZeroFirstStage);
  }
  // exact fit: the robust F statistic is capped
  CHECK(iv::first_stage(d).f_joint == iv::kStatisticCap);
}

TEST_CASE("out-of-range instrument index") {
  const auto d = make_data(50, 2, 1, 1, 2);
  try {
    iv::just_identified_iv(d, 2);
    FAIL("expected UnknownInstrument");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownInstrument);
  }
}

TEST_CASE("pi matrix is equivariant to instrument permutation") {
  const auto d = make_data(300, 3, 2, 2, 17);
  const std::vector<int> order{2, 0, 1};
  const auto p = permute_instruments(d, order);
  const auto a = iv::pi_matrix(d);
  const auto b = iv::pi_matrix(p);
  for (long r = 0; r < 3; ++r) {
    for (long j = 0; j < 2; ++j) {
      CHECK(b.estimates(r, j) == doctest::Approx(a.estimates(order[static_cast<std::size_t>(r)], j)).epsilon(1e-11));
      CHECK(b.std_errors(r, j) == doctest::Approx(a.std_errors(order[static_cast<std::size_t>(r)], j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("scaling outcomes, treatment and instruments") {
  const auto d = make_data(300, 3, 2, 2, 23);
  const auto base = iv::pi_matrix(d);

  auto ys = d;
  ys.y *= -2.5;
  const auto py = iv::pi_matrix(ys);
  CHECK((py.estimates - (-2.5) * base.estimates).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((py.std_errors - 2.5 * base.std_errors).cwiseAbs().maxCoeff() < 1e-10);

  auto ds = d;
  ds.d *= 4.0;
  const auto pd = iv::pi_matrix(ds);
  CHECK((pd.estimates - base.estimates / 4.0).cwiseAbs().maxCoeff() < 1e-11);

  auto zs = d;
  zs.z.col(1) *= 7.0;
  const auto pz = iv::pi_matrix(zs);
  CHECK((pz.estimates - base.estimates).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((pz.std_errors - base.std_errors).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pi equals the ratio of partialled reduced form to partialled first stage") {
  const auto d = make_data(250, 2, 1, 2, 29);
  Matrix w(d.n(), 1 + d.num_controls());
  w << d.z.col(1), d.x;
  const Vector mz = residualize(d.z.col(0), w);
  const double ratio = mz.dot(d.y.col(0)) / mz.dot(d.d);
  CHECK(iv::pi_matrix(d).estimates(0, 0) == doctest::Approx(ratio).epsilon(1e-11));
}

TEST_CASE("a single-component model gives a rank-one pi with rows equal to lambda") {
  dgp::ContinuousDgpConfig c;
  c.n = 2000;
  c.gamma.resize(3, 1);
  c.gamma << 0.7, 0.4, -0.5;
  c.gamma_x = Matrix::Constant(1, 1, 0.1);
  c.alpha = Matrix::Zero(1, 3);
  c.lambda.resize(1, 3);
  c.lambda << 1.0, -0.5, 2.0;
  c.xi_scale = 0.0;
  c.u_scales = Vector::Ones(1);
  c.component_error_corr = Matrix::Identity(1, 1);
  c.instruments.assign(3, {});
  const auto sim = dgp::simulate_continuous(c, {8, 0});
  const auto pi = iv::pi_matrix(sim.dataset);
  Eigen::JacobiSVD<Matrix> svd(pi.estimates);
  CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0));
  for (long k = 0; k < 3; ++k) {
    for (long j = 0; j < 3; ++j) CHECK(pi.estimates(k, j) == doctest::Approx(c.lambda(0, j)).epsilon(1e-10));
  }
  CHECK(pi.std_errors.maxCoeff() < 1e-10);
}

TEST_CASE("pi is consistent: n = 1e5 estimates lie within 4 standard errors of the truth") {
  dgp::ContinuousDgpConfig c;
  c.n = 100000;
  c.gamma.resize(3, 2);
  c.gamma << 0.6, 0.0, 0.0, 0.5, 0.3, 0.4;
  c.gamma_x = Matrix::Zero(1, 2);
  c.alpha = Matrix::Zero(1, 2);
  c.lambda.resize(2, 2);
  c.lambda << 1.0, 0.5, 0.2, 1.2;
  c.u_scales = Vector::Ones(2);
  c.component_error_corr = Matrix::Identity(2, 2);
  c.instruments.assign(3, {});
  const auto sim = dgp::simulate_continuous(c, {77, 0});
  const auto pi = iv::pi_matrix(sim.dataset);
  const Matrix truth = sim.truth.pi();
  for (long k = 0; k < 3; ++k) {
    for (long j = 0; j < 2; ++j) {
      CHECK(std::abs(pi.estimates(k, j) - truth(k, j)) <= 4.0 * pi.std_errors(k, j));
      CHECK_FALSE(pi.weak_instrument[static_cast<std::size_t>(k)]);
    }
  }
}

TEST_CASE("standard errors shrink at the root-n rate") {
  const auto small = iv::pi_matrix(make_data(4000, 2, 1, 1, 41));
  const auto large = iv::pi_matrix(make_data(16000, 2, 1, 1, 43));
  const double ratio = small.std_errors(0, 0) / large.std_errors(0, 0);
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);
}

TEST_CASE("pooled IV-GMM with one instrument is the just-identified IV") {
  const auto d = make_data(500, 1, 3, 2, 51);
  const auto g = iv::iv_gmm(d);
  const auto pi = iv::pi_matrix(d);
  CHECK(g.converged);
  CHECK(g.j_df == 0);
  for (long j = 0; j < 3; ++j) {
    CHECK(g.lambda(j) == doctest::Approx(pi.estimates(0, j)).epsilon(1e-8));
    CHECK(g.lambda_se(j) == doctest::Approx(pi.std_errors(0, j)).epsilon(1e-6));
  }
}

TEST_CASE("pooled IV-GMM recovers a common effect and reports df J(K-1)") {
  const auto d = make_data(5000, 3, 2, 1, 61);
  const auto g = iv::iv_gmm(d);
  CHECK(g.converged);
  CHECK(g.j_df == 4);
  CHECK(std::abs(g.lambda(0) - 1.0) < 4.0 * g.lambda_se(0));
  CHECK(std::abs(g.lambda(1) - 2.0) < 4.0 * g.lambda_se(1));
  CHECK(g.j_pvalue > 0.0);
  CHECK(g.j_pvalue <= 1.0);
}
