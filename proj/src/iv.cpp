#include "fate/iv.hpp"

#include "fate/errors.hpp"
#include "fate/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fate::iv {

namespace {

double capped(double stat) {
  if (!std::isfinite(stat) || stat > kStatisticCap) return kStatisticCap;
  return stat;
}

// HC0 covariance of OLS coefficients given the design factorization.
Matrix hc0_vcov(const LeastSquares& ls, const Matrix& design, const Vector& residuals) {
  const Matrix bread = ls.gram_inverse();
  const Matrix scaled = design.array().colwise() * residuals.array();
  const Matrix meat = scaled.transpose() * scaled;
  return bread * meat * bread;
}

// Robust Wald statistic for coefficients `coef` with covariance `vcov`;
// infinite when the covariance is singular.
double wald(const Vector& coef, const Matrix& vcov) {
  if (coef.isZero(0.0)) return 0.0;
  try {
    return coef.dot(symmetric_inverse(vcov) * coef);
  } catch (const RankDeficientError&) {
    return std::numeric_limits<double>::infinity();
  }
}

Matrix drop_column(const Matrix& m, long col) {
  Matrix out(m.rows(), m.cols() - 1);
  out << m.leftCols(col), m.rightCols(m.cols() - col - 1);
  return out;
}

}  // namespace

FirstStage first_stage(const Dataset& data) {
  const long k = data.num_instruments();
  const long r = data.num_controls();
  const Matrix design = data.zstar();
  const LeastSquares ls(design);
  const Vector coef = ls.solve(data.d);

  FirstStage out;
  out.gamma = coef.head(k);
  out.gamma_x = coef.tail(r);
  out.fitted = design * coef;
  out.residuals = data.d - out.fitted;

  const Matrix vcov = hc0_vcov(ls, design, out.residuals);
  const Matrix vcov_gamma = vcov.topLeftCorner(k, k);
  out.gamma_se = vcov_gamma.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.t_stats.resize(k);
  for (long i = 0; i < k; ++i) {
    const double se = out.gamma_se(i);
    const double t = se > 0.0 ? out.gamma(i) / se : (out.gamma(i) == 0.0 ? 0.0 : kStatisticCap);
    out.t_stats(i) = std::copysign(capped(std::abs(t)), out.gamma(i));
  }
  out.f_joint = capped(wald(out.gamma, vcov_gamma) / static_cast<double>(k));

  out.f_single.resize(k);
  for (long i = 0; i < k; ++i) {
    Matrix single(data.n(), 1 + r);
    single << data.z.col(i), data.x;
    const LeastSquares single_ls(single);
    const Vector single_coef = single_ls.solve(data.d);
    const Vector single_resid = data.d - single * single_coef;
    const Matrix single_vcov = hc0_vcov(single_ls, single, single_resid);
    out.f_single(i) = capped(wald(single_coef.head(1), single_vcov.topLeftCorner(1, 1)));
  }
  return out;
}

namespace {

JustIdentifiedIv just_identified_from(const Dataset& data, const FirstStage& fs, long k) {
  const Matrix controls = [&] {
    Matrix c(data.n(), data.num_instruments() - 1 + data.num_controls());
    c << drop_column(data.z, k), data.x;
    return c;
  }();
  const LeastSquares ls(controls);
  const Vector dhat_resid = ls.residualize(fs.fitted);
  const double denom = dhat_resid.dot(data.d);
  // the partialled first stage must be more than roundoff of the fitted values
  if (dhat_resid.norm() <= 1e-10 * fs.fitted.norm() || denom == 0.0) {
    throw Error(ErrorKind::DivisionByZeroFirstStage,
                "instrument " + std::to_string(k) + " has no residual first-stage variation");
  }

  JustIdentifiedIv out;
  out.pi = (data.y.transpose() * dhat_resid) / denom;
  const Matrix partial = data.y - data.d * out.pi.transpose();
  const Matrix residuals = ls.residualize(partial);
  out.se.resize(data.num_outcomes());
  for (long j = 0; j < data.num_outcomes(); ++j) {
    const double meat = (dhat_resid.array() * residuals.col(j).array()).square().sum();
    out.se(j) = std::sqrt(meat) / std::abs(denom);
  }
  out.first_stage_coef = fs.gamma(k);
  out.first_stage_t = fs.t_stats(k);
  out.weak_instrument = std::abs(out.first_stage_t) < 2.0;
  return out;
}

}  // namespace

JustIdentifiedIv just_identified_iv(const Dataset& data, long k) {
  if (k < 0 || k >= data.num_instruments()) {
    throw Error(ErrorKind::UnknownInstrument, "instrument index " + std::to_string(k) + " out of range");
  }
  return just_identified_from(data, first_stage(data), k);
}

PiMatrix pi_matrix(const Dataset& data) {
  const long k_count = data.num_instruments();
  const FirstStage fs = first_stage(data);
  PiMatrix out;
  out.estimates.resize(k_count, data.num_outcomes());
  out.std_errors.resize(k_count, data.num_outcomes());
  out.first_stage_coefs = fs.gamma;
  out.n_used = data.n();
  out.instrument_names = data.instrument_names;
  out.outcome_names = data.outcome_names;
  for (long k = 0; k < k_count; ++k) {
    try {
      const auto row = just_identified_from(data, fs, k);
      out.estimates.row(k) = row.pi.transpose();
      out.std_errors.row(k) = row.se.transpose();
      out.weak_instrument.push_back(row.weak_instrument);
    } catch (const Error& e) {
      const std::string name = k < static_cast<long>(data.instrument_names.size())
                                   ? data.instrument_names[static_cast<std::size_t>(k)]
                                   : std::to_string(k);
      throw Error(e.kind(), "instrument " + std::to_string(k) + " (" + name + "): " + e.what());
    }
  }
  return out;
}

namespace {

// Cross products shared by every evaluation of the pooled system.
struct PooledSystem {
  long n, j, k, r, p;
  Matrix zstar;
  Matrix qzx;  // Z*'X / N
  Matrix qzz;  // Z*'Z / N
  Matrix cy;   // Z*'Y / N, p x J
  Vector cd;   // Z*'D / N

  explicit PooledSystem(const Dataset& data)
      : n(data.n()),
        j(data.num_outcomes()),
        k(data.num_instruments()),
        r(data.num_controls()),
        p(data.num_instruments() + data.num_controls()),
        zstar(data.zstar()) {
    const double inv_n = 1.0 / static_cast<double>(n);
    qzx = zstar.transpose() * data.x * inv_n;
    qzz = zstar.transpose() * data.z * inv_n;
    cy = zstar.transpose() * data.y * inv_n;
    cd = zstar.transpose() * data.d * inv_n;
  }

  long moments() const { return (j + 1) * p; }
};

struct PooledParams {
  Matrix beta;  // R x J
  Vector lambda;
  Vector gamma;
  Vector gamma_x;
};

Vector pooled_gbar(const PooledSystem& s, const PooledParams& q) {
  Vector g(s.moments());
  const Vector index = s.qzz * q.gamma;
  for (long j = 0; j < s.j; ++j) {
    g.segment(j * s.p, s.p) = s.cy.col(j) - s.qzx * q.beta.col(j) - index * q.lambda(j);
  }
  g.tail(s.p) = s.cd - s.qzx * q.gamma_x - index;
  return g;
}

// Weighted least squares min |C (target - B phi)|^2.
Vector weighted_ls(const Matrix& root, const Matrix& design, const Vector& target) {
  return LeastSquares(root * design).solve(root * target);
}

// Holding gamma fixed: solve for (beta_j, lambda_j)_j and gamma_x.
void update_given_gamma(const PooledSystem& s, const Matrix& root, PooledParams& q) {
  const long cols = s.j * (s.r + 1) + s.r;
  Matrix design = Matrix::Zero(s.moments(), cols);
  Vector target(s.moments());
  const Vector index = s.qzz * q.gamma;
  for (long j = 0; j < s.j; ++j) {
    design.block(j * s.p, j * (s.r + 1), s.p, s.r) = s.qzx;
    design.block(j * s.p, j * (s.r + 1) + s.r, s.p, 1) = index;
    target.segment(j * s.p, s.p) = s.cy.col(j);
  }
  design.block(s.j * s.p, s.j * (s.r + 1), s.p, s.r) = s.qzx;
  target.tail(s.p) = s.cd - index;
  const Vector phi = weighted_ls(root, design, target);
  for (long j = 0; j < s.j; ++j) {
    q.beta.col(j) = phi.segment(j * (s.r + 1), s.r);
    q.lambda(j) = phi(j * (s.r + 1) + s.r);
  }
  q.gamma_x = phi.tail(s.r);
}

// Holding lambda fixed: solve for beta, gamma and gamma_x.
void update_given_lambda(const PooledSystem& s, const Matrix& root, PooledParams& q) {
  const long cols = s.j * s.r + s.k + s.r;
  Matrix design = Matrix::Zero(s.moments(), cols);
  Vector target(s.moments());
  for (long j = 0; j < s.j; ++j) {
    design.block(j * s.p, j * s.r, s.p, s.r) = s.qzx;
    design.block(j * s.p, s.j * s.r, s.p, s.k) = s.qzz * q.lambda(j);
    target.segment(j * s.p, s.p) = s.cy.col(j);
  }
  design.block(s.j * s.p, s.j * s.r, s.p, s.k) = s.qzz;
  design.block(s.j * s.p, s.j * s.r + s.k, s.p, s.r) = s.qzx;
  target.tail(s.p) = s.cd;
  const Vector phi = weighted_ls(root, design, target);
  for (long j = 0; j < s.j; ++j) q.beta.col(j) = phi.segment(j * s.r, s.r);
  q.gamma = phi.segment(s.j * s.r, s.k);
  q.gamma_x = phi.tail(s.r);
}

Vector flatten(const PooledParams& q) {
  Vector v(q.beta.size() + q.lambda.size() + q.gamma.size() + q.gamma_x.size());
  v << q.beta.reshaped(), q.lambda, q.gamma, q.gamma_x;
  return v;
}

struct AlsResult {
  bool converged = false;
  int iterations = 0;
};

AlsResult alternate(const PooledSystem& s, const Matrix& weight, PooledParams& q, int max_iterations,
                    double tolerance) {
  const Matrix root = inference::weight_root(weight);
  AlsResult out;
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector before = flatten(q);
    update_given_gamma(s, root, q);
    update_given_lambda(s, root, q);
    out.iterations = it;
    const Vector after = flatten(q);
    if ((after - before).lpNorm<Eigen::Infinity>() <= tolerance * (1.0 + after.lpNorm<Eigen::Infinity>())) {
      out.converged = true;
      break;
    }
  }
  // leave (beta, lambda, gamma_x) consistent with the final gamma
  update_given_gamma(s, root, q);
  return out;
}

Matrix pooled_per_observation(const PooledSystem& s, const Dataset& data, const PooledParams& q) {
  const Vector index = data.z * q.gamma;
  Matrix g(s.n, s.moments());
  for (long j = 0; j < s.j; ++j) {
    const Vector e = data.y.col(j) - data.x * q.beta.col(j) - index * q.lambda(j);
    g.middleCols(j * s.p, s.p) = s.zstar.array().colwise() * e.array();
  }
  const Vector e = data.d - data.x * q.gamma_x - index;
  g.rightCols(s.p) = s.zstar.array().colwise() * e.array();
  return g;
}

Matrix pooled_jacobian(const PooledSystem& s, const PooledParams& q) {
  const long cols = s.j * (s.r + 1) + s.k + s.r;
  Matrix g = Matrix::Zero(s.moments(), cols);
  const Vector index = s.qzz * q.gamma;
  const long gamma_col = s.j * (s.r + 1);
  for (long j = 0; j < s.j; ++j) {
    g.block(j * s.p, j * (s.r + 1), s.p, s.r) = -s.qzx;
    g.block(j * s.p, j * (s.r + 1) + s.r, s.p, 1) = -index;
    g.block(j * s.p, gamma_col, s.p, s.k) = -s.qzz * q.lambda(j);
  }
  g.block(s.j * s.p, gamma_col, s.p, s.k) = -s.qzz;
  g.block(s.j * s.p, gamma_col + s.k, s.p, s.r) = -s.qzx;
  return g;
}

}  // namespace

IvGmmEstimate iv_gmm(const Dataset& data, int max_iterations, double tolerance) {
  validate(data);
  const PooledSystem s(data);
  const FirstStage fs = first_stage(data);

  PooledParams q;
  q.beta = Matrix::Zero(s.r, s.j);
  q.lambda = Vector::Zero(s.j);
  q.gamma = fs.gamma;
  q.gamma_x = fs.gamma_x;

  const Matrix block_inverse = symmetric_inverse(s.zstar.transpose() * s.zstar / static_cast<double>(s.n));
  Matrix w1 = Matrix::Zero(s.moments(), s.moments());
  for (long e = 0; e <= s.j; ++e) w1.block(e * s.p, e * s.p, s.p, s.p) = block_inverse;
  const AlsResult step1 = alternate(s, w1, q, max_iterations, tolerance);

  const Matrix cov1 = inference::moment_covariance(pooled_per_observation(s, data, q));
  const auto weight = inference::efficient_weight(cov1);
  const AlsResult step2 = alternate(s, weight.weight, q, max_iterations, tolerance);

  IvGmmEstimate out;
  out.lambda = q.lambda;
  out.beta = q.beta;
  out.gamma = q.gamma;
  out.gamma_x = q.gamma_x;
  out.converged = step1.converged && step2.converged;
  out.iterations = step1.iterations + step2.iterations;
  out.ridge_weighting = weight.ridge;
  const Vector gbar = pooled_gbar(s, q);
  out.objective = gbar.dot(weight.weight * gbar);
  const Matrix jac = pooled_jacobian(s, q);
  const Matrix vcov = inference::sandwich_vcov(jac, weight.weight, cov1, s.n);
  out.lambda_se.resize(s.j);
  for (long j = 0; j < s.j; ++j) {
    const long idx = j * (s.r + 1) + s.r;
    out.lambda_se(j) = std::sqrt(std::max(0.0, vcov(idx, idx)));
  }
  out.j_df = static_cast<int>(s.j * (s.k - 1));
  const auto jt = inference::hansen_j(gbar, weight.weight, s.n, out.j_df);
  out.j_stat = jt.statistic;
  out.j_pvalue = jt.p_value;
  return out;
}

}  // namespace fate::iv
