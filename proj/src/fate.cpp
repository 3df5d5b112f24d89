#include "fate/fate.hpp"

#include "fate/errors.hpp"
#include "fate/inference.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace fate {

IdentificationReport check_identification(long k, long j, long l, long r) {
  if (k < 1 || j < 1 || l < 1 || r < 0) {
    throw Error(ErrorKind::InvalidConfig, "check_identification: K, J, L must be positive");
  }
  IdentificationReport rep;
  rep.K = k;
  rep.J = j;
  rep.L = l;
  rep.R = r;
  rep.identified = l <= k && (l == k || l <= j + 1);
  rep.moment_count = (j + 1) * (k + r);
  rep.parameter_count = j * (r + l) + (k - l) * (l - 1) + k + r;
  rep.net_moment_count = (j + 1) * k;
  rep.net_parameter_count = j * l + (k - l) * (l - 1) + k;
  rep.j_df = (k - l) * (j + 1 - l);
  return rep;
}

Vector ParameterLayout::pack(const FateParameters& p) const {
  Vector v(size());
  for (long j = 0; j < J; ++j) {
    v.segment(beta(j), R) = p.beta.col(j);
    v.segment(lambda(j), L) = p.lambda.col(j);
  }
  for (long row = 0; row < K - L; ++row) {
    for (long col = 0; col < L - 1; ++col) v(theta(row, col)) = p.theta_free(row, col);
  }
  v.segment(gamma(), K) = p.gamma;
  v.segment(gamma_x(), R) = p.gamma_x;
  return v;
}

FateParameters ParameterLayout::unpack(const Eigen::Ref<const Vector>& v) const {
  if (v.size() != size()) {
    throw Error(ErrorKind::DimensionMismatch, "parameter vector has length " + std::to_string(v.size()) +
                                                  ", expected " + std::to_string(size()));
  }
  FateParameters p;
  p.beta.resize(R, J);
  p.lambda.resize(L, J);
  p.theta_free.resize(K - L, L - 1);
  for (long j = 0; j < J; ++j) {
    p.beta.col(j) = v.segment(beta(j), R);
    p.lambda.col(j) = v.segment(lambda(j), L);
  }
  for (long row = 0; row < K - L; ++row) {
    for (long col = 0; col < L - 1; ++col) p.theta_free(row, col) = v(theta(row, col));
  }
  p.gamma = v.segment(gamma(), K);
  p.gamma_x = v.segment(gamma_x(), R);
  return p;
}

std::vector<std::string> ParameterLayout::names(const std::vector<std::string>& instruments,
                                                const std::vector<std::string>& outcomes,
                                                const std::vector<std::string>& controls) const {
  std::vector<std::string> out(static_cast<std::size_t>(size()));
  auto at = [&out](long i) -> std::string& { return out[static_cast<std::size_t>(i)]; };
  for (long j = 0; j < J; ++j) {
    const auto& y = outcomes[static_cast<std::size_t>(j)];
    for (long r = 0; r < R; ++r) at(beta(j) + r) = "beta[" + y + "," + controls[static_cast<std::size_t>(r)] + "]";
    for (long l = 0; l < L; ++l) at(lambda(j) + l) = "lambda[" + std::to_string(l + 1) + "," + y + "]";
  }
  for (long row = 0; row < K - L; ++row) {
    for (long col = 0; col < L - 1; ++col) {
      at(theta(row, col)) =
          "theta[" + instruments[static_cast<std::size_t>(L + row)] + "," + std::to_string(col + 1) + "]";
    }
  }
  for (long k = 0; k < K; ++k) at(gamma() + k) = "gamma[" + instruments[static_cast<std::size_t>(k)] + "]";
  for (long r = 0; r < R; ++r) at(gamma_x() + r) = "gamma_x[" + controls[static_cast<std::size_t>(r)] + "]";
  return out;
}

Matrix embed_theta(const Eigen::Ref<const Matrix>& theta_free, long k, long l) {
  Matrix theta = Matrix::Zero(k, l);
  theta.topRows(l).setIdentity();
  for (long row = 0; row < k - l; ++row) {
    double sum = 0.0;
    for (long col = 0; col < l - 1; ++col) {
      theta(l + row, col) = theta_free(row, col);
      sum += theta_free(row, col);
    }
    theta(l + row, l - 1) = 1.0 - sum;
  }
  return theta;
}

bool rows_sum_to_one(const Eigen::Ref<const Matrix>& theta, double tol) {
  for (long row = 0; row < theta.rows(); ++row) {
    if (!(std::abs(theta.row(row).sum() - 1.0) <= tol)) return false;
  }
  return true;
}

MomentSystem::MomentSystem(const Dataset& data, long l)
    : n_(data.n()),
      p_(data.num_instruments() + data.num_controls()),
      y_(data.y),
      d_(data.d),
      z_(data.z),
      x_(data.x),
      zstar_(data.zstar()) {
  layout_ = {data.num_instruments(), data.num_outcomes(), l, data.num_controls()};
  if (l < 1 || l > layout_.K) {
    throw Error(ErrorKind::NotIdentified, "component count L must satisfy 1 <= L <= K");
  }
  const double inv_n = 1.0 / static_cast<double>(n_);
  qzs_ = zstar_.transpose() * zstar_ * inv_n;
  qzx_ = zstar_.transpose() * x_ * inv_n;
  qzz_ = zstar_.transpose() * z_ * inv_n;
  cy_ = zstar_.transpose() * y_ * inv_n;
  cd_ = zstar_.transpose() * d_ * inv_n;
}

Vector MomentSystem::gbar(const FateParameters& q) const {
  const auto& lay = layout_;
  const Matrix theta = embed_theta(q.theta_free, lay.K, lay.L);
  // column j: diag(gamma) Theta lambda_j
  const Matrix loading = q.gamma.asDiagonal() * theta * q.lambda;
  Vector g(moment_count());
  for (long j = 0; j < lay.J; ++j) {
    g.segment(j * p_, p_) = cy_.col(j) - qzx_ * q.beta.col(j) - qzz_ * loading.col(j);
  }
  g.tail(p_) = cd_ - qzx_ * q.gamma_x - qzz_ * q.gamma;
  return g;
}

Matrix MomentSystem::jacobian(const FateParameters& q) const {
  const auto& lay = layout_;
  const Matrix theta = embed_theta(q.theta_free, lay.K, lay.L);
  const Matrix pi = theta * q.lambda;  // K x J
  const Matrix gamma_theta = q.gamma.asDiagonal() * theta;
  Matrix g = Matrix::Zero(moment_count(), lay.size());
  for (long j = 0; j < lay.J; ++j) {
    const long rows = j * p_;
    g.block(rows, lay.beta(j), p_, lay.R) = -qzx_;
    g.block(rows, lay.lambda(j), p_, lay.L) = -qzz_ * gamma_theta;
    g.block(rows, lay.gamma(), p_, lay.K) = -qzz_ * pi.col(j).asDiagonal();
    for (long row = 0; row < lay.K - lay.L; ++row) {
      const long k = lay.L + row;
      for (long col = 0; col < lay.L - 1; ++col) {
        const double dlam = q.lambda(col, j) - q.lambda(lay.L - 1, j);
        g.block(rows, lay.theta(row, col), p_, 1) = -qzz_.col(k) * (q.gamma(k) * dlam);
      }
    }
  }
  const long rows = lay.J * p_;
  g.block(rows, lay.gamma(), p_, lay.K) = -qzz_;
  g.block(rows, lay.gamma_x(), p_, lay.R) = -qzx_;
  return g;
}

Matrix MomentSystem::per_observation(const FateParameters& q) const {
  const auto& lay = layout_;
  const Matrix theta = embed_theta(q.theta_free, lay.K, lay.L);
  const Matrix loading = q.gamma.asDiagonal() * theta * q.lambda;
  const Matrix resid_y = y_ - x_ * q.beta - z_ * loading;
  const Vector resid_d = d_ - x_ * q.gamma_x - z_ * q.gamma;
  Matrix g(n_, moment_count());
  for (long j = 0; j < lay.J; ++j) {
    g.middleCols(j * p_, p_) = zstar_.array().colwise() * resid_y.col(j).array();
  }
  g.rightCols(p_) = zstar_.array().colwise() * resid_d.array();
  return g;
}

Matrix MomentSystem::block_weight() const {
  const Matrix block = symmetric_inverse(qzs_);
  Matrix w = Matrix::Zero(moment_count(), moment_count());
  for (long e = 0; e <= layout_.J; ++e) w.block(e * p_, e * p_, p_, p_) = block;
  return w;
}

MomentEvaluation gmm_moments(const Eigen::Ref<const Vector>& params, const Dataset& data,
                             const FateSpec& spec) {
  const MomentSystem system(data, spec.L);
  if (params.size() != system.layout().size()) {
    throw Error(ErrorKind::DimensionMismatch, "gmm_moments: expected " +
                                                  std::to_string(system.layout().size()) +
                                                  " parameters, got " + std::to_string(params.size()));
  }
  const FateParameters q = system.layout().unpack(params);
  return {system.gbar(q), system.jacobian(q)};
}

ReorderedDataset reorder_for_normalization(const Dataset& data, const std::vector<std::string>& defining) {
  std::vector<int> indices;
  for (const auto& name : defining) {
    const auto it = std::find(data.instrument_names.begin(), data.instrument_names.end(), name);
    if (it == data.instrument_names.end()) {
      throw Error(ErrorKind::UnknownInstrument, "unknown instrument '" + name + "'");
    }
    const int idx = static_cast<int>(it - data.instrument_names.begin());
    if (std::find(indices.begin(), indices.end(), idx) != indices.end()) {
      throw Error(ErrorKind::UnknownInstrument, "instrument '" + name + "' listed twice");
    }
    indices.push_back(idx);
  }
  ReorderedDataset out;
  out.permutation = defining_first_order(data.num_instruments(), indices);
  out.data = permute_instruments(data, out.permutation);
  return out;
}

namespace {

struct GaussNewtonResult {
  Vector params;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  std::vector<double> history;
};

double criterion(const MomentSystem& system, const Vector& params, const Matrix& weight) {
  const Vector g = system.gbar(system.layout().unpack(params));
  return g.dot(weight * g);
}

GaussNewtonResult gauss_newton(const MomentSystem& system, Vector params, const Matrix& weight,
                               const FateSpec& spec) {
  const Matrix root = inference::weight_root(weight);
  GaussNewtonResult out;
  double q_old = criterion(system, params, weight);
  out.history.push_back(q_old);
  for (int it = 1; it <= spec.max_iterations; ++it) {
    const FateParameters current = system.layout().unpack(params);
    const Vector g = system.gbar(current);
    const Matrix jac = system.jacobian(current);
    const Matrix a = root * jac;
    const Vector r = root * g;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(kRankTolerance);
    cod.compute(a);
    const Vector step = -cod.solve(r);
    out.iterations = it;

    double t = 1.0;
    Vector candidate = params + step;
    double q_new = criterion(system, candidate, weight);
    int halvings = 0;
    while (!(q_new <= q_old) && halvings < 50) {
      t *= 0.5;
      candidate = params + t * step;
      q_new = criterion(system, candidate, weight);
      ++halvings;
    }
    const double scale = 1.0 + params.lpNorm<Eigen::Infinity>();
    const double step_size = t * step.lpNorm<Eigen::Infinity>();
    if (!(q_new <= q_old)) {
      // no decrease along the Gauss-Newton direction: already at the floor
      out.converged = step.lpNorm<Eigen::Infinity>() <= std::sqrt(spec.tol_params) * scale;
      break;
    }
    assert(q_new <= q_old);
    params = candidate;
    out.history.push_back(q_new);
    const double decrease = q_old - q_new;
    q_old = q_new;
    if (step_size <= spec.tol_params * scale || q_new == 0.0 ||
        (decrease <= spec.tol_objective * (q_new + decrease) && step_size <= 10.0 * spec.tol_params * scale)) {
      out.converged = true;
      break;
    }
  }
  out.params = std::move(params);
  out.objective = q_old;
  return out;
}

FateParameters initial_parameters(const MomentSystem& system, const Dataset& data) {
  const auto& lay = system.layout();
  const iv::PiMatrix pi = iv::pi_matrix(data);
  const iv::FirstStage fs = iv::first_stage(data);
  FateParameters q;
  q.lambda = pi.estimates.topRows(lay.L);
  q.theta_free = Matrix::Zero(lay.K - lay.L, lay.L - 1);
  if (lay.L > 1) {
    // pi_k - lambda_L = sum_l t_l (lambda_l - lambda_L) over outcomes
    const Vector last = q.lambda.row(lay.L - 1).transpose();
    Matrix design(lay.J, lay.L - 1);
    for (long l = 0; l < lay.L - 1; ++l) design.col(l) = q.lambda.row(l).transpose() - last;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    for (long row = 0; row < lay.K - lay.L; ++row) {
      const Vector target = pi.estimates.row(lay.L + row).transpose() - last;
      q.theta_free.row(row) = cod.solve(target).transpose();
    }
  }
  q.gamma = fs.gamma;
  q.gamma_x = fs.gamma_x;
  const Matrix loading = q.gamma.asDiagonal() * embed_theta(q.theta_free, lay.K, lay.L) * q.lambda;
  q.beta = LeastSquares(data.x).solve(data.y - data.z * loading);
  return q;
}

Matrix standard_errors(const Vector& diag_sqrt, long rows, long cols, auto index) {
  Matrix out(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) out(r, c) = diag_sqrt(index(r, c));
  }
  return out;
}

}  // namespace

FateEstimate fate_fit(const Dataset& input, const FateSpec& spec) {
  validate(input);
  const long k = input.num_instruments();
  const long j = input.num_outcomes();
  const long r = input.num_controls();
  const auto ident = check_identification(k, j, spec.L, r);
  if (!ident.identified) {
    throw Error(ErrorKind::NotIdentified, "L = " + std::to_string(spec.L) + " is not identified with K = " +
                                              std::to_string(k) + ", J = " + std::to_string(j));
  }
  if (!spec.defining_instruments.empty() && static_cast<int>(spec.defining_instruments.size()) != spec.L) {
    throw Error(ErrorKind::InvalidConfig, "exactly L defining instruments are required");
  }
  ReorderedDataset reordered = spec.defining_instruments.empty()
                                   ? ReorderedDataset{input, defining_first_order(k, {})}
                                   : reorder_for_normalization(input, spec.defining_instruments);
  const Dataset& data = reordered.data;
  const MomentSystem system(data, spec.L);
  const auto& lay = system.layout();
  const long n = data.n();

  FateEstimate est;
  est.n = n;
  est.L = spec.L;
  est.weighting = spec.weighting;
  est.permutation = reordered.permutation;
  est.instrument_names = data.instrument_names;
  est.outcome_names = data.outcome_names;
  est.control_names = data.control_names;
  est.parameter_names = lay.names(data.instrument_names, data.outcome_names, data.control_names);

  const Vector start = lay.pack(initial_parameters(system, data));
  Matrix weight;
  Matrix moment_cov;
  GaussNewtonResult fit;
  if (spec.weighting == Weighting::TwoStep) {
    const auto step1 = gauss_newton(system, start, system.block_weight(), spec);
    if (!step1.converged) est.warnings.push_back("first-step minimization did not converge");
    moment_cov = inference::moment_covariance(system.per_observation(lay.unpack(step1.params)));
    const auto eff = inference::efficient_weight(moment_cov);
    weight = eff.weight;
    est.ridge_weighting = eff.ridge;
    fit = gauss_newton(system, step1.params, weight, spec);
    fit.iterations += step1.iterations;
  } else {
    weight = Matrix::Identity(system.moment_count(), system.moment_count());
    fit = gauss_newton(system, start, weight, spec);
  }
  if (est.ridge_weighting) est.warnings.push_back("moment covariance singular: ridge-regularized weight");

  const FateParameters q = lay.unpack(fit.params);
  est.theta = embed_theta(q.theta_free, lay.K, lay.L);
  est.lambda = q.lambda;
  est.beta = q.beta;
  est.gamma = q.gamma;
  est.gamma_x = q.gamma_x;
  est.converged = fit.converged;
  est.iterations = fit.iterations;
  est.objective = fit.objective;
  est.objective_history = fit.history;

  const Vector gbar = system.gbar(q);
  const Matrix jac = system.jacobian(q);
  est.gradient_norm = (2.0 * jac.transpose() * (weight * gbar)).lpNorm<Eigen::Infinity>();
  if (!est.converged) {
    est.warnings.push_back("non-convergence after " + std::to_string(fit.iterations) +
                           " iterations (objective " + std::to_string(fit.objective) + ", gradient norm " +
                           std::to_string(est.gradient_norm) + ")");
  }

  const Matrix final_cov = inference::moment_covariance(system.per_observation(q));
  Matrix j_weight = weight;
  if (spec.weighting == Weighting::Identity) {
    moment_cov = final_cov;
    j_weight = inference::efficient_weight(final_cov).weight;
  }
  try {
    est.vcov = inference::sandwich_vcov(jac, weight, moment_cov, n);
  } catch (const RankDeficientError&) {
    est.vcov = Matrix::Constant(lay.size(), lay.size(), std::numeric_limits<double>::quiet_NaN());
    est.warnings.push_back("G'WG is singular: covariance unavailable");
  }
  const Vector sd = est.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  est.lambda_se = standard_errors(sd, lay.L, lay.J, [&](long l, long jj) { return lay.lambda(jj) + l; });
  est.beta_se = standard_errors(sd, lay.R, lay.J, [&](long rr, long jj) { return lay.beta(jj) + rr; });
  est.gamma_se = sd.segment(lay.gamma(), lay.K);
  est.theta_se = Matrix::Zero(lay.K, lay.L);
  for (long row = 0; row < lay.K - lay.L; ++row) {
    Vector ones_last = Vector::Zero(lay.size());
    for (long col = 0; col < lay.L - 1; ++col) {
      est.theta_se(lay.L + row, col) = sd(lay.theta(row, col));
      ones_last(lay.theta(row, col)) = -1.0;
    }
    if (lay.L > 1) est.theta_se(lay.L + row, lay.L - 1) = std::sqrt(std::max(0.0, ones_last.dot(est.vcov * ones_last)));
  }

  est.j_df = static_cast<int>(ident.j_df);
  const auto jt = inference::hansen_j(gbar, j_weight, n, est.j_df);
  est.j_stat = jt.statistic;
  est.j_pvalue = jt.p_value;
  return est;
}

ThreeStepResult three_step_fit(const Eigen::Ref<const Matrix>& pi, long anchor) {
  if (pi.rows() != 3 || pi.cols() < 2) {
    throw Error(ErrorKind::DimensionMismatch, "three-step estimator needs K = 3 and J >= 2");
  }
  if (anchor < 0 || anchor >= pi.cols()) {
    throw Error(ErrorKind::InvalidConfig, "anchor outcome out of range");
  }
  const double l1 = pi(0, anchor);
  const double l2 = pi(1, anchor);
  const double gap = l1 - l2;
  if (std::abs(gap) <= 1e-12 * std::max({1.0, std::abs(l1), std::abs(l2)})) {
    throw Error(ErrorKind::DegenerateAnchor, "anchor outcome has equal defining effects");
  }
  ThreeStepResult out;
  out.anchor = anchor;
  // pi_3 = t l1 + (1 - t) l2
  out.theta31 = (pi(2, anchor) - l2) / gap;
  out.theta.resize(3, 2);
  out.theta << 1.0, 0.0, 0.0, 1.0, out.theta31, 1.0 - out.theta31;
  out.lambda.resize(2, pi.cols());
  const Matrix design = out.theta;
  const LeastSquares ls(design);
  for (long j = 0; j < pi.cols(); ++j) {
    if (j == anchor) {
      out.lambda.col(j) << l1, l2;
    } else {
      out.lambda.col(j) = ls.solve(pi.col(j));
    }
  }
  out.residuals = pi - out.theta * out.lambda;
  return out;
}

ThreeStepResult three_step_fit(const iv::PiMatrix& pi, const FateSpec& spec, long anchor) {
  if (spec.L != 2) throw Error(ErrorKind::InvalidConfig, "three-step estimator needs L = 2");
  return three_step_fit(pi.estimates, anchor);
}

}  // namespace fate
