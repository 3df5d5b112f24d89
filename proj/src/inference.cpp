#include "fate/inference.hpp"

#include "fate/errors.hpp"

namespace fate::inference {

Matrix moment_covariance(const Eigen::Ref<const Matrix>& g) {
  const long n = g.rows();
  if (n < 1) throw Error(ErrorKind::EmptyData, "moment_covariance: no observations");
  const Eigen::RowVectorXd mean = g.colwise().mean();
  const Matrix centered = g.rowwise() - mean;
  Matrix s = Matrix::Zero(g.cols(), g.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(n));
  return s.selfadjointView<Eigen::Lower>();
}

Matrix sandwich_vcov(const Eigen::Ref<const Matrix>& jacobian, const Eigen::Ref<const Matrix>& weight,
                     const Eigen::Ref<const Matrix>& moment_cov, long n) {
  if (weight.rows() != jacobian.rows() || moment_cov.rows() != jacobian.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "sandwich_vcov: dimension mismatch");
  }
  const Matrix wg = weight * jacobian;
  const Matrix bread = symmetric_inverse(jacobian.transpose() * wg);
  const Matrix meat = wg.transpose() * moment_cov * wg;
  Matrix v = bread * meat * bread / static_cast<double>(n);
  return 0.5 * (v + v.transpose());
}

JTestResult hansen_j(const Eigen::Ref<const Vector>& gbar, const Eigen::Ref<const Matrix>& weight,
                     long n, int df) {
  JTestResult out;
  out.n = n;
  out.df = df;
  double stat = static_cast<double>(n) * gbar.dot(weight * gbar);
  if (stat < 0.0) {
    if (stat > -1e-10) {
      stat = 0.0;
      out.clamped = true;
    } else {
      throw Error(ErrorKind::NegativeStatistic, "J statistic is negative: weight not PSD");
    }
  }
  out.statistic = stat;
  out.p_value = df >= 1 ? chi_square_sf(stat, df) : 1.0;
  return out;
}

EfficientWeight efficient_weight(const Eigen::Ref<const Matrix>& moment_cov) {
  try {
    return {symmetric_inverse(moment_cov), false};
  } catch (const RankDeficientError&) {
    const long m = moment_cov.rows();
    const double ridge = 1e-8 * moment_cov.trace() / static_cast<double>(m);
    Matrix regularized = moment_cov + ridge * Matrix::Identity(m, m);
    return {symmetric_inverse(regularized), true};
  }
}

Matrix weight_root(const Eigen::Ref<const Matrix>& weight) {
  Eigen::LLT<Matrix> llt(weight);
  if (llt.info() == Eigen::Success) return llt.matrixU();
  // semidefinite fallback through the eigendecomposition
  Eigen::SelfAdjointEigenSolver<Matrix> eig(weight);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace fate::inference
