#pragma once

#include "fate/numerics.hpp"

namespace fate::inference {

struct JTestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  long n = 0;
  bool clamped = false;  // a slightly negative statistic was mapped to 0
};

/// Centered HC0 covariance N^{-1} sum (g_i - gbar)(g_i - gbar)' of an
/// N x M matrix of per-observation moments.
Matrix moment_covariance(const Eigen::Ref<const Matrix>& per_observation);

/// (G'WG)^{-1} G'W S W G (G'WG)^{-1} / N.
Matrix sandwich_vcov(const Eigen::Ref<const Matrix>& jacobian, const Eigen::Ref<const Matrix>& weight,
                     const Eigen::Ref<const Matrix>& moment_cov, long n);

/// Hansen's J = N gbar' W gbar with p = P(chi2_df > J).
JTestResult hansen_j(const Eigen::Ref<const Vector>& gbar, const Eigen::Ref<const Matrix>& weight,
                     long n, int df);

struct EfficientWeight {
  Matrix weight;
  bool ridge = false;
};

/// S^{-1}, or (S + 1e-8 tr(S)/M I)^{-1} when S is singular up to the rank
/// tolerance.
EfficientWeight efficient_weight(const Eigen::Ref<const Matrix>& moment_cov);

/// Upper-triangular C with C'C = W, for whitening weighted residuals.
Matrix weight_root(const Eigen::Ref<const Matrix>& weight);

}  // namespace fate::inference
