#pragma once

#include "fate/dataset.hpp"
#include "fate/iv.hpp"
#include "fate/numerics.hpp"

#include <span>
#include <string>
#include <vector>

namespace fate {

enum class Weighting { TwoStep, Identity };

struct FateSpec {
  int L = 1;
  /// Instruments that define the first L components, in order. Empty means
  /// the first L instruments of the dataset.
  std::vector<std::string> defining_instruments;
  Weighting weighting = Weighting::TwoStep;
  int max_iterations = 500;
  double tol_objective = 1e-10;
  double tol_params = 1e-9;
};

struct IdentificationReport {
  long K = 0;
  long J = 0;
  long L = 0;
  long R = 1;
  bool identified = false;
  long moment_count = 0;      // (J+1)(K+R)
  long parameter_count = 0;   // J(R+L) + (K-L)(L-1) + K + R
  long net_moment_count = 0;  // after the control moments absorb beta and gamma_x
  long net_parameter_count = 0;
  long j_df = 0;  // (K-L)(J+1-L)
};

IdentificationReport check_identification(long k, long j, long l, long r = 1);

/// Free parameters of the constrained system. Each non-defining instrument
/// row of Theta stores its first L-1 weights; the last is 1 minus their sum.
struct FateParameters {
  Matrix beta;        // R x J
  Matrix lambda;      // L x J
  Matrix theta_free;  // (K-L) x (L-1)
  Vector gamma;       // K
  Vector gamma_x;     // R
};

/// Offsets of the packed vector: for each outcome j, beta_j (R) then
/// lambda_j (L); then theta_free row by row; then gamma; then gamma_x.
struct ParameterLayout {
  long K = 0, J = 0, L = 0, R = 0;

  long size() const { return J * (R + L) + (K - L) * (L - 1) + K + R; }
  long beta(long j) const { return j * (R + L); }
  long lambda(long j) const { return j * (R + L) + R; }
  long theta(long row, long col) const { return J * (R + L) + row * (L - 1) + col; }
  long gamma() const { return J * (R + L) + (K - L) * (L - 1); }
  long gamma_x() const { return gamma() + K; }

  Vector pack(const FateParameters& p) const;
  FateParameters unpack(const Eigen::Ref<const Vector>& v) const;
  std::vector<std::string> names(const std::vector<std::string>& instruments,
                                 const std::vector<std::string>& outcomes,
                                 const std::vector<std::string>& controls) const;
};

/// K x L weights with the identity block on top and the free rows completed
/// so that every row sums to one.
Matrix embed_theta(const Eigen::Ref<const Matrix>& theta_free, long k, long l);

/// True when every row of `theta` sums to one within `tol`.
bool rows_sum_to_one(const Eigen::Ref<const Matrix>& theta, double tol = 1e-8);

/// Sample moments of the stacked system and their analytic Jacobian.
struct MomentEvaluation {
  Vector gbar;      // (J+1)(K+R)
  Matrix jacobian;  // (J+1)(K+R) x layout.size()
};

/// Cross-product form of the moment system: for each outcome j the mean of
/// Z*_i (Y_ij - X_i beta_j - Z_i diag(gamma) Theta lambda_j), then the
/// first-stage block Z*_i (D_i - X_i gamma_x - Z_i gamma), Z* = [Z X].
/// Instruments are taken in dataset order, the first L defining.
class MomentSystem {
 public:
  MomentSystem(const Dataset& data, long l);

  const ParameterLayout& layout() const { return layout_; }
  long moment_count() const { return (layout_.J + 1) * p_; }
  long n() const { return n_; }

  Vector gbar(const FateParameters& params) const;
  Matrix jacobian(const FateParameters& params) const;
  /// N x M matrix of Z*_i kron residual_i.
  Matrix per_observation(const FateParameters& params) const;
  /// Block-diagonal ((Z*'Z*)/N)^{-1}, one block per equation.
  Matrix block_weight() const;

 private:
  ParameterLayout layout_;
  long n_ = 0;
  long p_ = 0;
  Matrix y_;
  Vector d_;
  Matrix z_;
  Matrix x_;
  Matrix zstar_;
  Matrix qzs_;
  Matrix qzx_;
  Matrix qzz_;
  Matrix cy_;
  Vector cd_;
};

/// gbar and G at `params` (packed per ParameterLayout) for `data` taken in
/// its current instrument order.
MomentEvaluation gmm_moments(const Eigen::Ref<const Vector>& params, const Dataset& data,
                             const FateSpec& spec);

struct FateEstimate {
  Matrix theta;    // K x L
  Matrix lambda;   // L x J
  Matrix beta;     // R x J
  Vector gamma;    // K
  Vector gamma_x;  // R
  Matrix theta_se;
  Matrix lambda_se;
  Matrix beta_se;
  Vector gamma_se;
  Matrix vcov;  // over the packed free parameters
  std::vector<std::string> parameter_names;

  double j_stat = 0.0;
  int j_df = 0;
  double j_pvalue = 1.0;

  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  bool ridge_weighting = false;
  Weighting weighting = Weighting::TwoStep;
  std::vector<double> objective_history;  // final-step criterion per iteration
  std::vector<std::string> warnings;

  long n = 0;
  int L = 0;
  std::vector<int> permutation;  // estimate row i is input instrument permutation[i]
  std::vector<std::string> instrument_names;
  std::vector<std::string> outcome_names;
  std::vector<std::string> control_names;
};

struct ReorderedDataset {
  Dataset data;
  std::vector<int> permutation;
};

/// Moves the named defining instruments to the front, keeping the rest in
/// their original order.
ReorderedDataset reorder_for_normalization(const Dataset& data, const std::vector<std::string>& defining);

FateEstimate fate_fit(const Dataset& data, const FateSpec& spec);

struct ThreeStepResult {
  Matrix theta;      // 3 x 2
  Matrix lambda;     // 2 x J
  double theta31 = 0.0;
  Matrix residuals;  // 3 x J fit residuals pi - theta lambda
  long anchor = 0;
};

/// Three-instrument, two-component estimator: the anchor outcome pins
/// theta_31 exactly, every other outcome's effects are the least-squares
/// fit of the three equations with that theta held fixed.
ThreeStepResult three_step_fit(const Eigen::Ref<const Matrix>& pi, long anchor = 0);
ThreeStepResult three_step_fit(const iv::PiMatrix& pi, const FateSpec& spec, long anchor = 0);

}  // namespace fate
