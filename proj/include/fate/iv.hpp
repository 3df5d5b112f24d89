#pragma once

#include "fate/dataset.hpp"
#include "fate/numerics.hpp"

#include <string>
#include <vector>

namespace fate::iv {

/// F statistics are capped here when the residual variance vanishes.
inline constexpr double kStatisticCap = 1e12;

struct FirstStage {
  Vector gamma;    // K coefficients on excluded instruments
  Vector gamma_x;  // R coefficients on controls
  Vector gamma_se;  // HC0 standard errors of gamma
  Vector t_stats;   // gamma / gamma_se (capped)
  double f_joint = 0.0;  // robust Wald(gamma = 0) / K
  Vector f_single;       // robust Wald(gamma_k = 0) with instrument k alone plus controls
  Vector fitted;
  Vector residuals;
};

/// OLS of D on [Z X] with heteroskedasticity-robust (HC0) diagnostics.
FirstStage first_stage(const Dataset& data);

struct JustIdentifiedIv {
  Vector pi;  // J
  Vector se;  // J, HC0
  double first_stage_coef = 0.0;
  double first_stage_t = 0.0;
  bool weak_instrument = false;  // |t| < 2
};

/// IV with instrument k excluded and every other instrument moved into the
/// controls: pi_kj = (Dhat' M D)^{-1} Dhat' M Y_j.
JustIdentifiedIv just_identified_iv(const Dataset& data, long k);

struct PiMatrix {
  Matrix estimates;   // K x J
  Matrix std_errors;  // K x J
  Vector first_stage_coefs;
  std::vector<bool> weak_instrument;
  long n_used = 0;
  std::vector<std::string> instrument_names;
  std::vector<std::string> outcome_names;
};

PiMatrix pi_matrix(const Dataset& data);

struct IvGmmEstimate {
  Vector lambda;      // J common effects
  Vector lambda_se;   // J
  Matrix beta;        // R x J
  Vector gamma;       // K
  Vector gamma_x;     // R
  double objective = 0.0;
  double j_stat = 0.0;
  int j_df = 0;
  double j_pvalue = 1.0;
  bool converged = false;
  int iterations = 0;
  bool ridge_weighting = false;
};

/// Pooled IV-GMM: two-step efficient GMM of the reduced-form system
///   Y_j = X beta_j + (Z gamma) lambda_j,  D = X gamma_x + Z gamma
/// with instruments [Z X] in every equation, i.e. every instrument's
/// just-identified effect restricted to one common value per outcome.
/// The bilinear objective is minimized by alternating weighted least
/// squares over (beta, lambda, gamma_x) and (beta, gamma, gamma_x).
IvGmmEstimate iv_gmm(const Dataset& data, int max_iterations = 20000, double tolerance = 1e-13);

}  // namespace fate::iv
