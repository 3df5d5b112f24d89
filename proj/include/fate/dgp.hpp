#pragma once

#include "fate/dataset.hpp"
#include "fate/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fate::dgp {

struct InstrumentDistribution {
  enum class Kind { Normal, Bernoulli };
  Kind kind = Kind::Normal;
  double p = 0.5;  // Bernoulli success probability
};

/// Linear factor model with continuous component intensities:
///   f_i = X_i gamma_x + Z_i gamma + u_i,   D_i = sum_l f_il,
///   Y_ij = X_i alpha_j + f_i lambda_j + xi_ij.
struct ContinuousDgpConfig {
  long n = 1000;
  Matrix gamma;    // K x L instrument loadings on components
  Matrix gamma_x;  // R x L control loadings; row 0 multiplies the intercept
  Matrix alpha;    // R x J direct control effects
  Matrix lambda;   // L x J component effects
  double xi_scale = 1.0;
  Vector u_scales;              // L standard deviations of u_il
  Matrix component_error_corr;  // L x L
  std::vector<InstrumentDistribution> instruments;  // K marginals

  long num_instruments() const { return gamma.rows(); }
  long num_components() const { return gamma.cols(); }
  long num_outcomes() const { return lambda.cols(); }
  long num_controls() const { return gamma_x.rows(); }
};

/// Multinomial choice between non-treatment and L component treatments:
/// utility of component l at instrument value z is U_il + a_l + b_l' z,
/// non-treatment has utility 0.
struct DiscreteDgpConfig {
  long n = 1000;
  std::vector<Vector> support;  // grid of instrument values, each of length Kz
  std::vector<double> support_probabilities;
  Vector mu_intercept;  // L
  Matrix mu_slope;      // L x Kz
  Vector taste_mean;    // L
  Matrix taste_cov;     // L x L
  Matrix lambda;        // L x J mean effects Y(l) - Y(0)
  double effect_sd = 0.0;  // individual effect heterogeneity
  Vector baseline_mean;    // J means of Y(0)
  double baseline_sd = 1.0;

  long num_components() const { return mu_intercept.size(); }
  long instrument_dim() const { return mu_slope.cols(); }
  long num_outcomes() const { return lambda.cols(); }
  Vector utility_shift(const Vector& z) const { return mu_intercept + mu_slope * z; }
};

/// Counterfactual panel of the discrete model. choice(i, g) is the option
/// (0 = untreated, l = component l) individual i picks at grid point g.
struct LatentPanel {
  std::vector<Vector> support;
  std::vector<double> support_probabilities;
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> choice;  // N x G
  std::vector<Matrix> potential;  // L + 1 matrices, N x J: Y_i(0), ..., Y_i(L)
  std::vector<int> observed_point;  // grid index of Z_i

  long n() const { return choice.rows(); }
  long num_components() const { return static_cast<long>(potential.size()) - 1; }
  long num_points() const { return choice.cols(); }
  long num_outcomes() const { return potential.front().cols(); }

  /// D_il(z_g).
  int treated(long i, long g, long component) const { return choice(i, g) == component ? 1 : 0; }
  /// Y_i(l) - Y_i(0) for outcome j.
  double effect(long i, long component, long j) const {
    return potential[static_cast<std::size_t>(component)](i, j) - potential[0](i, j);
  }
  /// Grid index of a point; throws UnknownGridPoint.
  long point_index(const Vector& z) const;
};

/// Population parameters implied by a generator. theta is K x L with rows
/// gamma_kl / gamma_k; theta may be empty when the generator does not
/// define one.
struct Truth {
  Matrix theta;
  Matrix lambda;
  Vector gamma;
  Vector gamma_x;
  Matrix beta;

  long num_components() const { return lambda.rows(); }
  Matrix pi() const { return theta * lambda; }
};

/// (Theta, Lambda) after the identity-block normalization on the given
/// defining rows: Theta^r = Theta Theta_L^{-1}, Lambda^r = Theta_L Lambda,
/// with instrument rows reordered so the defining ones come first.
struct NormalizedTruth {
  Matrix theta;
  Matrix lambda;
};

NormalizedTruth normalize(const Truth& truth, const std::vector<int>& defining);

struct SyntheticData {
  Dataset dataset;
  std::optional<LatentPanel> latent;
  std::optional<Matrix> components;  // N x L intensities f_il (continuous model)
  Truth truth;
};

void validate(const ContinuousDgpConfig& config);
void validate(const DiscreteDgpConfig& config);

Truth truth_of(const ContinuousDgpConfig& config);

SyntheticData simulate_continuous(const ContinuousDgpConfig& config, RngSeed seed);
SyntheticData simulate_discrete(const DiscreteDgpConfig& config, RngSeed seed);

/// Option chosen at utilities `shifted_tastes` (= U_i + mu(z)). Ties go to
/// the lowest component index; indifference with non-treatment goes to
/// treatment.
int choose(const Eigen::Ref<const Vector>& shifted_tastes);

struct ComponentShares {
  double complier = 0.0;  // D_l(z) = 1, D_l(z') = 0
  double defier = 0.0;    // D_l(z) = 0, D_l(z') = 1
  double always = 0.0;
  double never = 0.0;
  double share_z = 0.0;        // P_l(z)
  double share_z_prime = 0.0;  // P_l(z')
};

struct ComplierProfile {
  long point = 0;
  long point_prime = 0;
  double p_z = 0.0;        // P(z)
  double p_z_prime = 0.0;  // P(z')
  std::vector<ComponentShares> components;  // L entries
};

ComplierProfile complier_defier_profile(const LatentPanel& latent, long point, long point_prime);
ComplierProfile complier_defier_profile(const LatentPanel& latent, const Vector& z,
                                        const Vector& z_prime);

struct ComponentTerms {
  double complier_share = 0.0;
  double defier_share = 0.0;
  Vector complier_mean_effect;  // J; zero when there are no compliers
  Vector defier_mean_effect;
  Vector switcher_mean_effect;  // E[Y(l)-Y(0) | D_l(z) != D_l(z')]
  Vector population_mean_effect;
  Vector complier_term;  // P_cl E[effect | complier]
  Vector defier_term;    // P_fl E[effect | defier]
};

/// Exact estimand decomposition for a comparison (z, z') computed from
/// the counterfactual panel.
struct OracleDecomposition {
  long point = 0;
  long point_prime = 0;
  Vector reduced_form;  // J: mean Y_i(z) - Y_i(z')
  double first_stage = 0.0;  // P(z) - P(z')
  std::optional<Vector> iv_estimand;
  std::vector<ComponentTerms> components;
  bool utr_holds = false;
  bool uum_holds = false;
  /// (P_l(z) - P_l(z')) / (P(z) - P(z')); empty when first_stage == 0.
  Vector weights;
  /// sum_l w_l * population mean effect; set when uniform treatment
  /// responses hold for the comparison.
  std::optional<Vector> weighted_average_effect;
  /// sum_l w_l * E[effect | l-switchers]; set when uniform unordered
  /// monotonicity holds for the comparison.
  std::optional<Vector> component_weighted_late;
  /// Survivor compliers net of defiers: shares P_cl - P_fl, their
  /// normalized weights and the net mean effect. Set only when every net
  /// share is nonnegative.
  std::optional<Vector> survivor_shares;
  std::optional<Vector> survivor_weights;
  std::optional<Matrix> survivor_effects;  // L x J

  /// iv_estimand or DegenerateComparison.
  const Vector& iv() const;
};

OracleDecomposition oracle_iv_decomposition(const LatentPanel& latent, long point, long point_prime);

enum class Condition { UniformTreatmentResponses, UniformUnorderedMonotonicity };

struct Witness {
  long individual = -1;  // -1 for population-level conditions
  long component = 0;
  long point = 0;
  long point_prime = 0;
};

struct ConditionReport {
  Condition condition = Condition::UniformTreatmentResponses;
  bool holds = true;
  std::vector<Witness> witnesses;  // at most kMaxWitnesses
};

inline constexpr std::size_t kMaxWitnesses = 10;

/// Checks the condition over every pair of the given grid points (all
/// points when `points` is empty).
ConditionReport check_condition(const LatentPanel& latent, Condition which,
                                const std::vector<long>& points = {});

/// Necessary evidence toward net uniform unordered monotonicity for one
/// comparison. This does not verify the condition: it only reports whether
/// compliers outnumber defiers per component and whether defier effects
/// lie in the range of complier effects.
struct NetMonotonicityEvidence {
  std::vector<bool> compliers_cover_defiers;  // per component
  std::vector<bool> defier_effects_in_complier_range;  // per component, outcome 0
  bool necessary_conditions_hold = true;
};

NetMonotonicityEvidence net_monotonicity_evidence(const LatentPanel& latent, long point,
                                                  long point_prime);

/// Population choice shares (P_0(z), ..., P_L(z)) for two components and
/// normal tastes, by one-dimensional quadrature.
Vector population_shares(const DiscreteDgpConfig& config, const Vector& z);

}  // namespace fate::dgp
