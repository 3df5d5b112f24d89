#pragma once

#include "fate/dgp.hpp"
#include "fate/fate.hpp"
#include "fate/numerics.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fate::mc {

enum class EstimatorKind { JustIdentified, IvGmm, Fate, ThreeStep, ReducedForm };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Fate;
  int L = 0;                                // Fate only
  std::vector<std::string> defining;        // Fate only; empty = first L instruments
  Weighting weighting = Weighting::TwoStep;  // Fate only

  std::string label() const;
};

/// What the IV and reduced-form estimates of a discrete scenario are
/// scored against.
enum class DiscreteTarget {
  None,
  /// Population values from the choice-share quadrature (two components).
  Population,
  /// The replication panel's weighted average component effect.
  WeightedAverageEffect,
  /// The replication panel's component-weighted LATE.
  ComponentWeightedLate,
};

/// Two estimators whose effect vectors must coincide in every replication.
struct NestingPair {
  std::size_t first = 0;
  std::size_t second = 0;
};

struct Scenario {
  std::string name;
  std::string description;
  std::variant<dgp::ContinuousDgpConfig, dgp::DiscreteDgpConfig> generator;
  std::vector<EstimatorSpec> estimators;
  long n = 1000;
  long reps = 100;
  double nominal_level = 0.05;
  std::vector<NestingPair> nesting;
  // discrete scenarios: the comparison (z, z') as grid indices
  long point = 1;
  long point_prime = 0;
  DiscreteTarget target = DiscreteTarget::None;
};

void validate(const Scenario& s);

struct RunOptions {
  int threads = 1;
  bool timings = false;  // wall-clock numbers make the report nondeterministic
};

/// One estimate of one parameter in one replication.
struct Record {
  long rep = 0;
  std::size_t estimator = 0;
  std::string parameter;
  double estimate = 0.0;
  double se = 0.0;  // NaN when the estimator reports none
  std::optional<double> truth;
};

struct ParameterSummary {
  std::string name;
  long count = 0;
  double mean = 0.0;
  double sd = 0.0;       // empirical, divisor count - 1
  double mc_se = 0.0;    // sd / sqrt(count)
  std::optional<double> se_mean;
  std::optional<double> truth_mean;
  std::optional<double> bias;
  std::optional<double> rmse;
  std::optional<double> coverage;
};

struct TimingSummary {
  double mean_ms = 0.0;
  double max_ms = 0.0;
  double total_ms = 0.0;
};

struct EstimatorSummary {
  std::string label;
  long successes = 0;
  long failures = 0;  // errors plus non-converged fits
  long nonconverged = 0;
  std::vector<std::string> failure_messages;  // first few, rep order
  std::vector<ParameterSummary> parameters;
  std::optional<double> j_rejection_rate;
  std::optional<double> j_mean;
  std::optional<TimingSummary> timing;
};

struct NestingSummary {
  std::string first;
  std::string second;
  long count = 0;
  double max_relative_gap = 0.0;
  double max_abs_gap = 0.0;
};

struct ConditionSummary {
  long utr_holds = 0;
  long uum_holds = 0;
  long panels = 0;
  double mean_first_stage = 0.0;
};

struct McReport {
  std::string scenario;
  std::uint64_t seed = 0;
  long n = 0;
  long reps = 0;
  double nominal_level = 0.05;
  long failed_reps = 0;
  std::vector<EstimatorSummary> estimators;
  std::vector<NestingSummary> nesting;
  std::optional<ConditionSummary> conditions;  // discrete scenarios
  Matrix true_lambda;                          // generator's component effects
  std::optional<TimingSummary> timing;         // whole run
  std::vector<Record> records;                 // every scored estimate
};

/// Runs the scenario's replications, replication r drawing from substream
/// (seed, r). The report (timings aside) does not depend on
/// options.threads. Throws ScenarioFailed when more than half of the
/// replications error.
McReport run_scenario(const Scenario& s, std::uint64_t seed, const RunOptions& options = {});

/// zero_estimand, nesting_check, misspecified_L and utr_violation.
std::vector<Scenario> builtin_scenarios();

/// Correctly specified K = 3, L = 2, J = 5, R = 3 continuous model.
Scenario textbook_scenario(long n = 20000, long reps = 200);

/// Discrete panel where uniform treatment responses hold with homogeneous
/// effects but individual monotonicity fails.
Scenario theorem1_scenario(long n = 100000, long reps = 50);

/// Discrete panel with a parallel utility shift (uniform unordered
/// monotonicity) and heterogeneous effects.
Scenario theorem2_scenario(long n = 100000, long reps = 50);

/// Built-in or named extra scenario; throws InvalidConfig for unknown names.
Scenario find_scenario(const std::string& name);
std::vector<std::string> scenario_names();

/// Component-2 intercept for which the component-1 instrument shift moves
/// P_1 by exactly -2 times the move in P_2 (so lambda_2 = 2 lambda_1
/// yields a zero reduced form).
double calibrate_zero_estimand(dgp::DiscreteDgpConfig config);

}  // namespace fate::mc
