#include "fate/serialize.hpp"

#include "fate/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>

namespace fate::serialize {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) invalid(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) invalid("unknown key '" + key + "' in " + where);
  }
}

double get_number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) invalid(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

long get_count(const Json& j, const char* key, long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) invalid(std::string("'") + key + "' must be an integer");
  return j[key].get<long>();
}

std::string get_string(const Json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) invalid(std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

std::vector<std::string> get_strings(const Json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) invalid(std::string("'") + key + "' must be an array of strings");
  for (const auto& v : j[key]) {
    if (!v.is_string()) invalid(std::string("'") + key + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) invalid(where + " is missing '" + key + "'");
  return j[key];
}

Json strings(const std::vector<std::string>& v) { return Json(v); }

const char* weighting_name(Weighting w) { return w == Weighting::TwoStep ? "two_step" : "identity"; }

Weighting weighting_from(const std::string& s) {
  if (s == "two_step") return Weighting::TwoStep;
  if (s == "identity") return Weighting::Identity;
  invalid("weighting must be 'two_step' or 'identity', got '" + s + "'");
}

Json timing(const mc::TimingSummary& t) {
  return {{"mean_ms", t.mean_ms}, {"max_ms", t.max_ms}, {"total_ms", t.total_ms}};
}

}  // namespace

Json matrix(const Eigen::Ref<const Matrix>& m) {
  Json out = Json::array();
  for (long r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Json vector(const Eigen::Ref<const Vector>& v) {
  Json out = Json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Matrix to_matrix(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) invalid("'" + what + "' must be a non-empty array of rows");
  const long rows = static_cast<long>(j.size());
  if (!j[0].is_array() || j[0].empty()) invalid("'" + what + "' must be a non-empty array of rows");
  const long cols = static_cast<long>(j[0].size());
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<long>(row.size()) != cols) invalid("'" + what + "' has ragged rows");
    for (long c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) invalid("'" + what + "' must hold numbers");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

Vector to_vector(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) invalid("'" + what + "' must be a non-empty array of numbers");
  Vector v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) invalid("'" + what + "' must hold numbers");
    v(static_cast<long>(i)) = j[i].get<double>();
  }
  return v;
}

Json to_json(const IdentificationReport& r) {
  return {{"K", r.K},
          {"J", r.J},
          {"L", r.L},
          {"R", r.R},
          {"identified", r.identified},
          {"moment_count", r.moment_count},
          {"parameter_count", r.parameter_count},
          {"net_moment_count", r.net_moment_count},
          {"net_parameter_count", r.net_parameter_count},
          {"j_df", r.j_df}};
}

Json to_json(const iv::FirstStage& fs, const Dataset& data) {
  return {{"instruments", strings(data.instrument_names)},
          {"controls", strings(data.control_names)},
          {"gamma", vector(fs.gamma)},
          {"gamma_se", vector(fs.gamma_se)},
          {"t_stats", vector(fs.t_stats)},
          {"gamma_x", vector(fs.gamma_x)},
          {"f_joint", number(fs.f_joint)},
          {"f_single", vector(fs.f_single)}};
}

Json to_json(const iv::PiMatrix& pi) {
  Json weak = Json::array();
  for (bool w : pi.weak_instrument) weak.push_back(w);
  return {{"instruments", strings(pi.instrument_names)},
          {"outcomes", strings(pi.outcome_names)},
          {"n", pi.n_used},
          {"estimates", matrix(pi.estimates)},
          {"std_errors", matrix(pi.std_errors)},
          {"first_stage_coefs", vector(pi.first_stage_coefs)},
          {"weak_instrument", weak}};
}

Json to_json(const iv::IvGmmEstimate& e, const Dataset& data) {
  return {{"estimator", "iv_gmm"},
          {"n", data.n()},
          {"instruments", strings(data.instrument_names)},
          {"outcomes", strings(data.outcome_names)},
          {"controls", strings(data.control_names)},
          {"lambda", vector(e.lambda)},
          {"lambda_se", vector(e.lambda_se)},
          {"beta", matrix(e.beta)},
          {"gamma", vector(e.gamma)},
          {"gamma_x", vector(e.gamma_x)},
          {"j_test", {{"statistic", number(e.j_stat)}, {"df", e.j_df}, {"p_value", number(e.j_pvalue)}}},
          {"converged", e.converged},
          {"iterations", e.iterations},
          {"objective", number(e.objective)},
          {"ridge_weighting", e.ridge_weighting}};
}

Json to_json(const FateEstimate& e, double divisor) {
  Json history = Json::array();
  for (double q : e.objective_history) history.push_back(number(q));
  return {{"estimator", "fate"},
          {"L", e.L},
          {"n", e.n},
          {"instruments", strings(e.instrument_names)},
          {"outcomes", strings(e.outcome_names)},
          {"controls", strings(e.control_names)},
          {"permutation", e.permutation},
          {"effect_divisor", divisor},
          {"theta", matrix(e.theta)},
          {"theta_se", matrix(e.theta_se)},
          {"lambda", matrix(e.lambda / divisor)},
          {"lambda_se", matrix(e.lambda_se / divisor)},
          {"beta", matrix(e.beta)},
          {"beta_se", matrix(e.beta_se)},
          {"gamma", vector(e.gamma)},
          {"gamma_se", vector(e.gamma_se)},
          {"gamma_x", vector(e.gamma_x)},
          {"parameter_names", strings(e.parameter_names)},
          {"vcov", matrix(e.vcov)},
          {"j_test", {{"statistic", number(e.j_stat)}, {"df", e.j_df}, {"p_value", number(e.j_pvalue)}}},
          {"weighting", weighting_name(e.weighting)},
          {"converged", e.converged},
          {"iterations", e.iterations},
          {"objective", number(e.objective)},
          {"gradient_norm", number(e.gradient_norm)},
          {"ridge_weighting", e.ridge_weighting},
          {"objective_history", history},
          {"warnings", strings(e.warnings)}};
}

Json to_json(const ThreeStepResult& r, const iv::PiMatrix& pi) {
  return {{"estimator", "three_step"},
          {"instruments", strings(pi.instrument_names)},
          {"outcomes", strings(pi.outcome_names)},
          {"anchor", r.anchor},
          {"theta31", number(r.theta31)},
          {"theta", matrix(r.theta)},
          {"lambda", matrix(r.lambda)},
          {"residuals", matrix(r.residuals)}};
}

Json to_json(const dgp::Truth& t) {
  Json out = {{"lambda", matrix(t.lambda)}};
  if (t.theta.size() > 0) {
    out["theta"] = matrix(t.theta);
    out["pi"] = matrix(t.pi());
  } else {
    out["theta"] = nullptr;
    out["pi"] = nullptr;
  }
  out["gamma"] = t.gamma.size() > 0 ? vector(t.gamma) : Json(nullptr);
  out["gamma_x"] = t.gamma_x.size() > 0 ? vector(t.gamma_x) : Json(nullptr);
  out["beta"] = t.beta.size() > 0 ? matrix(t.beta) : Json(nullptr);
  return out;
}

Json to_json(const mc::McReport& r) {
  Json estimators = Json::array();
  for (const auto& e : r.estimators) {
    Json params = Json::array();
    for (const auto& p : e.parameters) {
      params.push_back({{"name", p.name},
                        {"count", p.count},
                        {"mean", number(p.mean)},
                        {"sd", number(p.sd)},
                        {"mc_se", number(p.mc_se)},
                        {"se_mean", optional_number(p.se_mean)},
                        {"truth", optional_number(p.truth_mean)},
                        {"bias", optional_number(p.bias)},
                        {"rmse", optional_number(p.rmse)},
                        {"coverage", optional_number(p.coverage)}});
    }
    Json item = {{"label", e.label},
                 {"successes", e.successes},
                 {"failures", e.failures},
                 {"nonconverged", e.nonconverged},
                 {"failure_messages", strings(e.failure_messages)},
                 {"j_rejection_rate", optional_number(e.j_rejection_rate)},
                 {"j_mean", optional_number(e.j_mean)},
                 {"parameters", params}};
    if (e.timing) item["timing"] = timing(*e.timing);
    estimators.push_back(std::move(item));
  }
  Json nesting = Json::array();
  for (const auto& n : r.nesting) {
    nesting.push_back({{"first", n.first},
                       {"second", n.second},
                       {"count", n.count},
                       {"max_relative_gap", number(n.max_relative_gap)},
                       {"max_abs_gap", number(n.max_abs_gap)}});
  }
  Json out = {{"scenario", r.scenario},
              {"seed", r.seed},
              {"n", r.n},
              {"reps", r.reps},
              {"nominal_level", r.nominal_level},
              {"failed_reps", r.failed_reps},
              {"true_lambda", matrix(r.true_lambda)},
              {"estimators", estimators},
              {"nesting", nesting}};
  if (r.conditions) {
    out["conditions"] = {{"panels", r.conditions->panels},
                         {"utr_holds", r.conditions->utr_holds},
                         {"uum_holds", r.conditions->uum_holds},
                         {"mean_first_stage", number(r.conditions->mean_first_stage)}};
  } else {
    out["conditions"] = nullptr;
  }
  if (r.timing) out["timing"] = timing(*r.timing);
  return out;
}

Json to_json(const dgp::ConditionReport& r) {
  Json w = Json::array();
  for (const auto& x : r.witnesses) {
    w.push_back({{"individual", x.individual},
                 {"component", x.component},
                 {"point", x.point},
                 {"point_prime", x.point_prime}});
  }
  return {{"condition", r.condition == dgp::Condition::UniformTreatmentResponses ? "UTR" : "UUM"},
          {"holds", r.holds},
          {"witnesses", w}};
}

Json to_json(const dgp::OracleDecomposition& o) {
  Json comps = Json::array();
  for (std::size_t l = 0; l < o.components.size(); ++l) {
    const auto& c = o.components[l];
    comps.push_back({{"component", l + 1},
                     {"complier_share", c.complier_share},
                     {"defier_share", c.defier_share},
                     {"complier_term", vector(c.complier_term)},
                     {"defier_term", vector(c.defier_term)},
                     {"population_mean_effect", vector(c.population_mean_effect)}});
  }
  auto opt = [](const std::optional<Vector>& v) { return v ? vector(*v) : Json(nullptr); };
  return {{"point", o.point},
          {"point_prime", o.point_prime},
          {"reduced_form", vector(o.reduced_form)},
          {"first_stage", number(o.first_stage)},
          {"iv_estimand", opt(o.iv_estimand)},
          {"utr_holds", o.utr_holds},
          {"uum_holds", o.uum_holds},
          {"weights", o.weights.size() > 0 ? vector(o.weights) : Json(nullptr)},
          {"weighted_average_effect", opt(o.weighted_average_effect)},
          {"component_weighted_late", opt(o.component_weighted_late)},
          {"survivor_shares", opt(o.survivor_shares)},
          {"components", comps}};
}

Generator generator_from_json(const Json& j) {
  const std::string kind = get_string(j, "kind", "");
  if (kind == "continuous") {
    check_keys(j,
               {"kind", "n", "gamma", "gamma_x", "alpha", "lambda", "xi_scale", "u_scales",
                "component_error_corr", "instruments"},
               "continuous generator");
    dgp::ContinuousDgpConfig c;
    c.n = get_count(j, "n", c.n);
    c.gamma = to_matrix(require(j, "gamma", "continuous generator"), "gamma");
    c.lambda = to_matrix(require(j, "lambda", "continuous generator"), "lambda");
    const long l = c.gamma.cols();
    c.alpha = j.contains("alpha") ? to_matrix(j["alpha"], "alpha") : Matrix::Zero(1, c.lambda.cols());
    c.gamma_x = j.contains("gamma_x") ? to_matrix(j["gamma_x"], "gamma_x") : Matrix::Zero(c.alpha.rows(), l);
    c.xi_scale = get_number(j, "xi_scale", 1.0);
    c.u_scales = j.contains("u_scales") ? to_vector(j["u_scales"], "u_scales") : Vector::Ones(l);
    c.component_error_corr = j.contains("component_error_corr")
                                 ? to_matrix(j["component_error_corr"], "component_error_corr")
                                 : Matrix::Identity(l, l);
    c.instruments.assign(static_cast<std::size_t>(c.gamma.rows()), {});
    if (j.contains("instruments")) {
      const auto& inst = j["instruments"];
      if (!inst.is_array() || inst.size() != c.instruments.size()) {
        invalid("'instruments' must list one distribution per instrument");
      }
      for (std::size_t k = 0; k < inst.size(); ++k) {
        check_keys(inst[k], {"dist", "p"}, "instrument distribution");
        const std::string dist = get_string(inst[k], "dist", "normal");
        if (dist == "bernoulli") {
          c.instruments[k].kind = dgp::InstrumentDistribution::Kind::Bernoulli;
          c.instruments[k].p = get_number(inst[k], "p", 0.5);
        } else if (dist != "normal") {
          invalid("instrument distribution must be 'normal' or 'bernoulli'");
        }
      }
    }
    return c;
  }
  if (kind == "discrete") {
    check_keys(j,
               {"kind", "n", "support", "support_probabilities", "mu_intercept", "mu_slope", "taste_mean",
                "taste_cov", "lambda", "effect_sd", "baseline_mean", "baseline_sd"},
               "discrete generator");
    dgp::DiscreteDgpConfig c;
    c.n = get_count(j, "n", c.n);
    const Matrix support = to_matrix(require(j, "support", "discrete generator"), "support");
    for (long g = 0; g < support.rows(); ++g) c.support.push_back(support.row(g).transpose());
    const Vector probs = j.contains("support_probabilities")
                             ? to_vector(j["support_probabilities"], "support_probabilities")
                             : Vector::Constant(support.rows(), 1.0 / static_cast<double>(support.rows()));
    c.support_probabilities.assign(probs.data(), probs.data() + probs.size());
    c.mu_intercept = to_vector(require(j, "mu_intercept", "discrete generator"), "mu_intercept");
    c.mu_slope = to_matrix(require(j, "mu_slope", "discrete generator"), "mu_slope");
    const long l = c.mu_intercept.size();
    c.taste_mean = j.contains("taste_mean") ? to_vector(j["taste_mean"], "taste_mean") : Vector::Zero(l);
    c.taste_cov = j.contains("taste_cov") ? to_matrix(j["taste_cov"], "taste_cov") : Matrix::Identity(l, l);
    c.lambda = to_matrix(require(j, "lambda", "discrete generator"), "lambda");
    c.effect_sd = get_number(j, "effect_sd", 0.0);
    c.baseline_mean = j.contains("baseline_mean") ? to_vector(j["baseline_mean"], "baseline_mean")
                                                  : Vector::Zero(c.lambda.cols());
    c.baseline_sd = get_number(j, "baseline_sd", 1.0);
    return c;
  }
  invalid("generator 'kind' must be 'continuous' or 'discrete'");
}

Json generator_to_json(const Generator& g) {
  if (const auto* c = std::get_if<dgp::ContinuousDgpConfig>(&g)) {
    Json inst = Json::array();
    for (const auto& d : c->instruments) {
      if (d.kind == dgp::InstrumentDistribution::Kind::Bernoulli) {
        inst.push_back({{"dist", "bernoulli"}, {"p", d.p}});
      } else {
        inst.push_back({{"dist", "normal"}});
      }
    }
    return {{"kind", "continuous"},
            {"n", c->n},
            {"gamma", matrix(c->gamma)},
            {"gamma_x", matrix(c->gamma_x)},
            {"alpha", matrix(c->alpha)},
            {"lambda", matrix(c->lambda)},
            {"xi_scale", c->xi_scale},
            {"u_scales", vector(c->u_scales)},
            {"component_error_corr", matrix(c->component_error_corr)},
            {"instruments", inst}};
  }
  const auto& c = std::get<dgp::DiscreteDgpConfig>(g);
  Json support = Json::array();
  for (const auto& z : c.support) support.push_back(vector(z));
  return {{"kind", "discrete"},
          {"n", c.n},
          {"support", support},
          {"support_probabilities", c.support_probabilities},
          {"mu_intercept", vector(c.mu_intercept)},
          {"mu_slope", matrix(c.mu_slope)},
          {"taste_mean", vector(c.taste_mean)},
          {"taste_cov", matrix(c.taste_cov)},
          {"lambda", matrix(c.lambda)},
          {"effect_sd", c.effect_sd},
          {"baseline_mean", vector(c.baseline_mean)},
          {"baseline_sd", c.baseline_sd}};
}

mc::EstimatorSpec estimator_from_json(const Json& j) {
  check_keys(j, {"kind", "L", "defining", "weighting"}, "estimator");
  mc::EstimatorSpec e;
  const std::string kind = get_string(j, "kind", "");
  if (kind == "fate") {
    e.kind = mc::EstimatorKind::Fate;
    e.L = static_cast<int>(get_count(j, "L", 0));
    e.defining = get_strings(j, "defining");
    e.weighting = weighting_from(get_string(j, "weighting", "two_step"));
  } else if (kind == "just_identified") {
    e.kind = mc::EstimatorKind::JustIdentified;
  } else if (kind == "iv_gmm" || kind == "ivgmm") {
    e.kind = mc::EstimatorKind::IvGmm;
  } else if (kind == "three_step") {
    e.kind = mc::EstimatorKind::ThreeStep;
  } else if (kind == "reduced_form") {
    e.kind = mc::EstimatorKind::ReducedForm;
  } else {
    invalid("unknown estimator kind '" + kind + "'");
  }
  return e;
}

mc::Scenario scenario_from_json(const Json& j) {
  check_keys(j,
             {"builtin", "name", "description", "generator", "estimators", "n", "reps", "nominal_level",
              "nesting", "point", "point_prime", "target"},
             "montecarlo");
  mc::Scenario s;
  if (j.contains("builtin")) {
    s = mc::find_scenario(get_string(j, "builtin", ""));
  } else {
    s.name = get_string(j, "name", "custom");
    s.generator = generator_from_json(require(j, "generator", "montecarlo"));
    const auto& est = require(j, "estimators", "montecarlo");
    if (!est.is_array()) invalid("'estimators' must be an array");
    for (const auto& e : est) s.estimators.push_back(estimator_from_json(e));
    s.n = std::visit([](const auto& c) { return c.n; }, s.generator);
  }
  s.name = get_string(j, "name", s.name);
  s.description = get_string(j, "description", s.description);
  s.n = get_count(j, "n", s.n);
  s.reps = get_count(j, "reps", s.reps);
  s.nominal_level = get_number(j, "nominal_level", s.nominal_level);
  s.point = get_count(j, "point", s.point);
  s.point_prime = get_count(j, "point_prime", s.point_prime);
  if (j.contains("nesting")) {
    s.nesting.clear();
    for (const auto& p : j["nesting"]) {
      if (!p.is_array() || p.size() != 2) invalid("'nesting' entries must be index pairs");
      s.nesting.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>()});
    }
  }
  if (j.contains("target")) {
    const std::string t = get_string(j, "target", "none");
    if (t == "none") {
      s.target = mc::DiscreteTarget::None;
    } else if (t == "population") {
      s.target = mc::DiscreteTarget::Population;
    } else if (t == "weighted_average_effect") {
      s.target = mc::DiscreteTarget::WeightedAverageEffect;
    } else if (t == "component_weighted_late") {
      s.target = mc::DiscreteTarget::ComponentWeightedLate;
    } else {
      invalid("unknown target '" + t + "'");
    }
  }
  mc::validate(s);
  return s;
}

FateSpec fate_spec_from_json(const Json& j) {
  FateSpec s;
  s.L = static_cast<int>(get_count(j, "L", s.L));
  s.defining_instruments = get_strings(j, "defining_instruments");
  s.weighting = weighting_from(get_string(j, "weighting", "two_step"));
  s.max_iterations = static_cast<int>(get_count(j, "max_iterations", s.max_iterations));
  s.tol_objective = get_number(j, "tol_objective", s.tol_objective);
  s.tol_params = get_number(j, "tol_params", s.tol_params);
  return s;
}

csv::RoleMap roles_from_json(const Json& j) {
  csv::RoleMap r;
  r.outcomes = get_strings(j, "outcomes");
  r.treatment = get_string(j, "treatment", "");
  r.instruments = get_strings(j, "instruments");
  r.controls = get_strings(j, "controls");
  return r;
}

RunConfig run_config_from_json(const Json& j, const std::string& base_dir) {
  check_keys(j, {"data", "estimator", "simulate", "montecarlo", "output", "seed"}, "config");
  RunConfig rc;
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, {"csv", "outcomes", "treatment", "instruments", "controls"}, "data");
    if (d.contains("csv")) {
      std::filesystem::path p = get_string(d, "csv", "");
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      rc.csv_path = p.string();
    }
    rc.roles = roles_from_json(d);
  }
  if (j.contains("estimator")) {
    const auto& e = j["estimator"];
    check_keys(e,
               {"kind", "L", "defining_instruments", "weighting", "annualize_divisor", "max_iterations",
                "tol_objective", "tol_params", "anchor"},
               "estimator");
    rc.estimator_kind = get_string(e, "kind", "fate");
    if (rc.estimator_kind == "iv_gmm") rc.estimator_kind = "ivgmm";
    if (rc.estimator_kind != "fate" && rc.estimator_kind != "ivgmm" && rc.estimator_kind != "three_step" &&
        rc.estimator_kind != "just_identified") {
      invalid("unknown estimator kind '" + rc.estimator_kind + "'");
    }
    rc.fate = fate_spec_from_json(e);
    rc.anchor = get_count(e, "anchor", 0);
    rc.annualize_divisor = get_number(e, "annualize_divisor", 1.0);
    if (!(rc.annualize_divisor > 0.0)) invalid("annualize_divisor must be positive");
  }
  if (j.contains("simulate")) rc.simulate = generator_from_json(j["simulate"]);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) invalid("'seed' must be a nonnegative integer");
    rc.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("montecarlo")) rc.montecarlo = scenario_from_json(j["montecarlo"]);
  if (j.contains("output")) {
    const auto& o = j["output"];
    check_keys(o, {"json", "table"}, "output");
    if (o.contains("json")) rc.json_path = get_string(o, "json", "");
    if (o.contains("table")) rc.table = o["table"].get<bool>();
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    invalid("config '" + path + "' is not valid JSON: " + ex.what());
  }
  return run_config_from_json(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace fate::serialize
