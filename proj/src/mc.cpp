#include "fate/mc.hpp"

#include "fate/errors.hpp"
#include "fate/iv.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace fate::mc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxFailureMessages = 5;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

std::string at(const std::vector<std::string>& names, long i) { return names[static_cast<std::size_t>(i)]; }

}  // namespace

std::string EstimatorSpec::label() const {
  switch (kind) {
    case EstimatorKind::JustIdentified:
      return "just_identified";
    case EstimatorKind::IvGmm:
      return "iv_gmm";
    case EstimatorKind::ThreeStep:
      return "three_step";
    case EstimatorKind::ReducedForm:
      return "reduced_form";
    case EstimatorKind::Fate: {
      std::string s = "fate_L" + std::to_string(L);
      if (weighting == Weighting::Identity) s += "_identity";
      return s;
    }
  }
  return "unknown";
}

void validate(const Scenario& s) {
  if (s.reps < 1) invalid("scenario '" + s.name + "': reps must be at least 1");
  if (s.n < 100) invalid("scenario '" + s.name + "': n must be at least 100");
  if (!(s.nominal_level > 0.0 && s.nominal_level < 1.0)) invalid("nominal_level must lie in (0, 1)");
  if (s.estimators.empty()) invalid("scenario '" + s.name + "' lists no estimators");
  for (const auto& e : s.estimators) {
    if (e.kind == EstimatorKind::Fate && e.L < 1) invalid("Fate estimator needs L >= 1");
  }
  for (const auto& p : s.nesting) {
    if (p.first >= s.estimators.size() || p.second >= s.estimators.size()) {
      invalid("nesting pair refers to a missing estimator");
    }
  }
  if (const auto* c = std::get_if<dgp::ContinuousDgpConfig>(&s.generator)) {
    auto copy = *c;
    copy.n = s.n;
    dgp::validate(copy);
    if (s.target != DiscreteTarget::None) invalid("targets apply to discrete scenarios only");
  } else {
    auto copy = std::get<dgp::DiscreteDgpConfig>(s.generator);
    copy.n = s.n;
    dgp::validate(copy);
    const long g = static_cast<long>(copy.support.size());
    if (s.point < 0 || s.point >= g || s.point_prime < 0 || s.point_prime >= g) {
      throw Error(ErrorKind::UnknownGridPoint, "scenario comparison points are outside the support");
    }
    if (s.target != DiscreteTarget::None && (copy.instrument_dim() != 1 || g != 2)) {
      invalid("discrete targets need a scalar instrument with two support points");
    }
    if (s.target == DiscreteTarget::Population && copy.num_components() != 2) {
      invalid("population target needs exactly two components");
    }
  }
}

namespace {

struct Outcome {
  bool ok = false;
  bool converged = true;
  std::string error;
  std::vector<Record> records;
  Vector effects;
  std::optional<double> j_stat;
  std::optional<double> j_pvalue;
  double ms = 0.0;
};

struct RepResult {
  bool generated = false;
  std::string error;
  std::vector<Outcome> outcomes;
  bool utr = false;
  bool uum = false;
  double first_stage = 0.0;
};

/// Scoring targets shared by all replications of a discrete scenario.
struct PopulationTarget {
  Vector reduced_form;  // per unit of z
  Vector iv;
};

/// Truth for IV-type (iv) and reduced-form (rf) estimates of a discrete
/// replication, per outcome.
struct DiscreteTruth {
  std::optional<Vector> iv;
  std::optional<Vector> rf;
};

Matrix flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

void add(Outcome& out, long rep, std::size_t e, std::string name, double est, double se,
         std::optional<double> truth) {
  out.records.push_back({rep, e, std::move(name), est, se, truth});
}

std::optional<double> entry(const std::optional<Matrix>& m, long r, long c) {
  if (!m) return std::nullopt;
  return (*m)(r, c);
}

std::vector<int> defining_indices(const Dataset& data, const std::vector<std::string>& names, int l) {
  std::vector<int> idx;
  if (names.empty()) {
    for (int i = 0; i < l; ++i) idx.push_back(i);
    return idx;
  }
  for (const auto& name : names) {
    const auto it = std::find(data.instrument_names.begin(), data.instrument_names.end(), name);
    if (it == data.instrument_names.end()) {
      throw Error(ErrorKind::UnknownInstrument, "unknown instrument '" + name + "'");
    }
    idx.push_back(static_cast<int>(it - data.instrument_names.begin()));
  }
  return idx;
}

/// OLS of each outcome on [Z X]; coefficients on Z with HC0 errors.
std::pair<Matrix, Matrix> reduced_form(const Dataset& data) {
  const Matrix zs = data.zstar();
  const LeastSquares ls(zs);
  const Matrix coef = ls.solve(data.y);
  const Matrix resid = data.y - zs * coef;
  const Matrix bread = ls.gram_inverse();
  const long k = data.num_instruments();
  Matrix se(k, data.num_outcomes());
  for (long j = 0; j < data.num_outcomes(); ++j) {
    const Matrix scaled = zs.array().colwise() * resid.col(j).array();
    const Matrix v = bread * (scaled.transpose() * scaled) * bread;
    for (long i = 0; i < k; ++i) se(i, j) = std::sqrt(v(i, i));
  }
  return {coef.topRows(k), se};
}

Outcome run_estimator(const EstimatorSpec& spec, std::size_t e, long rep, const dgp::SyntheticData& sd,
                      const DiscreteTruth& discrete) {
  Outcome out;
  const Dataset& data = sd.dataset;
  const dgp::Truth& truth = sd.truth;
  const bool has_theta = !sd.latent && truth.theta.size() > 0;
  const long k = data.num_instruments();
  const long jn = data.num_outcomes();
  const auto& y = data.outcome_names;

  switch (spec.kind) {
    case EstimatorKind::JustIdentified: {
      const auto pi = iv::pi_matrix(data);
      const std::optional<Matrix> t = has_theta ? std::optional<Matrix>(truth.pi()) : std::nullopt;
      for (long r = 0; r < k; ++r) {
        for (long j = 0; j < jn; ++j) {
          std::optional<double> tv = entry(t, r, j);
          if (!has_theta && discrete.iv) tv = (*discrete.iv)(j);
          add(out, rep, e, "pi[" + at(data.instrument_names, r) + "," + at(y, j) + "]", pi.estimates(r, j),
              pi.std_errors(r, j), tv);
        }
      }
      out.effects = flatten(pi.estimates);
      break;
    }
    case EstimatorKind::ReducedForm: {
      const auto [coef, se] = reduced_form(data);
      std::optional<Matrix> t;
      if (has_theta) t = Matrix(truth.gamma.asDiagonal() * truth.theta * truth.lambda);
      for (long r = 0; r < k; ++r) {
        for (long j = 0; j < jn; ++j) {
          std::optional<double> tv = entry(t, r, j);
          if (!has_theta && discrete.rf) tv = (*discrete.rf)(j);
          add(out, rep, e, "rf[" + at(data.instrument_names, r) + "," + at(y, j) + "]", coef(r, j), se(r, j),
              tv);
        }
      }
      out.effects = flatten(coef);
      break;
    }
    case EstimatorKind::IvGmm: {
      const auto g = iv::iv_gmm(data);
      std::optional<Matrix> t;
      if (has_theta && truth.num_components() == 1) t = dgp::normalize(truth, {0}).lambda;
      for (long j = 0; j < jn; ++j) {
        add(out, rep, e, "lambda[1," + at(y, j) + "]", g.lambda(j), g.lambda_se(j), entry(t, 0, j));
      }
      out.effects = g.lambda;
      out.converged = g.converged;
      out.j_stat = g.j_stat;
      out.j_pvalue = g.j_pvalue;
      break;
    }
    case EstimatorKind::Fate: {
      FateSpec fs;
      fs.L = spec.L;
      fs.defining_instruments = spec.defining;
      fs.weighting = spec.weighting;
      const auto est = fate_fit(data, fs);
      std::optional<dgp::NormalizedTruth> t;
      if (has_theta && truth.num_components() == spec.L) {
        t = dgp::normalize(truth, defining_indices(data, spec.defining, spec.L));
      }
      for (long j = 0; j < jn; ++j) {
        for (long l = 0; l < spec.L; ++l) {
          add(out, rep, e, "lambda[" + std::to_string(l + 1) + "," + at(y, j) + "]", est.lambda(l, j),
              est.lambda_se(l, j), t ? std::optional<double>(t->lambda(l, j)) : std::nullopt);
        }
      }
      for (long r = spec.L; r < k; ++r) {
        for (long l = 0; l < spec.L; ++l) {
          add(out, rep, e, "theta[" + at(est.instrument_names, r) + "," + std::to_string(l + 1) + "]",
              est.theta(r, l), est.theta_se(r, l), t ? std::optional<double>(t->theta(r, l)) : std::nullopt);
        }
      }
      out.effects = flatten(est.lambda);
      out.converged = est.converged;
      if (est.j_df >= 1) {
        out.j_stat = est.j_stat;
        out.j_pvalue = est.j_pvalue;
      }
      break;
    }
    case EstimatorKind::ThreeStep: {
      const auto pi = iv::pi_matrix(data);
      const auto ts = three_step_fit(pi.estimates, 0);
      std::optional<dgp::NormalizedTruth> t;
      if (has_theta && truth.num_components() == 2 && k == 3) t = dgp::normalize(truth, {0, 1});
      for (long j = 0; j < jn; ++j) {
        for (long l = 0; l < 2; ++l) {
          add(out, rep, e, "lambda[" + std::to_string(l + 1) + "," + at(y, j) + "]", ts.lambda(l, j), kNaN,
              t ? std::optional<double>(t->lambda(l, j)) : std::nullopt);
        }
      }
      add(out, rep, e, "theta[" + at(data.instrument_names, 2) + ",1]", ts.theta31, kNaN,
          t ? std::optional<double>(t->theta(2, 0)) : std::nullopt);
      out.effects = flatten(ts.lambda);
      break;
    }
  }
  out.ok = true;
  return out;
}

RepResult run_rep(const Scenario& s, long rep, std::uint64_t seed, const std::optional<PopulationTarget>& pop) {
  RepResult res;
  dgp::SyntheticData sd;
  DiscreteTruth discrete;
  try {
    const RngSeed rs{seed, static_cast<std::uint64_t>(rep)};
    if (const auto* c = std::get_if<dgp::ContinuousDgpConfig>(&s.generator)) {
      auto cfg = *c;
      cfg.n = s.n;
      sd = dgp::simulate_continuous(cfg, rs);
    } else {
      auto cfg = std::get<dgp::DiscreteDgpConfig>(s.generator);
      cfg.n = s.n;
      sd = dgp::simulate_discrete(cfg, rs);
      const auto& panel = *sd.latent;
      const auto oracle = dgp::oracle_iv_decomposition(panel, s.point, s.point_prime);
      res.utr = oracle.utr_holds;
      res.uum = oracle.uum_holds;
      res.first_stage = oracle.first_stage;
      if (s.target != DiscreteTarget::None) {
        const double dz = panel.support[static_cast<std::size_t>(s.point)](0) -
                          panel.support[static_cast<std::size_t>(s.point_prime)](0);
        switch (s.target) {
          case DiscreteTarget::Population:
            discrete.iv = pop->iv;
            discrete.rf = pop->reduced_form;
            break;
          case DiscreteTarget::WeightedAverageEffect:
            discrete.iv = oracle.weighted_average_effect;
            discrete.rf = Vector(oracle.reduced_form / dz);
            break;
          case DiscreteTarget::ComponentWeightedLate:
            discrete.iv = oracle.component_weighted_late;
            discrete.rf = Vector(oracle.reduced_form / dz);
            break;
          case DiscreteTarget::None:
            break;
        }
      }
    }
    res.generated = true;
  } catch (const std::exception& ex) {
    res.error = ex.what();
    return res;
  }
  for (std::size_t e = 0; e < s.estimators.size(); ++e) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run_estimator(s.estimators[e], e, rep, sd, discrete);
    } catch (const std::exception& ex) {
      out = Outcome{};
      out.error = ex.what();
    }
    out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    res.outcomes.push_back(std::move(out));
  }
  return res;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? kNaN : pairwise_sum(v) / static_cast<double>(v.size());
}

ParameterSummary summarize(const std::string& name, const std::vector<const Record*>& recs, double z) {
  ParameterSummary p;
  p.name = name;
  p.count = static_cast<long>(recs.size());
  std::vector<double> est;
  std::vector<double> se;
  std::vector<double> truth;
  std::vector<double> err;
  std::vector<double> sq;
  std::vector<double> covered;
  for (const Record* r : recs) {
    est.push_back(r->estimate);
    if (std::isfinite(r->se)) se.push_back(r->se);
    if (r->truth) {
      const double d = r->estimate - *r->truth;
      truth.push_back(*r->truth);
      err.push_back(d);
      sq.push_back(d * d);
      if (std::isfinite(r->se)) covered.push_back(std::abs(d) <= z * r->se ? 1.0 : 0.0);
    }
  }
  p.mean = mean_of(est);
  std::vector<double> dev;
  for (double x : est) dev.push_back((x - p.mean) * (x - p.mean));
  p.sd = est.size() > 1 ? std::sqrt(pairwise_sum(dev) / static_cast<double>(est.size() - 1)) : 0.0;
  p.mc_se = est.empty() ? kNaN : p.sd / std::sqrt(static_cast<double>(est.size()));
  if (!se.empty()) p.se_mean = mean_of(se);
  if (!truth.empty()) {
    p.truth_mean = mean_of(truth);
    p.bias = mean_of(err);
    p.rmse = std::sqrt(mean_of(sq));
  }
  if (!covered.empty()) p.coverage = mean_of(covered);
  return p;
}

TimingSummary timing_of(const std::vector<double>& ms) {
  TimingSummary t;
  if (ms.empty()) return t;
  t.total_ms = pairwise_sum(ms);
  t.mean_ms = t.total_ms / static_cast<double>(ms.size());
  t.max_ms = *std::max_element(ms.begin(), ms.end());
  return t;
}

std::optional<PopulationTarget> population_target(const Scenario& s) {
  if (s.target != DiscreteTarget::Population) return std::nullopt;
  const auto& c = std::get<dgp::DiscreteDgpConfig>(s.generator);
  const Vector& z = c.support[static_cast<std::size_t>(s.point)];
  const Vector& zp = c.support[static_cast<std::size_t>(s.point_prime)];
  const Vector delta = dgp::population_shares(c, z) - dgp::population_shares(c, zp);
  const double dz = z(0) - zp(0);
  PopulationTarget t;
  t.reduced_form = (c.lambda.transpose() * delta.tail(2)) / dz;
  const double first_stage = delta(1) + delta(2);
  if (first_stage == 0.0) throw Error(ErrorKind::DegenerateComparison, "population first stage is zero");
  t.iv = t.reduced_form * dz / first_stage;
  return t;
}

}  // namespace

McReport run_scenario(const Scenario& s, std::uint64_t seed, const RunOptions& options) {
  validate(s);
  const auto run_start = std::chrono::steady_clock::now();
  const auto pop = population_target(s);
  const bool discrete = std::holds_alternative<dgp::DiscreteDgpConfig>(s.generator);

  std::vector<RepResult> results(static_cast<std::size_t>(s.reps));
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(s.reps)));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long r = next++; r < s.reps; r = next++) results[static_cast<std::size_t>(r)] = run_rep(s, r, seed, pop);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  McReport rep;
  rep.scenario = s.name;
  rep.seed = seed;
  rep.n = s.n;
  rep.reps = s.reps;
  rep.nominal_level = s.nominal_level;
  if (const auto* c = std::get_if<dgp::ContinuousDgpConfig>(&s.generator)) {
    rep.true_lambda = c->lambda;
  } else {
    rep.true_lambda = std::get<dgp::DiscreteDgpConfig>(s.generator).lambda;
  }

  for (const auto& r : results) {
    if (!r.generated) {
      ++rep.failed_reps;
      continue;
    }
    if (std::any_of(r.outcomes.begin(), r.outcomes.end(), [](const Outcome& o) { return !o.ok; })) {
      ++rep.failed_reps;
    }
  }
  if (2 * rep.failed_reps > s.reps) {
    std::string first;
    for (const auto& r : results) {
      if (!r.error.empty()) {
        first = r.error;
        break;
      }
      for (const auto& o : r.outcomes) {
        if (!o.ok) {
          first = o.error;
          break;
        }
      }
      if (!first.empty()) break;
    }
    throw Error(ErrorKind::ScenarioFailed, "scenario '" + s.name + "': " + std::to_string(rep.failed_reps) +
                                               " of " + std::to_string(s.reps) + " replications failed (" +
                                               first + ")");
  }

  const boost::math::normal normal;
  const double z = boost::math::quantile(normal, 1.0 - s.nominal_level / 2.0);
  std::vector<double> all_ms;
  for (std::size_t e = 0; e < s.estimators.size(); ++e) {
    EstimatorSummary sum;
    sum.label = s.estimators[e].label();
    std::vector<std::string> order;
    std::vector<std::vector<const Record*>> by_param;
    std::vector<double> j_stats;
    std::vector<double> rejections;
    std::vector<double> ms;
    for (const auto& r : results) {
      if (!r.generated) continue;
      const Outcome& o = r.outcomes[e];
      ms.push_back(o.ms);
      if (!o.ok || !o.converged) {
        ++sum.failures;
        if (o.ok) ++sum.nonconverged;
        if (sum.failure_messages.size() < kMaxFailureMessages) {
          sum.failure_messages.push_back(o.ok ? "not converged" : o.error);
        }
        continue;
      }
      ++sum.successes;
      for (const Record& rec : o.records) {
        auto it = std::find(order.begin(), order.end(), rec.parameter);
        if (it == order.end()) {
          order.push_back(rec.parameter);
          by_param.emplace_back();
          it = order.end() - 1;
        }
        by_param[static_cast<std::size_t>(it - order.begin())].push_back(&rec);
      }
      if (o.j_stat) {
        j_stats.push_back(*o.j_stat);
        rejections.push_back(*o.j_pvalue < s.nominal_level ? 1.0 : 0.0);
      }
    }
    for (std::size_t p = 0; p < order.size(); ++p) sum.parameters.push_back(summarize(order[p], by_param[p], z));
    if (!j_stats.empty()) {
      sum.j_mean = mean_of(j_stats);
      sum.j_rejection_rate = mean_of(rejections);
    }
    if (options.timings) sum.timing = timing_of(ms);
    all_ms.insert(all_ms.end(), ms.begin(), ms.end());
    rep.estimators.push_back(std::move(sum));
  }

  for (const auto& pair : s.nesting) {
    NestingSummary ns;
    ns.first = s.estimators[pair.first].label();
    ns.second = s.estimators[pair.second].label();
    for (const auto& r : results) {
      if (!r.generated) continue;
      const Outcome& a = r.outcomes[pair.first];
      const Outcome& b = r.outcomes[pair.second];
      if (!a.ok || !b.ok || !a.converged || !b.converged) continue;
      if (a.effects.size() != b.effects.size()) {
        invalid("nesting pair '" + ns.first + "' / '" + ns.second + "' compares effects of different sizes");
      }
      const double gap = (a.effects - b.effects).lpNorm<Eigen::Infinity>();
      const double scale = std::max(b.effects.lpNorm<Eigen::Infinity>(), std::numeric_limits<double>::min());
      ns.max_abs_gap = std::max(ns.max_abs_gap, gap);
      ns.max_relative_gap = std::max(ns.max_relative_gap, gap / scale);
      ++ns.count;
    }
    rep.nesting.push_back(ns);
  }

  if (discrete) {
    ConditionSummary c;
    std::vector<double> fs;
    for (const auto& r : results) {
      if (!r.generated) continue;
      ++c.panels;
      c.utr_holds += r.utr ? 1 : 0;
      c.uum_holds += r.uum ? 1 : 0;
      fs.push_back(r.first_stage);
    }
    c.mean_first_stage = mean_of(fs);
    rep.conditions = c;
  }

  for (auto& r : results) {
    for (auto& o : r.outcomes) {
      if (!o.ok) continue;
      for (auto& rec : o.records) rep.records.push_back(std::move(rec));
    }
  }

  if (options.timings) {
    auto t = timing_of(all_ms);
    t.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - run_start).count();
    rep.timing = t;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// scenarios

namespace {

dgp::ContinuousDgpConfig continuous_base(long k, long l, long j, long r) {
  dgp::ContinuousDgpConfig c;
  c.gamma = Matrix::Zero(k, l);
  c.gamma_x = Matrix::Zero(r, l);
  for (long i = 0; i < r; ++i) {
    for (long m = 0; m < l; ++m) c.gamma_x(i, m) = i == 0 ? 0.2 : 0.1 * static_cast<double>((i + m) % 3);
  }
  c.alpha = Matrix::Zero(r, j);
  for (long i = 0; i < r; ++i) {
    for (long m = 0; m < j; ++m) c.alpha(i, m) = i == 0 ? 1.0 : 0.3 - 0.1 * static_cast<double>((i + m) % 4);
  }
  c.xi_scale = 1.0;
  c.u_scales = Vector::Ones(l);
  c.component_error_corr = Matrix::Identity(l, l);
  c.instruments.assign(static_cast<std::size_t>(k), {});
  return c;
}

Matrix effects_two() {
  Matrix lambda(2, 5);
  lambda << 1.0, 0.5, -0.3, 0.8, 0.2,  //
      0.2, 1.2, 0.7, -0.4, 0.9;
  return lambda;
}

dgp::DiscreteDgpConfig binary_instrument_base() {
  dgp::DiscreteDgpConfig c;
  Vector z0(1);
  Vector z1(1);
  z0 << 0.0;
  z1 << 1.0;
  c.support = {z0, z1};
  c.support_probabilities = {0.5, 0.5};
  c.mu_intercept = Vector::Zero(2);
  c.mu_slope = Matrix::Zero(2, 1);
  c.taste_mean = Vector::Zero(2);
  c.taste_cov.resize(2, 2);
  c.taste_cov << 1.0, 0.5, 0.5, 1.0;
  c.baseline_mean = Vector::Zero(2);
  c.baseline_sd = 1.0;
  return c;
}

EstimatorSpec fate(int l, std::vector<std::string> defining = {}) {
  EstimatorSpec e;
  e.kind = EstimatorKind::Fate;
  e.L = l;
  e.defining = std::move(defining);
  return e;
}

EstimatorSpec simple(EstimatorKind k) {
  EstimatorSpec e;
  e.kind = k;
  return e;
}

Scenario zero_estimand() {
  auto c = binary_instrument_base();
  c.mu_slope(0, 0) = 0.8;
  c.lambda.resize(2, 2);
  c.lambda << 1.0, 0.5,  //
      2.0, 1.0;
  c.effect_sd = 0.5;
  c.mu_intercept(1) = calibrate_zero_estimand(c);
  Scenario s;
  s.name = "zero_estimand";
  s.description =
      "instrument raises component 1 only; half its new takers leave component 2, and lambda_2 = 2 lambda_1, "
      "so the reduced form is zero although both effects are positive";
  s.generator = c;
  s.estimators = {simple(EstimatorKind::ReducedForm), simple(EstimatorKind::JustIdentified)};
  s.n = 10000;
  s.reps = 200;
  s.target = DiscreteTarget::Population;
  return s;
}

Scenario nesting_check() {
  auto c = continuous_base(3, 1, 5, 2);
  c.gamma << 0.5, 0.4, 0.3;
  c.lambda.resize(1, 5);
  c.lambda << 1.0, 0.5, -0.3, 0.8, 0.2;
  Scenario s;
  s.name = "nesting_check";
  s.description = "FATE with L = 1 against pooled IV-GMM, and with L = K against just-identified IV";
  s.generator = c;
  s.estimators = {simple(EstimatorKind::IvGmm), fate(1), simple(EstimatorKind::JustIdentified), fate(3)};
  s.nesting = {{1, 0}, {3, 2}};
  s.n = 10000;
  s.reps = 20;
  return s;
}

Scenario misspecified_l() {
  auto c = continuous_base(3, 3, 5, 1);
  c.gamma << 0.6, 0.0, 0.0,  //
      0.0, 0.5, 0.0,         //
      0.1, 0.0, 0.5;
  c.lambda.resize(3, 5);
  c.lambda << 1.0, 0.5, -0.3, 0.8, 0.2,  //
      0.2, 1.2, 0.7, -0.4, 0.9,          //
      -0.6, 0.1, 1.5, 0.3, -0.8;
  Scenario s;
  s.name = "misspecified_L";
  s.description = "three components and three instruments, fitted with L = 2: J-test power";
  s.generator = c;
  s.estimators = {fate(2), fate(3)};
  s.n = 20000;
  s.reps = 500;
  return s;
}

Scenario utr_violation() {
  auto c = continuous_base(3, 2, 5, 1);
  c.gamma << 1.0, 0.0,  //
      0.0, 1.0,         //
      1.5, -0.6;
  c.lambda = effects_two();
  Scenario s;
  s.name = "utr_violation";
  s.description =
      "instrument z3 raises component 1 and lowers component 2, so its IV estimand leaves the convex hull of "
      "the component effects; FATE defined on z1, z2 still recovers them";
  s.generator = c;
  s.estimators = {simple(EstimatorKind::JustIdentified), fate(2, {"z1", "z2"})};
  s.n = 20000;
  s.reps = 200;
  return s;
}

}  // namespace

std::vector<Scenario> builtin_scenarios() { return {zero_estimand(), nesting_check(), misspecified_l(), utr_violation()}; }

Scenario textbook_scenario(long n, long reps) {
  auto c = continuous_base(3, 2, 5, 3);
  c.gamma << 0.6, 0.0,  //
      0.0, 0.5,         //
      0.3, 0.4;
  c.lambda = effects_two();
  c.component_error_corr << 1.0, 0.3, 0.3, 1.0;
  Scenario s;
  s.name = "textbook";
  s.description = "correctly specified K = 3, L = 2, J = 5, R = 3 continuous model";
  s.generator = c;
  s.estimators = {simple(EstimatorKind::JustIdentified), fate(2), simple(EstimatorKind::ThreeStep)};
  s.n = n;
  s.reps = reps;
  return s;
}

Scenario theorem1_scenario(long n, long reps) {
  auto c = binary_instrument_base();
  c.mu_intercept << -1.0, -1.0;
  c.mu_slope << 0.5, 0.8;
  c.lambda.resize(2, 2);
  c.lambda << 1.0, 0.5,  //
      3.0, -0.5;
  c.effect_sd = 0.0;
  Scenario s;
  s.name = "theorem1";
  s.description =
      "both component shares rise with the instrument while some individuals switch from component 1 to 2; "
      "homogeneous effects";
  s.generator = c;
  s.estimators = {simple(EstimatorKind::JustIdentified), simple(EstimatorKind::ReducedForm)};
  s.n = n;
  s.reps = reps;
  s.target = DiscreteTarget::WeightedAverageEffect;
  return s;
}

Scenario theorem2_scenario(long n, long reps) {
  auto c = binary_instrument_base();
  c.mu_intercept << -0.5, -0.5;
  c.mu_slope << 0.7, 0.7;
  c.lambda.resize(2, 2);
  c.lambda << 1.0, 0.5,  //
      3.0, -0.5;
  c.effect_sd = 1.0;
  Scenario s;
  s.name = "theorem2";
  s.description = "parallel utility shift: no defiers of any component; heterogeneous effects";
  s.generator = c;
  s.estimators = {simple(EstimatorKind::JustIdentified), simple(EstimatorKind::ReducedForm)};
  s.n = n;
  s.reps = reps;
  s.target = DiscreteTarget::ComponentWeightedLate;
  return s;
}

std::vector<std::string> scenario_names() {
  return {"zero_estimand", "nesting_check", "misspecified_L", "utr_violation", "textbook", "theorem1", "theorem2"};
}

Scenario find_scenario(const std::string& name) {
  if (name == "textbook") return textbook_scenario();
  if (name == "theorem1") return theorem1_scenario();
  if (name == "theorem2") return theorem2_scenario();
  if (name == "zero_estimand") return zero_estimand();
  if (name == "nesting_check") return nesting_check();
  if (name == "misspecified_L") return misspecified_l();
  if (name == "utr_violation") return utr_violation();
  invalid("unknown scenario '" + name + "'");
}

double calibrate_zero_estimand(dgp::DiscreteDgpConfig c) {
  if (c.num_components() != 2 || c.instrument_dim() != 1 || c.support.size() != 2) {
    invalid("zero-estimand calibration needs two components and a two-point scalar instrument");
  }
  auto gap = [&](double a2) {
    c.mu_intercept(1) = a2;
    const Vector delta = dgp::population_shares(c, c.support[1]) - dgp::population_shares(c, c.support[0]);
    return delta(1) + 2.0 * delta(2);
  };
  std::uintmax_t iterations = 200;
  const auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-13; };
  const auto [lo, hi] = boost::math::tools::toms748_solve(gap, -6.0, 6.0, tol, iterations);
  return 0.5 * (lo + hi);
}

}  // namespace fate::mc
