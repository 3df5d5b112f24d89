// One line per acceptance criterion; exit status is nonzero if any fails.

#include "fate/cli.hpp"
#include "fate/dgp.hpp"
#include "fate/errors.hpp"
#include "fate/fate.hpp"
#include "fate/iv.hpp"
#include "fate/mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

using namespace fate;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_gap(const Matrix& a, const Matrix& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / b.lpNorm<Eigen::Infinity>();
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

const mc::EstimatorSummary& by_label(const mc::McReport& r, const std::string& label) {
  for (const auto& e : r.estimators) {
    if (e.label == label) return e;
  }
  throw Error(ErrorKind::InvalidConfig, "no estimator " + label);
}

dgp::ContinuousDgpConfig textbook_generator(long n) {
  auto g = std::get<dgp::ContinuousDgpConfig>(mc::textbook_scenario().generator);
  g.n = n;
  return g;
}

// 1. FATE(L=1) = pooled IV-GMM, FATE(L=K) = Pi with zero J, at n = 1e4, K = 3, J = 5.
Verdict nesting() {
  const auto t0 = Clock::now();
  double gap1 = 0.0, gapk = 0.0, jk = 0.0;
  bool converged = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto data = dgp::simulate_continuous(textbook_generator(10000), {seed, 0}).dataset;
    FateSpec one;
    one.L = 1;
    const auto f1 = fate_fit(data, one);
    const auto g = iv::iv_gmm(data);
    FateSpec all;
    all.L = 3;
    const auto fk = fate_fit(data, all);
    const auto pi = iv::pi_matrix(data);
    converged = converged && f1.converged && fk.converged && g.converged;
    gap1 = std::max(gap1, rel_gap(f1.lambda.row(0).transpose(), g.lambda));
    gapk = std::max(gapk, rel_gap(fk.lambda, pi.estimates));
    jk = std::max(jk, fk.j_stat);
  }
  const double secs = seconds_since(t0) / 3.0;
  return {converged && gap1 < 1e-6 && gapk < 1e-6 && jk < 1e-8 && secs < 10.0,
          fmt("L=1 vs IV-GMM rel gap %.2e, L=K vs Pi rel gap %.2e, L=K J %.2e, %.2f s per dataset", gap1, gapk,
              jk, secs)};
}

// 2. df = moments - parameters for K <= 6, J <= 8, L <= K, counted on built moment systems.
Verdict counting() {
  const auto t0 = Clock::now();
  long cases = 0, bad = 0;
  Rng rng({2, 0});
  for (long k = 1; k <= 6; ++k) {
    for (long j = 1; j <= 8; ++j) {
      Dataset d;
      d.z = Matrix::NullaryExpr(20, k, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
      d.x = Matrix::Ones(20, 1);
      d.d = Vector::NullaryExpr(20, [&](Eigen::Index) { return rng.normal(); });
      d.y = Matrix::NullaryExpr(20, j, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
      ensure_names(d);
      for (long l = 1; l <= k; ++l) {
        const MomentSystem system(d, l);
        const long counted = system.moment_count() - system.layout().size();
        const auto rep = check_identification(k, j, l);
        ++cases;
        if (counted != (k - l) * (j + 1 - l) || rep.j_df != counted) ++bad;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 1.0, fmt("%ld (K, J, L) cases, %ld mismatches, %.3f s", cases, bad, secs)};
}

// 3. Textbook recovery: bias and coverage of lambda, 200 reps at n = 2e4.
Verdict recovery(const mc::McReport& r, double secs) {
  const auto& fate = by_label(r, "fate_L2");
  double worst = -1e300, cov_min = 1.0, cov_max = 0.0, cov_sum = 0.0;
  long count = 0;
  for (const auto& p : fate.parameters) {
    if (p.name.rfind("lambda", 0) != 0) continue;
    const double allowed = 0.02 * std::abs(*p.truth_mean) + 0.01;
    worst = std::max(worst, std::abs(*p.bias) - allowed);
    cov_min = std::min(cov_min, *p.coverage);
    cov_max = std::max(cov_max, *p.coverage);
    cov_sum += *p.coverage;
    ++count;
  }
  const double pooled = cov_sum / static_cast<double>(count);
  const bool pass = count == 10 && worst < 0.0 && pooled >= 0.91 && pooled <= 0.98 && fate.failures == 0 &&
                    secs < 600.0;
  return {pass, fmt("%ld lambda entries, max |bias| - allowance %.4f, pooled coverage %.3f (entries %.3f-%.3f), "
                    "%ld failures, %.1f s",
                    count, worst, pooled, cov_min, cov_max, fate.failures, secs)};
}

// 4. Zero estimand: the mean reduced form is within 3 MC SE of 0 while every component effect is positive.
Verdict zero_estimand() {
  const auto s = mc::find_scenario("zero_estimand");
  const auto r = mc::run_scenario(s, 42, {threads(), false});
  const auto& rf = by_label(r, "reduced_form");
  const auto& p = rf.parameters.front();
  const double ratio = p.mean / p.mc_se;
  // oracle on one replication panel: population mean effects per component
  auto cfg = std::get<dgp::DiscreteDgpConfig>(s.generator);
  cfg.n = s.n;
  const auto panel = *dgp::simulate_discrete(cfg, {42, 0}).latent;
  const auto o = dgp::oracle_iv_decomposition(panel, s.point, s.point_prime);
  double min_effect = 1e300;
  for (const auto& c : o.components) min_effect = std::min(min_effect, c.population_mean_effect.minCoeff());
  const bool pass = r.reps == 200 && std::abs(ratio) <= 3.0 && min_effect > 0.0 && r.true_lambda.minCoeff() > 0.0;
  return {pass, fmt("mean reduced form %.5f, MC SE %.5f (%.2f SE), oracle min component effect %.3f", p.mean,
                    p.mc_se, ratio, min_effect)};
}

// 5. J-test size under the true L and power against a misspecified L.
Verdict j_test() {
  auto size_s = mc::textbook_scenario(20000, 500);
  mc::EstimatorSpec fate;
  fate.kind = mc::EstimatorKind::Fate;
  fate.L = 2;
  size_s.estimators = {fate};
  const auto size_r = mc::run_scenario(size_s, 7, {threads(), false});
  const double size = *by_label(size_r, "fate_L2").j_rejection_rate;

  auto power_s = mc::find_scenario("misspecified_L");
  power_s.reps = 500;
  power_s.n = 20000;
  const auto power_r = mc::run_scenario(power_s, 7, {threads(), false});
  const double power = *by_label(power_r, "fate_L2").j_rejection_rate;
  return {size >= 0.02 && size <= 0.09 && power > 0.8,
          fmt("size %.3f at 5%% (500 reps), power %.3f against L=2 when L=3 (500 reps)", size, power)};
}

// 6. Sample IV within 4 SE of the oracle weighted estimand; n = 50 decomposition identity.
Verdict oracle_equivalence() {
  long checked = 0, outside = 0, panels = 0, conditions = 0;
  for (const auto& s : {mc::theorem1_scenario(), mc::theorem2_scenario()}) {
    const auto r = mc::run_scenario(s, 42, {threads(), false});
    for (const auto& rec : r.records) {
      if (r.estimators[rec.estimator].label != "just_identified" || !rec.truth) continue;
      ++checked;
      if (!(std::abs(rec.estimate - *rec.truth) <= 4.0 * rec.se)) ++outside;
    }
    panels += r.conditions->panels;
    conditions += s.name == "theorem1" ? r.conditions->utr_holds : r.conditions->uum_holds;
  }

  dgp::DiscreteDgpConfig c = std::get<dgp::DiscreteDgpConfig>(mc::theorem2_scenario().generator);
  c.n = 50;
  c.effect_sd = 1.0;
  const auto panel = *dgp::simulate_discrete(c, {5, 0}).latent;
  double worst = 0.0;
  for (long a = 0; a < panel.num_points(); ++a) {
    for (long b = 0; b < panel.num_points(); ++b) {
      if (a == b) continue;
      const auto o = dgp::oracle_iv_decomposition(panel, a, b);
      for (long j = 0; j < panel.num_outcomes(); ++j) {
        double direct = 0.0;
        for (long i = 0; i < panel.n(); ++i) {
          direct += panel.potential[static_cast<std::size_t>(panel.choice(i, a))](i, j) -
                    panel.potential[static_cast<std::size_t>(panel.choice(i, b))](i, j);
        }
        direct /= static_cast<double>(panel.n());
        double terms = 0.0;
        for (const auto& comp : o.components) terms += comp.complier_term(j) - comp.defier_term(j);
        worst = std::max({worst, std::abs(terms - direct), std::abs(o.reduced_form(j) - direct)});
      }
    }
  }
  const bool pass = checked >= 100 && outside == 0 && conditions == panels && worst <= 1e-12;
  return {pass, fmt("%ld/%ld IV estimates within 4 SE of the oracle target, condition held on %ld/%ld panels, "
                    "n=50 identity error %.1e",
                    checked - outside, checked, conditions, panels, worst)};
}

// 7. Three-step recovers exact structures and agrees with GMM on large samples.
Verdict three_step() {
  Rng rng({7, 0});
  double exact = 0.0;
  for (int t = 0; t < 200; ++t) {
    Matrix theta(3, 2);
    const double w = 3.0 * rng.normal();
    theta << 1, 0, 0, 1, w, 1.0 - w;
    Matrix lambda = Matrix::NullaryExpr(2, 5, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
    lambda(0, 0) = lambda(1, 0) + 0.5 + rng.uniform();
    const auto r = three_step_fit(Matrix(theta * lambda), 0);
    exact = std::max({exact, (r.lambda - lambda).cwiseAbs().maxCoeff(), std::abs(r.theta31 - w)});
  }
  const auto data = dgp::simulate_continuous(textbook_generator(200000), {3, 0}).dataset;
  FateSpec spec;
  spec.L = 2;
  const auto est = fate_fit(data, spec);
  const auto ts = three_step_fit(iv::pi_matrix(data), spec, 0);
  double worst = std::abs(ts.theta31 - est.theta(2, 0)) / est.theta_se(2, 0);
  for (long l = 0; l < 2; ++l) {
    for (long j = 0; j < est.lambda.cols(); ++j) {
      worst = std::max(worst, std::abs(ts.lambda(l, j) - est.lambda(l, j)) / est.lambda_se(l, j));
    }
  }
  return {exact <= 1e-10 && worst <= 3.0,
          fmt("noiseless recovery error %.1e over 200 structures, n=2e5 max |three-step - GMM| = %.2f SE", exact,
              worst)};
}

// 8. Row sums on 1000 randomized fits, finite-difference Jacobians, the (-2.5, 3.5) row.
Verdict constraints() {
  Rng rng({8, 0});
  long fits = 0, bad_rows = 0, errors = 0;
  double worst_fd = 0.0, worst_sum = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const long k = 2 + static_cast<long>(rng.uniform() * 4.0);
    const long l = 1 + static_cast<long>(rng.uniform() * static_cast<double>(k));
    const long j = std::max<long>(l, 1) + static_cast<long>(rng.uniform() * 3.0);
    const long n = 400;
    Matrix theta(k, l);
    theta.topRows(l).setIdentity();
    for (long row = l; row < k; ++row) {
      for (long c = 0; c < l; ++c) theta(row, c) = rng.normal();
      theta(row, l - 1) += 1.0 - theta.row(row).sum();
    }
    const Matrix lambda = Matrix::NullaryExpr(l, j, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
    const Vector gamma = Vector::NullaryExpr(k, [&](Eigen::Index) { return 0.5 + rng.uniform(); });
    Dataset d;
    d.z = Matrix::NullaryExpr(n, k, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
    d.x = Matrix::Ones(n, 1);
    const Vector u = Vector::NullaryExpr(n, [&](Eigen::Index) { return rng.normal(); });
    d.d = d.z * gamma + u;
    d.y = d.z * (gamma.asDiagonal() * theta * lambda);
    for (long c = 0; c < j; ++c) {
      for (long i = 0; i < n; ++i) d.y(i, c) += 0.5 * u(i) + rng.normal();
    }
    ensure_names(d);
    FateSpec spec;
    spec.L = static_cast<int>(l);
    FateEstimate est;
    try {
      est = fate_fit(d, spec);
    } catch (const Error&) {
      ++errors;
      continue;
    }
    ++fits;
    for (long row = 0; row < k; ++row) worst_sum = std::max(worst_sum, std::abs(est.theta.row(row).sum() - 1.0));
    if (!rows_sum_to_one(est.theta, 1e-8)) ++bad_rows;

    // finite differences at the estimate
    const MomentSystem system(d, l);
    const auto& lay = system.layout();
    FateParameters q{est.beta, est.lambda, est.theta.bottomRows(k - l).leftCols(l - 1), est.gamma, est.gamma_x};
    const Vector p = lay.pack(q);
    const Matrix jac = system.jacobian(q);
    const double h = 1e-6;
    Matrix fd(jac.rows(), jac.cols());
    for (long c = 0; c < lay.size(); ++c) {
      Vector up = p, down = p;
      up(c) += h;
      down(c) -= h;
      fd.col(c) = (system.gbar(lay.unpack(up)) - system.gbar(lay.unpack(down))) / (2.0 * h);
    }
    worst_fd = std::max(worst_fd, (jac - fd).cwiseAbs().maxCoeff() / (1.0 + jac.cwiseAbs().maxCoeff()));
  }
  Matrix paper_row(1, 2);
  paper_row << -2.5, 3.5;
  const bool paper = rows_sum_to_one(paper_row);
  return {fits == 1000 && bad_rows == 0 && worst_fd <= 1e-5 && paper,
          fmt("%ld fits (%ld errors), max |row sum - 1| %.1e, max FD Jacobian error %.1e, (-2.5, 3.5) %s", fits,
              errors, worst_sum, worst_fd, paper ? "accepted" : "rejected")};
}

// 9. montecarlo JSON is byte-identical at parallelism 1 and 8.
Verdict determinism() {
  auto run = [](const char* threads) {
    std::ostringstream out, err;
    const int code = cli::dispatch({"montecarlo", "--scenario", "textbook", "--reps", "24", "--n", "5000", "--seed",
                                    "2024", "--threads", threads, "--json", "-"},
                                   out, err);
    return std::make_pair(code, out.str());
  };
  const auto one = run("1");
  const auto eight = run("8");
  return {one.first == 0 && eight.first == 0 && one.second == eight.second && !one.second.empty(),
          fmt("%zu-byte reports %s", one.second.size(), one.second == eight.second ? "identical" : "differ")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("[%s] criterion %d: %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "nesting identities", nesting);
  report(2, "identification counting", counting);
  report(3, "parameter recovery", [] {
    const auto t0 = Clock::now();
    const auto r = mc::run_scenario(mc::textbook_scenario(20000, 200), 42, {threads(), false});
    return recovery(r, seconds_since(t0));
  });
  report(4, "zero-estimand pathology", zero_estimand);
  report(5, "J-test size and power", j_test);
  report(6, "oracle equivalence", oracle_equivalence);
  report(7, "three-step equivalence", three_step);
  report(8, "constraint suite", constraints);
  report(9, "determinism", determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
