#include "fate/dgp.hpp"

#include "fate/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fate::dgp {

namespace {

[[noreturn]] void invalid(const std::string& reason) {
  throw Error(ErrorKind::InvalidConfig, reason);
}

void require_shape(const Matrix& m, long rows, long cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    invalid(std::string(what) + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
            ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) invalid(std::string(what) + " has non-finite entries");
}

Matrix positive_definite_factor(const Matrix& cov, const char* what) {
  if (!cov.isApprox(cov.transpose(), 1e-12)) invalid(std::string(what) + " must be symmetric");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) invalid(std::string(what) + " must be positive definite");
  return llt.matrixL();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

long LatentPanel::point_index(const Vector& z) const {
  for (std::size_t g = 0; g < support.size(); ++g) {
    if (support[g].size() == z.size() && (support[g] - z).cwiseAbs().maxCoeff() <= 1e-12) {
      return static_cast<long>(g);
    }
  }
  throw Error(ErrorKind::UnknownGridPoint, "instrument value is not on the support grid");
}

void validate(const ContinuousDgpConfig& c) {
  const long k = c.gamma.rows();
  const long l = c.gamma.cols();
  const long j = c.lambda.cols();
  const long r = c.gamma_x.rows();
  if (c.n < 1) invalid("n must be positive");
  if (k < 1 || l < 1) invalid("gamma must be at least 1x1");
  if (j < 1) invalid("lambda must have at least one outcome column");
  if (r < 1) invalid("at least the intercept control is required");
  require_shape(c.gamma, k, l, "gamma");
  require_shape(c.gamma_x, r, l, "gamma_x");
  require_shape(c.alpha, r, j, "alpha");
  require_shape(c.lambda, l, j, "lambda");
  require_shape(c.component_error_corr, l, l, "component_error_corr");
  if (c.u_scales.size() != l || !c.u_scales.allFinite() || (c.u_scales.array() < 0).any()) {
    invalid("u_scales must hold L nonnegative values");
  }
  if (!std::isfinite(c.xi_scale) || c.xi_scale < 0) invalid("xi_scale must be nonnegative");
  if (static_cast<long>(c.instruments.size()) != k) invalid("one instrument distribution per instrument");
  for (const auto& inst : c.instruments) {
    if (inst.kind == InstrumentDistribution::Kind::Bernoulli && !(inst.p > 0.0 && inst.p < 1.0)) {
      invalid("Bernoulli instrument probability must lie in (0, 1)");
    }
  }
  positive_definite_factor(c.component_error_corr, "component_error_corr");
}

void validate(const DiscreteDgpConfig& c) {
  const long l = c.mu_intercept.size();
  const long kz = c.mu_slope.cols();
  if (c.n < 1) invalid("n must be positive");
  if (l < 1) invalid("at least one component is required");
  if (kz < 1) invalid("instrument dimension must be positive");
  require_shape(c.mu_slope, l, kz, "mu_slope");
  require_shape(c.taste_cov, l, l, "taste_cov");
  if (c.taste_mean.size() != l) invalid("taste_mean must have L entries");
  if (c.lambda.rows() != l || c.lambda.cols() < 1) invalid("lambda must be L x J");
  require_shape(c.lambda, l, c.lambda.cols(), "lambda");
  if (c.baseline_mean.size() != c.lambda.cols()) invalid("baseline_mean must have J entries");
  if (c.effect_sd < 0 || c.baseline_sd < 0) invalid("standard deviations must be nonnegative");
  if (c.support.empty() || c.support.size() != c.support_probabilities.size()) {
    invalid("support and support_probabilities must be nonempty and aligned");
  }
  double total = 0.0;
  for (std::size_t g = 0; g < c.support.size(); ++g) {
    if (c.support[g].size() != kz) invalid("support points must have the instrument dimension");
    if (!(c.support_probabilities[g] >= 0.0)) invalid("support probabilities must be nonnegative");
    total += c.support_probabilities[g];
  }
  if (std::abs(total - 1.0) > 1e-12) invalid("support probabilities must sum to 1");
  positive_definite_factor(c.taste_cov, "taste_cov");
}

Truth truth_of(const ContinuousDgpConfig& c) {
  Truth t;
  t.lambda = c.lambda;
  t.gamma = c.gamma.rowwise().sum();
  t.gamma_x = c.gamma_x.rowwise().sum();
  t.beta = c.alpha + c.gamma_x * c.lambda;
  t.theta = Matrix::Zero(c.gamma.rows(), c.gamma.cols());
  for (long k = 0; k < c.gamma.rows(); ++k) {
    if (t.gamma(k) != 0.0) t.theta.row(k) = c.gamma.row(k) / t.gamma(k);
  }
  return t;
}

NormalizedTruth normalize(const Truth& truth, const std::vector<int>& defining) {
  const long l = truth.lambda.rows();
  if (static_cast<long>(defining.size()) != l) {
    invalid("normalization needs exactly L defining instruments");
  }
  const auto order = defining_first_order(truth.theta.rows(), defining);
  Matrix reordered(truth.theta.rows(), l);
  for (std::size_t i = 0; i < order.size(); ++i) {
    reordered.row(static_cast<long>(i)) = truth.theta.row(order[i]);
  }
  const Matrix block = reordered.topRows(l);
  Eigen::FullPivLU<Matrix> lu(block);
  if (!lu.isInvertible()) invalid("defining rows of theta are singular");
  NormalizedTruth out;
  out.theta = reordered * lu.inverse();
  out.theta.topRows(l).setIdentity();
  out.lambda = block * truth.lambda;
  return out;
}

SyntheticData simulate_continuous(const ContinuousDgpConfig& c, RngSeed seed) {
  validate(c);
  const long n = c.n;
  const long k = c.num_instruments();
  const long l = c.num_components();
  const long j = c.num_outcomes();
  const long r = c.num_controls();
  Rng rng(seed);

  Matrix x(n, r);
  x.col(0).setOnes();
  for (long col = 1; col < r; ++col) {
    for (long i = 0; i < n; ++i) x(i, col) = rng.normal();
  }
  Matrix z(n, k);
  for (long col = 0; col < k; ++col) {
    const auto& dist = c.instruments[static_cast<std::size_t>(col)];
    for (long i = 0; i < n; ++i) {
      z(i, col) = dist.kind == InstrumentDistribution::Kind::Normal
                      ? rng.normal()
                      : (rng.bernoulli(dist.p) ? 1.0 : 0.0);
    }
  }
  const Matrix scales = c.u_scales.asDiagonal();
  const Matrix cov = scales * c.component_error_corr * scales;
  Matrix u;
  if (c.u_scales.isZero(0.0)) {
    u = Matrix::Zero(n, l);
  } else {
    Eigen::LDLT<Matrix> ldlt(cov);
    Matrix root = ldlt.transpositionsP().transpose() * Matrix(ldlt.matrixL()) *
                  ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    u = rng.multivariate_normal(n, root);
  }
  Matrix f = x * c.gamma_x + z * c.gamma + u;
  Matrix xi(n, j);
  for (long col = 0; col < j; ++col) {
    for (long i = 0; i < n; ++i) xi(i, col) = c.xi_scale * rng.normal();
  }

  SyntheticData out;
  out.dataset.x = std::move(x);
  out.dataset.z = std::move(z);
  out.dataset.d = f.rowwise().sum();
  out.dataset.y = out.dataset.x * c.alpha + f * c.lambda + xi;
  ensure_names(out.dataset);
  out.components = std::move(f);
  out.truth = truth_of(c);
  return out;
}

int choose(const Eigen::Ref<const Vector>& shifted_tastes) {
  long best = 0;
  for (long l = 1; l < shifted_tastes.size(); ++l) {
    if (shifted_tastes(l) > shifted_tastes(best)) best = l;
  }
  return shifted_tastes(best) >= 0.0 ? static_cast<int>(best + 1) : 0;
}

SyntheticData simulate_discrete(const DiscreteDgpConfig& c, RngSeed seed) {
  validate(c);
  const long n = c.n;
  const long l = c.num_components();
  const long j = c.num_outcomes();
  const long g_count = static_cast<long>(c.support.size());
  const Matrix taste_root = positive_definite_factor(c.taste_cov, "taste_cov");
  Rng rng(seed);

  std::vector<Vector> shifts;
  for (const auto& z : c.support) shifts.push_back(c.utility_shift(z));

  LatentPanel panel;
  panel.support = c.support;
  panel.support_probabilities = c.support_probabilities;
  panel.choice.resize(n, g_count);
  panel.potential.assign(static_cast<std::size_t>(l + 1), Matrix(n, j));
  panel.observed_point.resize(static_cast<std::size_t>(n));

  Vector noise(l);
  for (long i = 0; i < n; ++i) {
    for (long d = 0; d < l; ++d) noise(d) = rng.normal();
    const Vector tastes = c.taste_mean + taste_root * noise;
    for (long col = 0; col < j; ++col) {
      panel.potential[0](i, col) = c.baseline_mean(col) + c.baseline_sd * rng.normal();
    }
    for (long comp = 0; comp < l; ++comp) {
      for (long col = 0; col < j; ++col) {
        const double effect = c.lambda(comp, col) + c.effect_sd * rng.normal();
        panel.potential[static_cast<std::size_t>(comp + 1)](i, col) = panel.potential[0](i, col) + effect;
      }
    }
    panel.observed_point[static_cast<std::size_t>(i)] =
        static_cast<int>(rng.categorical(c.support_probabilities));
    for (long g = 0; g < g_count; ++g) {
      panel.choice(i, g) = choose(tastes + shifts[static_cast<std::size_t>(g)]);
    }
  }

  Dataset data;
  data.y.resize(n, j);
  data.d.resize(n);
  data.z.resize(n, c.instrument_dim());
  data.x = Matrix::Ones(n, 1);
  for (long i = 0; i < n; ++i) {
    const int g = panel.observed_point[static_cast<std::size_t>(i)];
    const int chosen = panel.choice(i, g);
    data.y.row(i) = panel.potential[static_cast<std::size_t>(chosen)].row(i);
    data.d(i) = chosen > 0 ? 1.0 : 0.0;
    data.z.row(i) = c.support[static_cast<std::size_t>(g)].transpose();
  }
  ensure_names(data);

  SyntheticData out;
  out.truth.lambda = c.lambda;
  if (c.instrument_dim() == 1 && g_count == 2) {
    const auto profile = complier_defier_profile(panel, 1, 0);
    const double first_stage = profile.p_z - profile.p_z_prime;
    if (first_stage != 0.0) {
      out.truth.theta.resize(1, l);
      for (long comp = 0; comp < l; ++comp) {
        const auto& s = profile.components[static_cast<std::size_t>(comp)];
        out.truth.theta(0, comp) = (s.share_z - s.share_z_prime) / first_stage;
      }
    }
  }
  out.dataset = std::move(data);
  out.latent = std::move(panel);
  return out;
}

namespace {

void require_point(const LatentPanel& latent, long g) {
  if (g < 0 || g >= latent.num_points()) {
    throw Error(ErrorKind::UnknownGridPoint, "grid index " + std::to_string(g) + " out of range");
  }
}

}  // namespace

ComplierProfile complier_defier_profile(const LatentPanel& latent, long point, long point_prime) {
  require_point(latent, point);
  require_point(latent, point_prime);
  const long n = latent.n();
  const long l = latent.num_components();
  std::vector<long> complier(static_cast<std::size_t>(l), 0), defier(complier), always(complier),
      never(complier), at_z(complier), at_z_prime(complier);
  long treated_z = 0;
  long treated_z_prime = 0;
  for (long i = 0; i < n; ++i) {
    const int c = latent.choice(i, point);
    const int cp = latent.choice(i, point_prime);
    treated_z += c > 0;
    treated_z_prime += cp > 0;
    for (long comp = 1; comp <= l; ++comp) {
      const auto s = static_cast<std::size_t>(comp - 1);
      const bool a = c == comp;
      const bool b = cp == comp;
      at_z[s] += a;
      at_z_prime[s] += b;
      if (a && !b) ++complier[s];
      else if (!a && b) ++defier[s];
      else if (a && b) ++always[s];
      else ++never[s];
    }
  }
  const double dn = static_cast<double>(n);
  ComplierProfile out;
  out.point = point;
  out.point_prime = point_prime;
  out.p_z = treated_z / dn;
  out.p_z_prime = treated_z_prime / dn;
  for (std::size_t s = 0; s < static_cast<std::size_t>(l); ++s) {
    out.components.push_back({complier[s] / dn, defier[s] / dn, always[s] / dn, never[s] / dn,
                              at_z[s] / dn, at_z_prime[s] / dn});
  }
  return out;
}

ComplierProfile complier_defier_profile(const LatentPanel& latent, const Vector& z,
                                        const Vector& z_prime) {
  return complier_defier_profile(latent, latent.point_index(z), latent.point_index(z_prime));
}

const Vector& OracleDecomposition::iv() const {
  if (!iv_estimand) {
    throw Error(ErrorKind::DegenerateComparison, "P(z) = P(z'): IV estimand undefined");
  }
  return *iv_estimand;
}

OracleDecomposition oracle_iv_decomposition(const LatentPanel& latent, long point, long point_prime) {
  require_point(latent, point);
  require_point(latent, point_prime);
  const long n = latent.n();
  const long l = latent.num_components();
  const long j = latent.num_outcomes();
  const auto ls = static_cast<std::size_t>(l);

  Vector rf_sum = Vector::Zero(j);
  long fs_count = 0;
  std::vector<long> n_c(ls, 0), n_f(ls, 0), n_up(ls, 0), n_down(ls, 0);
  std::vector<Vector> sum_c(ls, Vector::Zero(j)), sum_f(sum_c), sum_pop(sum_c);
  std::vector<long> share_z(ls, 0), share_zp(ls, 0);
  for (long i = 0; i < n; ++i) {
    const int c = latent.choice(i, point);
    const int cp = latent.choice(i, point_prime);
    fs_count += (c > 0) - (cp > 0);
    for (long col = 0; col < j; ++col) {
      rf_sum(col) += latent.potential[static_cast<std::size_t>(c)](i, col) -
                     latent.potential[static_cast<std::size_t>(cp)](i, col);
    }
    for (long comp = 1; comp <= l; ++comp) {
      const auto s = static_cast<std::size_t>(comp - 1);
      for (long col = 0; col < j; ++col) sum_pop[s](col) += latent.effect(i, comp, col);
      share_z[s] += c == comp;
      share_zp[s] += cp == comp;
      if (c == comp && cp != comp) {
        ++n_c[s];
        for (long col = 0; col < j; ++col) sum_c[s](col) += latent.effect(i, comp, col);
      } else if (c != comp && cp == comp) {
        ++n_f[s];
        for (long col = 0; col < j; ++col) sum_f[s](col) += latent.effect(i, comp, col);
      }
    }
  }

  const double dn = static_cast<double>(n);
  OracleDecomposition out;
  out.point = point;
  out.point_prime = point_prime;
  out.reduced_form = rf_sum / dn;
  out.first_stage = fs_count / dn;

  bool any_up = false;
  bool any_down = false;
  bool any_complier = false;
  bool any_defier = false;
  for (std::size_t s = 0; s < ls; ++s) {
    ComponentTerms t;
    t.complier_share = n_c[s] / dn;
    t.defier_share = n_f[s] / dn;
    t.complier_mean_effect = n_c[s] > 0 ? Vector(sum_c[s] / n_c[s]) : Vector::Zero(j);
    t.defier_mean_effect = n_f[s] > 0 ? Vector(sum_f[s] / n_f[s]) : Vector::Zero(j);
    const long switchers = n_c[s] + n_f[s];
    t.switcher_mean_effect = switchers > 0 ? Vector((sum_c[s] + sum_f[s]) / switchers) : Vector::Zero(j);
    t.population_mean_effect = sum_pop[s] / dn;
    t.complier_term = sum_c[s] / dn;
    t.defier_term = sum_f[s] / dn;
    out.components.push_back(std::move(t));
    const long delta = share_z[s] - share_zp[s];
    any_up |= delta > 0;
    any_down |= delta < 0;
    any_complier |= n_c[s] > 0;
    any_defier |= n_f[s] > 0;
  }
  out.utr_holds = !(any_up && any_down);
  out.uum_holds = !(any_complier && any_defier);

  if (fs_count != 0) {
    out.iv_estimand = out.reduced_form / out.first_stage;
    out.weights.resize(l);
    for (std::size_t s = 0; s < ls; ++s) {
      out.weights(static_cast<long>(s)) = static_cast<double>(share_z[s] - share_zp[s]) / fs_count;
    }
    if (out.utr_holds) {
      Vector avg = Vector::Zero(j);
      for (std::size_t s = 0; s < ls; ++s) {
        avg += out.weights(static_cast<long>(s)) * out.components[s].population_mean_effect;
      }
      out.weighted_average_effect = avg;
    }
    if (out.uum_holds) {
      Vector late = Vector::Zero(j);
      for (std::size_t s = 0; s < ls; ++s) {
        late += out.weights(static_cast<long>(s)) * out.components[s].switcher_mean_effect;
      }
      out.component_weighted_late = late;
    }
    const double orientation = fs_count > 0 ? 1.0 : -1.0;
    Vector net(l);
    for (std::size_t s = 0; s < ls; ++s) {
      net(static_cast<long>(s)) = orientation * static_cast<double>(n_c[s] - n_f[s]) / dn;
    }
    if ((net.array() >= 0.0).all() && net.sum() > 0.0) {
      Matrix effects = Matrix::Zero(l, j);
      for (std::size_t s = 0; s < ls; ++s) {
        const long diff = n_c[s] - n_f[s];
        if (diff != 0) effects.row(static_cast<long>(s)) = ((sum_c[s] - sum_f[s]) / diff).transpose();
      }
      out.survivor_shares = net;
      out.survivor_weights = net / net.sum();
      out.survivor_effects = effects;
    }
  }
  return out;
}

ConditionReport check_condition(const LatentPanel& latent, Condition which,
                                const std::vector<long>& points) {
  std::vector<long> grid = points;
  if (grid.empty()) {
    for (long g = 0; g < latent.num_points(); ++g) grid.push_back(g);
  }
  for (long g : grid) require_point(latent, g);
  const long n = latent.n();
  const long l = latent.num_components();

  ConditionReport report;
  report.condition = which;
  auto add = [&report](Witness w) {
    report.holds = false;
    if (report.witnesses.size() < kMaxWitnesses) report.witnesses.push_back(w);
  };

  // per-point component counts and treated counts
  std::vector<std::vector<long>> counts(grid.size(), std::vector<long>(static_cast<std::size_t>(l + 1), 0));
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (long i = 0; i < n; ++i) ++counts[gi][static_cast<std::size_t>(latent.choice(i, grid[gi]))];
  }

  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      const long treated_delta = (n - counts[a][0]) - (n - counts[b][0]);
      if (which == Condition::UniformTreatmentResponses) {
        std::vector<long> delta;
        for (long comp = 1; comp <= l; ++comp) {
          delta.push_back(counts[a][static_cast<std::size_t>(comp)] - counts[b][static_cast<std::size_t>(comp)]);
        }
        const bool up = std::any_of(delta.begin(), delta.end(), [](long v) { return v > 0; });
        const bool down = std::any_of(delta.begin(), delta.end(), [](long v) { return v < 0; });
        if (up && down) {
          long direction = treated_delta != 0 ? treated_delta : *std::find_if(delta.begin(), delta.end(), [](long v) { return v != 0; });
          for (long comp = 1; comp <= l; ++comp) {
            const long d = delta[static_cast<std::size_t>(comp - 1)];
            if ((direction > 0 && d < 0) || (direction < 0 && d > 0)) add({-1, comp, grid[a], grid[b]});
          }
        }
      } else {
        long ups = 0;
        long downs = 0;
        for (long i = 0; i < n; ++i) {
          const int c = latent.choice(i, grid[a]);
          const int cp = latent.choice(i, grid[b]);
          if (c != cp) {
            // component c gains individual i, component cp loses it
            ups += c > 0;
            downs += cp > 0;
          }
        }
        if (ups > 0 && downs > 0) {
          const bool majority_up = treated_delta != 0 ? treated_delta > 0 : ups >= downs;
          for (long i = 0; i < n && report.witnesses.size() < kMaxWitnesses; ++i) {
            const int c = latent.choice(i, grid[a]);
            const int cp = latent.choice(i, grid[b]);
            if (c == cp) continue;
            if (majority_up && cp > 0) add({i, cp, grid[a], grid[b]});
            if (!majority_up && c > 0) add({i, c, grid[a], grid[b]});
          }
          report.holds = false;
        }
      }
    }
  }
  return report;
}

NetMonotonicityEvidence net_monotonicity_evidence(const LatentPanel& latent, long point,
                                                  long point_prime) {
  const auto oracle = oracle_iv_decomposition(latent, point, point_prime);
  const long l = latent.num_components();
  const bool forward = oracle.first_stage >= 0.0;
  NetMonotonicityEvidence out;
  for (long comp = 1; comp <= l; ++comp) {
    const auto& t = oracle.components[static_cast<std::size_t>(comp - 1)];
    const double compliers = forward ? t.complier_share : t.defier_share;
    const double defiers = forward ? t.defier_share : t.complier_share;
    const bool cover = compliers >= defiers;
    bool in_range = true;
    if (defiers > 0.0) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      double defier_sum = 0.0;
      long defier_count = 0;
      for (long i = 0; i < latent.n(); ++i) {
        const bool at_z = latent.choice(i, point) == comp;
        const bool at_zp = latent.choice(i, point_prime) == comp;
        const bool is_complier = forward ? (at_z && !at_zp) : (!at_z && at_zp);
        const bool is_defier = forward ? (!at_z && at_zp) : (at_z && !at_zp);
        const double e = latent.effect(i, comp, 0);
        if (is_complier) {
          lo = std::min(lo, e);
          hi = std::max(hi, e);
        } else if (is_defier) {
          defier_sum += e;
          ++defier_count;
        }
      }
      const double defier_mean = defier_sum / static_cast<double>(defier_count);
      in_range = defier_mean >= lo && defier_mean <= hi;
    }
    out.compliers_cover_defiers.push_back(cover);
    out.defier_effects_in_complier_range.push_back(in_range);
    out.necessary_conditions_hold = out.necessary_conditions_hold && cover && in_range;
  }
  return out;
}

Vector population_shares(const DiscreteDgpConfig& c, const Vector& z) {
  if (c.num_components() != 2) invalid("population_shares supports exactly two components");
  positive_definite_factor(c.taste_cov, "taste_cov");
  const Vector mean = c.taste_mean + c.utility_shift(z);
  const double s1 = std::sqrt(c.taste_cov(0, 0));
  const double s2 = std::sqrt(c.taste_cov(1, 1));
  const double rho = c.taste_cov(0, 1) / (s1 * s2);
  const double cond_sd = s2 * std::sqrt(1.0 - rho * rho);
  auto density1 = [&](double v1) {
    const double t = (v1 - mean(0)) / s1;
    return std::exp(-0.5 * t * t) / (s1 * std::sqrt(2.0 * std::numbers::pi));
  };
  auto cond_mean = [&](double v1) { return mean(1) + rho * s2 / s1 * (v1 - mean(0)); };

  using Integrator = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double inf = std::numeric_limits<double>::infinity();
  // untreated: V1 < 0 and V2 < 0
  const double p0 = Integrator::integrate(
      [&](double v1) { return density1(v1) * normal_cdf((0.0 - cond_mean(v1)) / cond_sd); }, -inf, 0.0,
      15, 1e-14);
  // component 1: V1 >= 0 and V2 <= V1
  const double p1 = Integrator::integrate(
      [&](double v1) { return density1(v1) * normal_cdf((v1 - cond_mean(v1)) / cond_sd); }, 0.0, inf,
      15, 1e-14);
  Vector out(3);
  out << p0, p1, 1.0 - p0 - p1;
  return out;
}

}  // namespace fate::dgp
