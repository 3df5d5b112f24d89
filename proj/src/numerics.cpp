#include "fate/numerics.hpp"

#include "fate/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace fate {

void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw Error(ErrorKind::InvalidData, std::string(what) + ": matrix must be at least 1x1");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidData, std::string(what) + ": non-finite entry");
  }
}

LeastSquares::LeastSquares(const Eigen::Ref<const Matrix>& design) : design_(design) {
  if (design_.rows() < design_.cols()) {
    throw RankDeficientError(design_.rows(), design_.cols());
  }
  qr_.setThreshold(kRankTolerance);
  qr_.compute(design_);
  if (qr_.rank() < design_.cols()) {
    throw RankDeficientError(qr_.rank(), design_.cols());
  }
}

Matrix LeastSquares::solve(const Eigen::Ref<const Matrix>& rhs) const {
  if (rhs.rows() != design_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "least squares: row count mismatch");
  }
  return qr_.solve(rhs);
}

Matrix LeastSquares::residualize(const Eigen::Ref<const Matrix>& rhs) const {
  return rhs - design_ * solve(rhs);
}

Matrix LeastSquares::gram_inverse() const {
  // X P = Q R  =>  (X'X)^{-1} = P R^{-1} R^{-T} P'
  const long p = design_.cols();
  Matrix r = qr_.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  Matrix inner = r_inv * r_inv.transpose();
  const auto& perm = qr_.colsPermutation();
  return perm * inner * perm.transpose();
}

Matrix solve_least_squares(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  return LeastSquares(a).solve(b);
}

Matrix residualize(const Eigen::Ref<const Matrix>& m, const Eigen::Ref<const Matrix>& x) {
  return LeastSquares(x).residualize(m);
}

Matrix symmetric_inverse(const Eigen::Ref<const Matrix>& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "symmetric_inverse: matrix not square");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr;
  qr.setThreshold(kRankTolerance);
  qr.compute(a);
  if (qr.rank() < a.cols()) {
    throw RankDeficientError(qr.rank(), a.cols());
  }
  Matrix inv = qr.inverse();
  return 0.5 * (inv + inv.transpose());
}

namespace {

constexpr int kMaxGammaIterations = 100000;
constexpr double kGammaEps = 1e-17;

// P(a, x) by its power series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxGammaIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the Legendre continued fraction (modified Lentz), x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw Error(ErrorKind::InvalidData, "regularized_gamma_q: requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi_square_sf(double x, int df) {
  if (df < 1 || !(x >= 0.0)) {
    throw Error(ErrorKind::InvalidData, "chi_square_sf: requires x >= 0 and df >= 1");
  }
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values[0];
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(RngSeed seed) {
  std::uint64_t state = seed.seed;
  const std::uint64_t a = splitmix64(state);
  state ^= seed.stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL;
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    const std::uint64_t v = splitmix64(state) ^ a;
    words[i] = static_cast<std::uint32_t>(v);
    words[i + 1] = static_cast<std::uint32_t>(v >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(RngSeed seed) : engine_(make_engine(seed)) {}

double Rng::uniform() { return uniform_(engine_); }

double Rng::normal() { return normal_(engine_); }

bool Rng::bernoulli(double p) { return uniform() < p; }

std::size_t Rng::categorical(std::span<const double> probabilities) {
  const double u = uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  return probabilities.empty() ? 0 : probabilities.size() - 1;
}

Matrix Rng::multivariate_normal(long n, const Eigen::Ref<const Matrix>& chol_lower) {
  const long dim = chol_lower.rows();
  Matrix draws(n, dim);
  for (long i = 0; i < n; ++i) {
    for (long d = 0; d < dim; ++d) draws(i, d) = normal();
  }
  return draws * chol_lower.transpose();
}

}  // namespace fate
