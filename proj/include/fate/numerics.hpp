#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace fate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative threshold on |R_ii| / |R_00| below which a pivot counts as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Throws InvalidData if `m` is empty or holds a NaN/Inf entry.
void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what);

/// Column-pivoted Householder QR of a fixed design, reusable across
/// right-hand sides. Construction fails with RankDeficientError when the
/// design does not have full column rank up to kRankTolerance.
class LeastSquares {
 public:
  explicit LeastSquares(const Eigen::Ref<const Matrix>& design);

  /// argmin_x ||design * x - rhs||, column by column.
  Matrix solve(const Eigen::Ref<const Matrix>& rhs) const;

  /// rhs - design * solve(rhs).
  Matrix residualize(const Eigen::Ref<const Matrix>& rhs) const;

  /// (design' design)^{-1}, from the triangular factor.
  Matrix gram_inverse() const;

  long rows() const { return design_.rows(); }
  long cols() const { return design_.cols(); }

 private:
  Matrix design_;
  Eigen::ColPivHouseholderQR<Matrix> qr_;
};

Matrix solve_least_squares(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b);

/// M - X (X'X)^{-1} X' M computed through a QR solve.
Matrix residualize(const Eigen::Ref<const Matrix>& m, const Eigen::Ref<const Matrix>& x);

/// Inverse of a symmetric matrix through a rank-revealing factorization;
/// throws RankDeficientError if it is singular up to kRankTolerance.
Matrix symmetric_inverse(const Eigen::Ref<const Matrix>& a);

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

/// P(chi2_df > x).
double chi_square_sf(double x, int df);

/// Sum in a fixed binary-tree order, so the result depends only on the
/// sequence and never on how it was produced.
double pairwise_sum(std::span<const double> values);

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Seedable generator. Streams are derived by hashing (seed, stream) through
/// splitmix64, so replication r can be drawn independently of any other.
class Rng {
 public:
  explicit Rng(RngSeed seed);

  double uniform();
  double normal();
  bool bernoulli(double p);
  /// Index drawn from a discrete distribution with the given probabilities.
  std::size_t categorical(std::span<const double> probabilities);

  /// Draws rows of a mean-zero multivariate normal with covariance
  /// `chol_lower * chol_lower'`.
  Matrix multivariate_normal(long n, const Eigen::Ref<const Matrix>& chol_lower);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace fate
