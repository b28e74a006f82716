#pragma once

// Dense least squares with column pivoting, heteroskedasticity-robust
// covariance, and the t / F tail probabilities used for inference.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "gaspanel/errors.hpp"

namespace gaspanel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Pivots below this fraction of the largest pivot mark a column as dependent.
inline constexpr double kRankTolerance = 1e-10;

enum class CovarianceVariant { Classical, HC0, HC1 };

inline std::string_view to_string(CovarianceVariant v) {
  switch (v) {
    case CovarianceVariant::Classical:
      return "classical";
    case CovarianceVariant::HC0:
      return "hc0";
    case CovarianceVariant::HC1:
      return "hc1";
  }
  return "unknown";
}

inline CovarianceVariant covariance_from_string(std::string_view s) {
  if (s == "classical") return CovarianceVariant::Classical;
  if (s == "hc0" || s == "HC0") return CovarianceVariant::HC0;
  if (s == "hc1" || s == "HC1") return CovarianceVariant::HC1;
  throw SpecError("unknown covariance variant '" + std::string(s) + "'");
}

struct LeastSquaresSolution {
  Vector coefficients;         // omitted columns carry 0
  std::vector<bool> omitted;   // per column of X
  Vector residuals;
  Index rank = 0;
  Matrix xtx_inverse;          // inverse on the retained columns, zero elsewhere

  std::vector<Index> retained() const {
    std::vector<Index> out;
    for (std::size_t j = 0; j < omitted.size(); ++j)
      if (!omitted[j]) out.push_back(static_cast<Index>(j));
    return out;
  }
};

namespace detail {

inline void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + " contains non-finite entries");
}

}  // namespace detail

/// Minimises ||y - X b||^2 through a Householder QR with column pivoting.
/// Columns whose pivot falls below `tolerance` times the largest pivot are
/// dropped and flagged as omitted.
inline LeastSquaresSolution solve_least_squares(const Matrix& X, const Vector& y,
                                                double tolerance = kRankTolerance) {
  if (X.rows() < 1 || X.cols() < 1) throw SpecError("design matrix must be non-empty");
  if (X.rows() != y.size())
    throw SpecError("design has " + std::to_string(X.rows()) + " rows but response has " +
                    std::to_string(y.size()));
  detail::require_finite(X, "design matrix");
  detail::require_finite(y, "response");

  const Index k = X.cols();
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(tolerance);
  const Index rank = qr.rank();

  LeastSquaresSolution out;
  out.rank = rank;
  out.coefficients = Vector::Zero(k);
  out.omitted.assign(static_cast<std::size_t>(k), true);
  out.xtx_inverse = Matrix::Zero(k, k);

  const auto& perm = qr.colsPermutation().indices();
  if (rank > 0) {
    Vector qty = y;
    qty.applyOnTheLeft(qr.householderQ().adjoint());
    const Matrix r11 = qr.matrixR().topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
    const auto tri = r11.triangularView<Eigen::Upper>();
    const Vector beta = tri.solve(qty.head(rank));
    const Matrix r_inv = tri.solve(Matrix::Identity(rank, rank));
    const Matrix inv = r_inv * r_inv.transpose();
    for (Index i = 0; i < rank; ++i) {
      out.coefficients(perm(i)) = beta(i);
      out.omitted[static_cast<std::size_t>(perm(i))] = false;
      for (Index j = 0; j < rank; ++j) out.xtx_inverse(perm(i), perm(j)) = inv(i, j);
    }
  }
  out.residuals = y - X * out.coefficients;
  return out;
}

/// (X'X)^-1 for a full-column-rank design.
inline Matrix bread_matrix(const Matrix& X) {
  auto ls = solve_least_squares(X, Vector::Zero(X.rows()));
  if (ls.rank < X.cols()) throw NumericalError("design matrix is rank deficient");
  return ls.xtx_inverse;
}

/// Covariance of the coefficients given a bread (X'X)^-1. `absorbed_df`
/// counts parameters swept out before the regression (fixed effects) and
/// enters the classical and HC1 degrees of freedom.
inline Matrix sandwich_covariance(const Matrix& X, const Vector& residuals, const Matrix& bread,
                                  CovarianceVariant variant, Index absorbed_df = 0) {
  if (residuals.size() != X.rows()) throw SpecError("residual length does not match design");
  const Index n = X.rows();
  const Index k = X.cols();
  const Index df = n - k - absorbed_df;
  Matrix v;
  switch (variant) {
    case CovarianceVariant::Classical: {
      if (df <= 0) throw NumericalError("no residual degrees of freedom");
      v = bread * (residuals.squaredNorm() / static_cast<double>(df));
      break;
    }
    case CovarianceVariant::HC0:
    case CovarianceVariant::HC1: {
      const Matrix meat = X.transpose() * residuals.array().square().matrix().asDiagonal() * X;
      v = bread * meat * bread;
      if (variant == CovarianceVariant::HC1) {
        if (df <= 0) throw NumericalError("HC1 needs n greater than the parameter count");
        v *= static_cast<double>(n) / static_cast<double>(df);
      }
      break;
    }
  }
  return 0.5 * (v + v.transpose());
}

inline Matrix sandwich_covariance(const Matrix& X, const Vector& residuals,
                                  CovarianceVariant variant, Index absorbed_df = 0) {
  return sandwich_covariance(X, residuals, bread_matrix(X), variant, absorbed_df);
}

// ---------------------------------------------------------------------------
// Tail probabilities

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// I_x(a, b). `y` must equal 1 - x; passing it separately keeps precision
/// when x is close to 1.
inline double regularized_incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) throw SpecError("incomplete beta needs positive shape parameters");
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(log_front) * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * detail::beta_continued_fraction(b, a, y) / b;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
  return regularized_incomplete_beta(a, b, x, 1.0 - x);
}

/// Two-sided P(|T| > |t|) for Student's t with `df` degrees of freedom.
inline double student_t_pvalue(double t, double df) {
  if (!(df > 0.0)) throw SpecError("t distribution needs positive degrees of freedom");
  if (std::isnan(t)) throw NumericalError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  return std::clamp(regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2)),
                    0.0, 1.0);
}

/// Upper-tail P(F > f) for the F(df1, df2) distribution.
inline double f_pvalue(double f, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0))
    throw SpecError("F distribution needs positive degrees of freedom");
  if (std::isnan(f)) throw NumericalError("F statistic is NaN");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double denom = df2 + df1 * f;
  return std::clamp(regularized_incomplete_beta(0.5 * df2, 0.5 * df1, df2 / denom, df1 * f / denom),
                    0.0, 1.0);
}

/// Two-sided normal tail, used when no residual degrees of freedom are known.
inline double normal_pvalue(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace gaspanel
