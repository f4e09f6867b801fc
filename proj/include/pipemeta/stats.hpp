// Column statistics as expression-friendly free functions.

#ifndef PIPEMETA_STATS_HPP_
#define PIPEMETA_STATS_HPP_

#include <Eigen/Dense>

#include <cmath>

namespace pipemeta::stats {

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 1, Eigen::Dynamic> column_means(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  if (X.rows() == 0) return Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(X.cols());
  return X.colwise().mean();
}

/// Population variance (divisor m) of every column.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 1, Eigen::Dynamic> column_variances(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  if (X.rows() == 0) return Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(X.cols());
  const auto mu = column_means(X);
  return (X.rowwise() - mu).array().square().colwise().mean();
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> centred(const Eigen::MatrixBase<Derived>& X) {
  return X.rowwise() - column_means(X);
}

/// Sample covariance (divisor max(m - 1, 1)) of the columns.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> covariance(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  const auto Xc = centred(X);
  const Scalar divisor = X.rows() > 1 ? Scalar(X.rows() - 1) : Scalar(1);
  return (Xc.transpose() * Xc) / divisor;
}

/// Population skewness of a vector; 0 for (numerically) constant input.
template <typename Derived>
typename Derived::Scalar skewness(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<Scalar>(v.size());
  if (v.size() == 0) return Scalar(0);
  const Scalar mu = v.mean();
  const auto d = (v.array() - mu).eval();
  const Scalar m2 = d.square().sum() / n;
  if (m2 <= Scalar(1e-24) * (Scalar(1) + mu * mu)) return Scalar(0);
  const Scalar m3 = d.cube().sum() / n;
  return m3 / std::pow(m2, Scalar(1.5));
}

/// Population excess kurtosis of a vector; 0 for (numerically) constant input.
template <typename Derived>
typename Derived::Scalar excess_kurtosis(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<Scalar>(v.size());
  if (v.size() == 0) return Scalar(0);
  const Scalar mu = v.mean();
  const auto d = (v.array() - mu).eval();
  const Scalar m2 = d.square().sum() / n;
  if (m2 <= Scalar(1e-24) * (Scalar(1) + mu * mu)) return Scalar(0);
  const Scalar m4 = d.square().square().sum() / n;
  return m4 / (m2 * m2) - Scalar(3);
}

/// Pearson correlation; 0 when either side is (numerically) constant.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const auto da = (a.array() - a.mean()).eval();
  const auto db = (b.array() - b.mean()).eval();
  const Scalar saa = da.square().sum();
  const Scalar sbb = db.square().sum();
  const Scalar floor_a = Scalar(1e-24) * (Scalar(1) + a.mean() * a.mean()) * static_cast<Scalar>(a.size());
  const Scalar floor_b = Scalar(1e-24) * (Scalar(1) + b.mean() * b.mean()) * static_cast<Scalar>(b.size());
  if (saa <= floor_a || sbb <= floor_b) return Scalar(0);
  return (da * db).sum() / std::sqrt(saa * sbb);
}

}  // namespace pipemeta::stats

#endif  // PIPEMETA_STATS_HPP_
