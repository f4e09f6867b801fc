// Shared aliases, error types and seed plumbing.

#ifndef PIPEMETA_COMMON_HPP_
#define PIPEMETA_COMMON_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pipemeta {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Labels = Eigen::VectorXi;
using IndexList = std::vector<Eigen::Index>;
using Rng = std::mt19937_64;

/// Raised when an iterative fit exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a dense allocation would exceed the configured budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or vector width does not match what the fitted object expects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Largest number of doubles a single intermediate matrix may hold before a
/// fit reports a ResourceError instead of attempting the allocation.
inline constexpr std::size_t kMaxDenseEntries = std::size_t{1} << 26;

void check_dense_budget(std::size_t rows, std::size_t cols, std::string_view what);

// Seeds are derived by hashing a parent seed with a label (FNV-1a followed by
// a splitmix64 finalizer), so they do not depend on std::hash.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label);

template <typename... Labels_>
std::uint64_t derive_seed(std::uint64_t parent, std::string_view first, Labels_&&... rest) {
  return derive_seed(derive_seed(parent, first), std::forward<Labels_>(rest)...);
}

/// Uniform integer in [0, n) that does not depend on the standard library's
/// distribution implementation.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  // Rejection keeps the draw unbiased for any n.
  const std::uint64_t limit = Rng::max() - (Rng::max() % n + 1) % n;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw > limit);
  return static_cast<std::size_t>(draw % n);
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller (portable across standard libraries).
double standard_normal(Rng& rng);

/// Fisher-Yates shuffle driven by uniform_index.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

/// Select rows of a matrix (or entries of a vector) by index.
template <typename Derived>
typename Derived::PlainObject take_rows(const Eigen::DenseBase<Derived>& m, const IndexList& rows) {
  typename Derived::PlainObject out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace pipemeta

#endif  // PIPEMETA_COMMON_HPP_
