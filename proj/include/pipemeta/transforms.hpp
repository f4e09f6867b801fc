// The preprocessors: fit on a training matrix, then transform any matrix of
// the same width.

#ifndef PIPEMETA_TRANSFORMS_HPP_
#define PIPEMETA_TRANSFORMS_HPP_

#include "pipemeta/common.hpp"

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pipemeta {

enum class PreprocessorKind { None, MMS, SS, SP, PCA, ICA, FA, PF, RBFS };

inline constexpr std::array<PreprocessorKind, 9> kAllPreprocessors = {
    PreprocessorKind::None, PreprocessorKind::MMS, PreprocessorKind::SS,  PreprocessorKind::SP,  PreprocessorKind::PCA,
    PreprocessorKind::ICA,  PreprocessorKind::FA,  PreprocessorKind::PF,  PreprocessorKind::RBFS};

/// The eight real preprocessors, without the baseline `None`.
inline constexpr std::array<PreprocessorKind, 8> kPreprocessors = {
    PreprocessorKind::MMS, PreprocessorKind::SS, PreprocessorKind::SP, PreprocessorKind::PCA,
    PreprocessorKind::ICA, PreprocessorKind::FA, PreprocessorKind::PF, PreprocessorKind::RBFS};

std::string to_string(PreprocessorKind kind);
std::optional<PreprocessorKind> parse_preprocessor(const std::string& name);
/// Position within kPreprocessors (MMS = 0 ... RBFS = 7); None has no slot.
std::optional<std::size_t> preprocessor_slot(PreprocessorKind kind);

/// Output width rule for `n` input features and `m` training rows.
Eigen::Index output_dimension(PreprocessorKind kind, Eigen::Index n, Eigen::Index m);

/// Fixed defaults for the preprocessors.
struct TransformDefaults {
  static constexpr double kSelectFraction = 0.1;
  static constexpr int kIcaMaxIterations = 200;
  static constexpr double kIcaTolerance = 1e-4;
  static constexpr Eigen::Index kAgglomerationClusters = 2;
  static constexpr double kRbfGamma = 1.0;
  static constexpr Eigen::Index kRbfComponents = 100;
};

/// One-way ANOVA F statistic of each column against the class labels.
/// Zero within-class scatter gives +inf when the class means differ, else 0.
Vector anova_f_scores(const Matrix& X, const Labels& y);

/// Ward agglomeration of the columns of X into `clusters` groups. Returns a
/// cluster id per column, with ids ordered by each cluster's lowest column.
std::vector<int> ward_feature_clusters(const Matrix& X, Eigen::Index clusters);

class FittedTransform {
 public:
  struct Identity {};
  struct Affine {  // MMS and SS: (x - offset - offset_low) / divisor; a zero divisor maps the column to 0
    RowVector offset;
    RowVector divisor;
    RowVector offset_low;  // rounding residual of the offset, subtracted second; empty means zero
  };
  struct Selection {
    std::vector<Eigen::Index> columns;
  };
  struct Projection {  // PCA and ICA: (x - mean) * components, padded with zero columns
    RowVector mean;
    Matrix components;
    Eigen::Index padding = 0;
  };
  struct Agglomeration {
    std::vector<int> cluster_of;
    Eigen::Index clusters = 0;
  };
  struct Polynomial {};
  struct FourierFeatures {
    Matrix weights;  // in_dim x components
    RowVector phase;
  };
  using State = std::variant<Identity, Affine, Selection, Projection, Agglomeration, Polynomial, FourierFeatures>;

  FittedTransform(PreprocessorKind kind, Eigen::Index in_dim, Eigen::Index out_dim, State state)
      : kind_(kind), in_dim_(in_dim), out_dim_(out_dim), state_(std::move(state)) {}

  PreprocessorKind kind() const { return kind_; }
  Eigen::Index in_dim() const { return in_dim_; }
  Eigen::Index out_dim() const { return out_dim_; }
  const State& state() const { return state_; }

  /// Throws ShapeError when X does not have in_dim columns.
  Matrix transform(const Matrix& X) const;

 private:
  PreprocessorKind kind_;
  Eigen::Index in_dim_;
  Eigen::Index out_dim_;
  State state_;
};

/// Fit a preprocessor on training data. `y` is only read by SP.
/// Throws ConvergenceError (ICA) and ResourceError (oversized outputs).
FittedTransform fit(PreprocessorKind kind, const Matrix& X, const Labels& y, std::uint64_t seed);

/// FastICA with logcosh contrast and symmetric decorrelation on data that is
/// already centred. Exposed for tests; `fit` wraps it with centring and padding.
struct IcaResult {
  Matrix unmixing;  // rank x n, applied as centred_X * unmixing.transpose()
  int iterations = 0;
};
IcaResult fast_ica(const Matrix& centred, Eigen::Index max_components, std::uint64_t seed,
                   int max_iterations = TransformDefaults::kIcaMaxIterations,
                   double tolerance = TransformDefaults::kIcaTolerance);

}  // namespace pipemeta

#endif  // PIPEMETA_TRANSFORMS_HPP_
