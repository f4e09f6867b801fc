#include "pipemeta/transforms.hpp"

#include "pipemeta/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace pipemeta {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<const char*, 9> kNames = {"None", "MMS", "SS", "SP", "PCA", "ICA", "FA", "PF", "RBFS"};

Eigen::Index select_count(Eigen::Index n) {
  return std::max<Eigen::Index>(1, std::lround(TransformDefaults::kSelectFraction * static_cast<double>(n)));
}

Eigen::Index polynomial_width(Eigen::Index n) { return 1 + n + n * (n + 1) / 2; }

FittedTransform fit_min_max(const Matrix& X) {
  const RowVector lo = X.colwise().minCoeff();
  const RowVector hi = X.colwise().maxCoeff();
  RowVector range = hi - lo;
  for (Eigen::Index j = 0; j < range.size(); ++j) {
    if (!(hi(j) > lo(j))) range(j) = 0.0;
  }
  return {PreprocessorKind::MMS, X.cols(), X.cols(), FittedTransform::Affine{lo, range, RowVector()}};
}

FittedTransform fit_standard(const Matrix& X) {
  const RowVector mean = stats::column_means(X);
  RowVector sd = stats::column_variances(X).cwiseSqrt();
  const RowVector lo = X.colwise().minCoeff();
  const RowVector hi = X.colwise().maxCoeff();
  for (Eigen::Index j = 0; j < sd.size(); ++j) {
    if (!(hi(j) > lo(j))) sd(j) = 0.0;
  }
  // The mean of a large offset column is only good to one ulp; keep the
  // residual separately so centred training columns average to ~0.
  const RowVector residual = (X.rowwise() - mean).colwise().mean();
  return {PreprocessorKind::SS, X.cols(), X.cols(), FittedTransform::Affine{mean, sd, residual}};
}

FittedTransform fit_select(const Matrix& X, const Labels& y) {
  const Vector scores = anova_f_scores(X, y);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(X.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });
  const auto k = select_count(X.cols());
  std::vector<Eigen::Index> keep(order.begin(), order.begin() + k);
  std::sort(keep.begin(), keep.end());
  return {PreprocessorKind::SP, X.cols(), k, FittedTransform::Selection{std::move(keep)}};
}

FittedTransform fit_pca(const Matrix& X) {
  const Eigen::Index k = std::min(X.rows(), X.cols());
  const RowVector mean = stats::column_means(X);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(stats::covariance(X));
  // Eigenvalues ascend; components are taken from the top.
  Matrix components(X.cols(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Vector v = eig.eigenvectors().col(X.cols() - 1 - c);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0) v = -v;
    components.col(c) = v;
  }
  return {PreprocessorKind::PCA, X.cols(), k, FittedTransform::Projection{mean, components, 0}};
}

FittedTransform fit_ica(const Matrix& X, std::uint64_t seed) {
  const Eigen::Index k = std::min(X.rows(), X.cols());
  const RowVector mean = stats::column_means(X);
  const Matrix Xc = X.rowwise() - mean;
  const auto result = fast_ica(Xc, k, seed);
  const Matrix components = result.unmixing.transpose();
  return {PreprocessorKind::ICA, X.cols(), k,
          FittedTransform::Projection{mean, components, k - components.cols()}};
}

FittedTransform fit_agglomeration(const Matrix& X) {
  const Eigen::Index k = std::min(TransformDefaults::kAgglomerationClusters, X.cols());
  return {PreprocessorKind::FA, X.cols(), k, FittedTransform::Agglomeration{ward_feature_clusters(X, k), k}};
}

FittedTransform fit_fourier(const Matrix& X, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index d = TransformDefaults::kRbfComponents;
  const double scale = std::sqrt(2.0 * TransformDefaults::kRbfGamma);
  Matrix weights(X.cols(), d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < X.cols(); ++r) weights(r, c) = scale * standard_normal(rng);
  }
  RowVector phase(d);
  for (Eigen::Index c = 0; c < d; ++c) phase(c) = 2.0 * std::numbers::pi * uniform_unit(rng);
  return {PreprocessorKind::RBFS, X.cols(), d, FittedTransform::FourierFeatures{std::move(weights), std::move(phase)}};
}

Matrix symmetric_decorrelation(const Matrix& W) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(W * W.transpose());
  const Vector inv_sqrt = eig.eigenvalues().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() * W;
}

}  // namespace

std::string to_string(PreprocessorKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<PreprocessorKind> parse_preprocessor(const std::string& name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (name == kNames[i]) return static_cast<PreprocessorKind>(i);
  }
  return std::nullopt;
}

std::optional<std::size_t> preprocessor_slot(PreprocessorKind kind) {
  if (kind == PreprocessorKind::None) return std::nullopt;
  return static_cast<std::size_t>(kind) - 1;
}

Eigen::Index output_dimension(PreprocessorKind kind, Eigen::Index n, Eigen::Index m) {
  switch (kind) {
    case PreprocessorKind::None:
    case PreprocessorKind::MMS:
    case PreprocessorKind::SS: return n;
    case PreprocessorKind::SP: return select_count(n);
    case PreprocessorKind::PCA:
    case PreprocessorKind::ICA: return std::min(m, n);
    case PreprocessorKind::FA: return std::min(TransformDefaults::kAgglomerationClusters, n);
    case PreprocessorKind::PF: return polynomial_width(n);
    case PreprocessorKind::RBFS: return TransformDefaults::kRbfComponents;
  }
  return n;
}

Vector anova_f_scores(const Matrix& X, const Labels& y) {
  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < y.size(); ++i) groups[y(i)].push_back(i);
  const auto n_groups = static_cast<double>(groups.size());
  const auto n_rows = static_cast<double>(X.rows());

  Vector scores = Vector::Zero(X.cols());
  if (groups.size() < 2) return scores;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const auto col = X.col(j);
    const double grand = col.mean();
    const double total = (col.array() - grand).square().sum();
    if (total <= 1e-24 * (1.0 + grand * grand) * n_rows) continue;  // constant column
    double between = 0.0;
    double within = 0.0;
    for (const auto& [label, rows] : groups) {
      double group_mean = 0.0;
      for (auto r : rows) group_mean += col(r);
      group_mean /= static_cast<double>(rows.size());
      between += static_cast<double>(rows.size()) * (group_mean - grand) * (group_mean - grand);
      for (auto r : rows) within += (col(r) - group_mean) * (col(r) - group_mean);
    }
    const double df_between = n_groups - 1.0;
    const double df_within = n_rows - n_groups;
    if (within <= 0.0 || df_within <= 0.0) {
      scores(j) = between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
      scores(j) = (between / df_between) / (within / df_within);
    }
  }
  return scores;
}

std::vector<int> ward_feature_clusters(const Matrix& X, Eigen::Index clusters) {
  const auto n = static_cast<std::size_t>(X.cols());
  std::vector<int> assignment(n);
  std::iota(assignment.begin(), assignment.end(), 0);
  if (static_cast<Eigen::Index>(n) <= clusters) return assignment;

  // Lance-Williams updates on squared Euclidean distances between columns.
  Matrix dist(X.cols(), X.cols());
  for (Eigen::Index a = 0; a < X.cols(); ++a) {
    for (Eigen::Index b = 0; b < X.cols(); ++b) dist(a, b) = (X.col(a) - X.col(b)).squaredNorm();
  }
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), std::size_t{0});

  for (std::size_t remaining = n; remaining > static_cast<std::size_t>(clusters); --remaining) {
    std::size_t best_a = 0, best_b = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        const double d = dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (d < best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
    const auto ia = static_cast<Eigen::Index>(best_a);
    const auto ib = static_cast<Eigen::Index>(best_b);
    const double na = static_cast<double>(size[best_a]);
    const double nb = static_cast<double>(size[best_b]);
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == best_a || c == best_b) continue;
      const auto ic = static_cast<Eigen::Index>(c);
      const double nc = static_cast<double>(size[c]);
      const double updated = ((na + nc) * dist(ia, ic) + (nb + nc) * dist(ib, ic) - nc * dist(ia, ib)) / (na + nb + nc);
      dist(ia, ic) = dist(ic, ia) = updated;
    }
    size[best_a] += size[best_b];
    active[best_b] = false;
    for (auto& r : root) {
      if (r == best_b) r = best_a;
    }
  }

  // Renumber clusters by their lowest member column.
  std::map<std::size_t, int> label_of_root;
  for (std::size_t j = 0; j < n; ++j) {
    if (!label_of_root.count(root[j])) {
      const int next = static_cast<int>(label_of_root.size());
      label_of_root[root[j]] = next;
    }
    assignment[j] = label_of_root[root[j]];
  }
  return assignment;
}

IcaResult fast_ica(const Matrix& centred, Eigen::Index max_components, std::uint64_t seed, int max_iterations,
                   double tolerance) {
  const auto m = static_cast<double>(centred.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig((centred.transpose() * centred) / m);
  const Vector values = eig.eigenvalues().reverse();
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();

  // Directions with (numerically) zero variance cannot be whitened; they are
  // left out and the caller pads the output instead.
  Eigen::Index rank = 0;
  const double top = values.size() > 0 ? values(0) : 0.0;
  while (rank < std::min<Eigen::Index>(max_components, values.size()) && top > 0.0 &&
         values(rank) > 1e-10 * top) {
    ++rank;
  }
  IcaResult result;
  if (rank == 0) {
    result.unmixing = Matrix::Zero(0, centred.cols());
    return result;
  }

  const Matrix whitening = values.head(rank).cwiseSqrt().cwiseInverse().asDiagonal() * vectors.leftCols(rank).transpose();
  const Matrix Z = centred * whitening.transpose();

  Rng rng(seed);
  Matrix W(rank, rank);
  for (Eigen::Index r = 0; r < rank; ++r) {
    for (Eigen::Index c = 0; c < rank; ++c) W(r, c) = standard_normal(rng);
  }
  W = symmetric_decorrelation(W);

  bool converged = false;
  int iteration = 0;
  while (iteration < max_iterations) {
    ++iteration;
    const Matrix projected = Z * W.transpose();
    const Matrix g = projected.array().tanh().matrix();
    const Vector g_prime_mean = (1.0 - g.array().square()).colwise().mean().transpose();
    Matrix next = (g.transpose() * Z) / m - g_prime_mean.asDiagonal() * W;
    next = symmetric_decorrelation(next);
    const double change = ((next * W.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    W = next;
    if (change < tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("FastICA did not converge within " + std::to_string(max_iterations) + " iterations");
  }
  result.unmixing = W * whitening;
  result.iterations = iteration;
  return result;
}

FittedTransform fit(PreprocessorKind kind, const Matrix& X, const Labels& y, std::uint64_t seed) {
  if (X.rows() == 0 || X.cols() == 0) throw ShapeError("cannot fit a preprocessor on an empty matrix");
  if (!X.allFinite()) throw std::invalid_argument("preprocessor input contains non-finite values");
  check_dense_budget(static_cast<std::size_t>(X.rows()),
                     static_cast<std::size_t>(output_dimension(kind, X.cols(), X.rows())), to_string(kind));
  switch (kind) {
    case PreprocessorKind::None: return {kind, X.cols(), X.cols(), FittedTransform::Identity{}};
    case PreprocessorKind::MMS: return fit_min_max(X);
    case PreprocessorKind::SS: return fit_standard(X);
    case PreprocessorKind::SP:
      if (y.size() != X.rows()) throw ShapeError("SP needs one label per training row");
      return fit_select(X, y);
    case PreprocessorKind::PCA: return fit_pca(X);
    case PreprocessorKind::ICA: return fit_ica(X, seed);
    case PreprocessorKind::FA: return fit_agglomeration(X);
    case PreprocessorKind::PF: return {kind, X.cols(), polynomial_width(X.cols()), FittedTransform::Polynomial{}};
    case PreprocessorKind::RBFS: return fit_fourier(X, seed);
  }
  throw std::invalid_argument("unknown preprocessor kind");
}

Matrix FittedTransform::transform(const Matrix& X) const {
  if (X.cols() != in_dim_) {
    throw ShapeError(to_string(kind_) + " expects " + std::to_string(in_dim_) + " columns, got " +
                     std::to_string(X.cols()));
  }
  check_dense_budget(static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(out_dim_), to_string(kind_));
  return std::visit(
      overloaded{
          [&](const Identity&) -> Matrix { return X; },
          [&](const Affine& a) -> Matrix {
            Matrix out(X.rows(), X.cols());
            for (Eigen::Index j = 0; j < X.cols(); ++j) {
              if (a.divisor(j) == 0.0) {
                out.col(j).setZero();
              } else {
                const double low = a.offset_low.size() > 0 ? a.offset_low(j) : 0.0;
                out.col(j) = ((X.col(j).array() - a.offset(j)) - low) / a.divisor(j);
              }
            }
            return out;
          },
          [&](const Selection& s) -> Matrix {
            Matrix out(X.rows(), static_cast<Eigen::Index>(s.columns.size()));
            for (std::size_t j = 0; j < s.columns.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(s.columns[j]);
            return out;
          },
          [&](const Projection& p) -> Matrix {
            Matrix out = Matrix::Zero(X.rows(), out_dim_);
            out.leftCols(p.components.cols()) = (X.rowwise() - p.mean) * p.components;
            return out;
          },
          [&](const Agglomeration& a) -> Matrix {
            Matrix out = Matrix::Zero(X.rows(), a.clusters);
            Vector counts = Vector::Zero(a.clusters);
            for (Eigen::Index j = 0; j < X.cols(); ++j) {
              out.col(a.cluster_of[static_cast<std::size_t>(j)]) += X.col(j);
              counts(a.cluster_of[static_cast<std::size_t>(j)]) += 1.0;
            }
            for (Eigen::Index c = 0; c < a.clusters; ++c) out.col(c) /= counts(c);
            return out;
          },
          [&](const Polynomial&) -> Matrix {
            Matrix out(X.rows(), out_dim_);
            out.col(0).setOnes();
            out.middleCols(1, X.cols()) = X;
            Eigen::Index c = 1 + X.cols();
            for (Eigen::Index i = 0; i < X.cols(); ++i) {
              for (Eigen::Index j = i; j < X.cols(); ++j) out.col(c++) = X.col(i).cwiseProduct(X.col(j));
            }
            return out;
          },
          [&](const FourierFeatures& f) -> Matrix {
            const double norm = std::sqrt(2.0 / static_cast<double>(f.weights.cols()));
            return norm * ((X * f.weights).rowwise() + f.phase).array().cos().matrix();
          },
      },
      state_);
}

}  // namespace pipemeta
