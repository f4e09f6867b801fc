#include "pipemeta/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pipemeta {

double gini_impurity(const Eigen::Ref<const Vector>& class_counts) {
  const double total = class_counts.sum();
  if (total <= 0.0) return 0.0;
  return 1.0 - (class_counts / total).squaredNorm();
}

GiniSplit best_gini_split(const Matrix& X, const Labels& y, const IndexList& rows, Eigen::Index feature,
                          int n_classes) {
  GiniSplit best;
  best.feature = feature;
  if (rows.size() < 2) return best;

  IndexList order = rows;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return X(a, feature) < X(b, feature); });

  Vector right = Vector::Zero(n_classes);
  for (auto r : order) right(y(r)) += 1.0;
  Vector left = Vector::Zero(n_classes);
  const double total = static_cast<double>(order.size());

  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    left(y(order[i])) += 1.0;
    right(y(order[i])) -= 1.0;
    const double lo = X(order[i], feature);
    const double hi = X(order[i + 1], feature);
    if (!(hi > lo)) continue;
    const double n_left = static_cast<double>(i + 1);
    const double impurity = (n_left * gini_impurity(left) + (total - n_left) * gini_impurity(right)) / total;
    if (!best.valid || impurity < best.impurity) {
      best.valid = true;
      best.impurity = impurity;
      double mid = lo + (hi - lo) / 2.0;
      if (!(mid < hi)) mid = lo;
      best.threshold = mid;
    }
  }
  return best;
}

Eigen::Index argmax_lowest(const Eigen::Ref<const RowVector>& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = i;
  }
  return best;
}

void DecisionTree::fit(const Matrix& X, const Labels& y, const IndexList& rows, int n_classes,
                       Eigen::Index max_features, Rng& rng) {
  nodes_.clear();
  grow(X, y, rows, n_classes, max_features, rng);
}

int DecisionTree::grow(const Matrix& X, const Labels& y, IndexList rows, int n_classes, Eigen::Index max_features,
                       Rng& rng) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Vector counts = Vector::Zero(n_classes);
  for (auto r : rows) counts(y(r)) += 1.0;
  nodes_[static_cast<std::size_t>(id)].distribution = counts / std::max(1.0, counts.sum());

  const bool pure = (counts.array() > 0.0).count() <= 1;
  if (pure || rows.size() < 2) return id;

  // Visit features in random order until max_features non-constant ones
  // have been scored.
  std::vector<Eigen::Index> features(static_cast<std::size_t>(X.cols()));
  std::iota(features.begin(), features.end(), Eigen::Index{0});
  GiniSplit best;
  Eigen::Index scored = 0;
  for (std::size_t i = 0; i < features.size() && scored < max_features; ++i) {
    std::swap(features[i], features[i + uniform_index(rng, features.size() - i)]);
    const auto candidate = best_gini_split(X, y, rows, features[i], n_classes);
    if (!candidate.valid) continue;
    ++scored;
    if (!best.valid || candidate.impurity < best.impurity) best = candidate;
  }
  if (!best.valid) return id;

  IndexList left_rows, right_rows;
  for (auto r : rows) (X(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  nodes_[static_cast<std::size_t>(id)].feature = best.feature;
  nodes_[static_cast<std::size_t>(id)].threshold = best.threshold;
  const int left = grow(X, y, std::move(left_rows), n_classes, max_features, rng);
  const int right = grow(X, y, std::move(right_rows), n_classes, max_features, rng);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

const Vector& DecisionTree::leaf_distribution(const Eigen::Ref<const RowVector>& x) const {
  std::size_t node = 0;
  while (nodes_[node].feature >= 0) {
    node = static_cast<std::size_t>(x(nodes_[node].feature) <= nodes_[node].threshold ? nodes_[node].left
                                                                                        : nodes_[node].right);
  }
  return nodes_[node].distribution;
}

void RandomForest::fit(const Matrix& X, const Labels& y, int n_classes, const ForestParams& params,
                       std::uint64_t seed) {
  n_classes_ = n_classes;
  n_features_ = X.cols();
  const Eigen::Index max_features =
      params.max_features > 0
          ? std::min(params.max_features, X.cols())
          : std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(X.cols())))));
  trees_.assign(static_cast<std::size_t>(params.trees), DecisionTree{});
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    IndexList rows(static_cast<std::size_t>(X.rows()));
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(X.rows())));
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    trees_[t].fit(X, y, rows, n_classes, max_features, rng);
  }
}

Matrix RandomForest::predict_proba(const Matrix& X) const {
  if (X.cols() != n_features_) throw ShapeError("forest expects " + std::to_string(n_features_) + " features");
  Matrix proba = Matrix::Zero(X.rows(), n_classes_);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (const auto& tree : trees_) proba.row(i) += tree.leaf_distribution(X.row(i)).transpose();
  }
  if (!trees_.empty()) proba /= static_cast<double>(trees_.size());
  return proba;
}

Labels RandomForest::predict(const Matrix& X) const {
  const Matrix proba = predict_proba(X);
  Labels out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = static_cast<int>(argmax_lowest(proba.row(i)));
  return out;
}

}  // namespace pipemeta
