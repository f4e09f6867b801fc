// CART trees with Gini impurity and a bagged random forest over them.
// Class labels here are dense indices 0..n_classes-1.

#ifndef PIPEMETA_FOREST_HPP_
#define PIPEMETA_FOREST_HPP_

#include "pipemeta/common.hpp"

#include <vector>

namespace pipemeta {

/// Best binary split of `rows` on one feature, `x <= threshold` going left.
struct GiniSplit {
  bool valid = false;
  Eigen::Index feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
};

double gini_impurity(const Eigen::Ref<const Vector>& class_counts);

GiniSplit best_gini_split(const Matrix& X, const Labels& y, const IndexList& rows, Eigen::Index feature,
                          int n_classes);

struct ForestParams {
  int trees = 10;
  bool bootstrap = true;
  /// Features examined per split; 0 means floor(sqrt(n_features)), at least 1.
  Eigen::Index max_features = 0;
};

class DecisionTree {
 public:
  /// Grows until leaves are pure or no feature separates the rows.
  void fit(const Matrix& X, const Labels& y, const IndexList& rows, int n_classes, Eigen::Index max_features,
           Rng& rng);
  /// Class-frequency vector of the leaf reached by `x`.
  const Vector& leaf_distribution(const Eigen::Ref<const RowVector>& x) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::Index feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Vector distribution;
  };
  int grow(const Matrix& X, const Labels& y, IndexList rows, int n_classes, Eigen::Index max_features, Rng& rng);

  std::vector<Node> nodes_;
};

class RandomForest {
 public:
  void fit(const Matrix& X, const Labels& y, int n_classes, const ForestParams& params, std::uint64_t seed);
  /// Mean of the trees' leaf distributions, one row per input row.
  Matrix predict_proba(const Matrix& X) const;
  /// Argmax of predict_proba; ties go to the lower class index.
  Labels predict(const Matrix& X) const;

  int n_classes() const { return n_classes_; }
  Eigen::Index n_features() const { return n_features_; }

 private:
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
  Eigen::Index n_features_ = 0;
};

/// Index of the largest entry, lowest index on ties.
Eigen::Index argmax_lowest(const Eigen::Ref<const RowVector>& scores);

}  // namespace pipemeta

#endif  // PIPEMETA_FOREST_HPP_
