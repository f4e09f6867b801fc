// The classifiers behind a uniform train/predict contract.

#ifndef PIPEMETA_LEARNERS_HPP_
#define PIPEMETA_LEARNERS_HPP_

#include "pipemeta/common.hpp"
#include "pipemeta/forest.hpp"

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pipemeta {

enum class ClassifierKind { RFC, LR, KNN, Per, SVC, GNB };

inline constexpr std::array<ClassifierKind, 6> kAllClassifiers = {ClassifierKind::RFC, ClassifierKind::LR,
                                                                   ClassifierKind::KNN, ClassifierKind::Per,
                                                                   ClassifierKind::SVC, ClassifierKind::GNB};

std::string to_string(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier(const std::string& name);

// The learners below work on dense class indices 0..n_classes-1. TrainedModel
// maps arbitrary integer labels onto that range.

/// L2-regularised logistic regression (one-vs-rest for more than two classes)
/// fitted by accelerated gradient descent on 0.5*|w|^2 + C * sum(log-loss).
class LogisticRegression {
 public:
  static constexpr double kC = 1.0;
  static constexpr double kTolerance = 1e-4;
  static constexpr int kMaxEpochs = 100;

  void fit(const Matrix& X, const Labels& y, int n_classes);
  Matrix decision_function(const Matrix& X) const;
  Labels predict(const Matrix& X) const;

 private:
  Matrix weights_;  // n_features x n_models
  RowVector bias_;
  int n_classes_ = 0;
};

class KNearestNeighbors {
 public:
  explicit KNearestNeighbors(int k = 5) : k_(k) {}
  void fit(const Matrix& X, const Labels& y, int n_classes);
  Labels predict(const Matrix& X) const;

 private:
  int k_;
  Matrix X_;
  Labels y_;
  int n_classes_ = 0;
};

/// Classic perceptron, one-vs-rest, stopping after an epoch without mistakes.
class Perceptron {
 public:
  static constexpr double kLearningRate = 1.0;
  static constexpr int kMaxEpochs = 100;

  void fit(const Matrix& X, const Labels& y, int n_classes, std::uint64_t seed);
  Labels predict(const Matrix& X) const;

 private:
  Matrix weights_;  // n_features x n_models
  RowVector bias_;
  int n_classes_ = 0;
};

/// RBF-kernel C-SVM, one-vs-one, trained with an SMO solver using
/// second-order working-set selection.
class SupportVectorClassifier {
 public:
  static constexpr double kC = 1.0;
  static constexpr double kTolerance = 1e-3;

  void fit(const Matrix& X, const Labels& y, int n_classes);
  Labels predict(const Matrix& X) const;
  double gamma() const { return gamma_; }

  struct BinaryMachine {
    int positive = 0;  // class that wins when the decision value is > 0
    int negative = 0;
    Matrix support;    // support vectors
    Vector coef;       // alpha_i * y_i
    double rho = 0.0;
    int iterations = 0;
  };
  const std::vector<BinaryMachine>& machines() const { return machines_; }

 private:
  std::vector<BinaryMachine> machines_;
  double gamma_ = 1.0;
  int n_classes_ = 0;
};

class GaussianNaiveBayes {
 public:
  static constexpr double kVarianceSmoothing = 1e-9;

  void fit(const Matrix& X, const Labels& y, int n_classes);
  Matrix joint_log_likelihood(const Matrix& X) const;
  Labels predict(const Matrix& X) const;

 private:
  Matrix means_;      // n_classes x n_features
  Matrix variances_;  // n_classes x n_features
  Vector log_prior_;
};

/// Predicts the class of the nearest class centroid (Euclidean).
class NearestCentroid {
 public:
  void fit(const Matrix& X, const Labels& y, int n_classes);
  Labels predict(const Matrix& X) const;

 private:
  Matrix centroids_;
  std::vector<bool> present_;
};

/// A depth-one tree on a single feature.
class DecisionStump {
 public:
  void fit(const Matrix& X, const Labels& y, int n_classes, Eigen::Index feature);
  Labels predict(const Matrix& X) const;
  /// Weighted Gini impurity of the chosen split (of the root when no split).
  double impurity() const { return impurity_; }

 private:
  Eigen::Index feature_ = 0;
  double threshold_ = 0.0;
  bool split_ = false;
  int left_class_ = 0;
  int right_class_ = 0;
  double impurity_ = 0.0;
};

class TrainedModel {
 public:
  struct Constant {
    int label = 0;
  };
  using State = std::variant<Constant, RandomForest, LogisticRegression, KNearestNeighbors, Perceptron,
                             SupportVectorClassifier, GaussianNaiveBayes>;

  TrainedModel(ClassifierKind kind, std::vector<int> classes, Eigen::Index n_features, State state)
      : kind_(kind), classes_(std::move(classes)), n_features_(n_features), state_(std::move(state)) {}

  ClassifierKind kind() const { return kind_; }
  const std::vector<int>& classes() const { return classes_; }
  Eigen::Index n_features() const { return n_features_; }
  const State& state() const { return state_; }

  /// Throws ShapeError when X has the wrong width.
  Labels predict(const Matrix& X) const;

 private:
  ClassifierKind kind_;
  std::vector<int> classes_;
  Eigen::Index n_features_;
  State state_;
};

/// Random forest settings used for classification pipelines and metamodels.
ForestParams default_forest_params();

TrainedModel train(ClassifierKind kind, const Matrix& X, const Labels& y, std::uint64_t seed);

double accuracy(const Labels& predicted, const Labels& truth);
/// Mean per-class recall over the classes present in `truth`.
double balanced_accuracy(const Labels& predicted, const Labels& truth);

}  // namespace pipemeta

#endif  // PIPEMETA_LEARNERS_HPP_
