#include "pipemeta/learners.hpp"

#include "pipemeta/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

namespace pipemeta {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<const char*, 6> kNames = {"RFC", "LR", "KNN", "Per", "SVC", "GNB"};

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

int binary_models(int n_classes) { return n_classes == 2 ? 1 : n_classes; }

/// +1 when row i belongs to the model's positive class, -1 otherwise.
Vector signs_for(const Labels& y, int n_classes, int model) {
  const int positive = n_classes == 2 ? 1 : model;
  Vector s(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) s(i) = y(i) == positive ? 1.0 : -1.0;
  return s;
}

Labels decide_one_vs_rest(const Matrix& scores, int n_classes) {
  Labels out(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out(i) = n_classes == 2 ? (scores(i, 0) > 0.0 ? 1 : 0) : static_cast<int>(argmax_lowest(scores.row(i)));
  }
  return out;
}

int majority_label(const Vector& counts) {
  return static_cast<int>(argmax_lowest(counts.transpose()));
}

void require_width(const Matrix& X, Eigen::Index expected, const char* who) {
  if (X.cols() != expected) {
    throw ShapeError(std::string(who) + " expects " + std::to_string(expected) + " features, got " +
                     std::to_string(X.cols()));
  }
}

}  // namespace

std::string to_string(ClassifierKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<ClassifierKind> parse_classifier(const std::string& name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (name == kNames[i]) return static_cast<ClassifierKind>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Logistic regression

void LogisticRegression::fit(const Matrix& X, const Labels& y, int n_classes) {
  n_classes_ = n_classes;
  const Eigen::Index m = X.rows();
  const Eigen::Index n = X.cols();
  Matrix A(m, n + 1);
  A.leftCols(n) = X;
  A.col(n).setOnes();

  // Lipschitz constant of the gradient: 1 (penalty) + C/4 * largest
  // eigenvalue of A^T A, taken from whichever Gram matrix is smaller.
  const Matrix gram = m <= n + 1 ? Matrix(A * A.transpose()) : Matrix(A.transpose() * A);
  const double top = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double lipschitz = 1.0 + 0.25 * kC * std::max(top, 0.0);

  const int models = binary_models(n_classes);
  weights_.resize(n, models);
  bias_.resize(models);

  for (int k = 0; k < models; ++k) {
    const Vector s = signs_for(y, n_classes, k);
    auto gradient = [&](const Vector& theta) {
      const Vector z = A * theta;
      Vector r(m);
      for (Eigen::Index i = 0; i < m; ++i) r(i) = -kC * s(i) * sigmoid(-s(i) * z(i));
      Vector g = A.transpose() * r;
      g.head(n) += theta.head(n);
      return g;
    };
    Vector theta = Vector::Zero(n + 1);
    Vector look = theta;
    double t = 1.0;
    for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
      const Vector next = look - gradient(look) / lipschitz;
      const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
      look = next + ((t - 1.0) / t_next) * (next - theta);
      theta = next;
      t = t_next;
      if (gradient(theta).cwiseAbs().maxCoeff() <= kTolerance) break;
    }
    weights_.col(k) = theta.head(n);
    bias_(k) = theta(n);
  }
}

Matrix LogisticRegression::decision_function(const Matrix& X) const {
  require_width(X, weights_.rows(), "LR");
  return (X * weights_).rowwise() + bias_;
}

Labels LogisticRegression::predict(const Matrix& X) const { return decide_one_vs_rest(decision_function(X), n_classes_); }

// ---------------------------------------------------------------------------
// k-nearest neighbours

void KNearestNeighbors::fit(const Matrix& X, const Labels& y, int n_classes) {
  X_ = X;
  y_ = y;
  n_classes_ = n_classes;
}

Labels KNearestNeighbors::predict(const Matrix& X) const {
  require_width(X, X_.cols(), "KNN");
  const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(k_, X_.rows()));
  Labels out(X.rows());
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(X_.rows()));
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    for (Eigen::Index r = 0; r < X_.rows(); ++r) dist[static_cast<std::size_t>(r)] = {(X_.row(r) - X.row(q)).squaredNorm(), r};
    // Pairs order by distance, then by training row index.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    RowVector votes = RowVector::Zero(n_classes_);
    for (std::size_t i = 0; i < k; ++i) votes(y_(dist[i].second)) += 1.0;
    out(q) = static_cast<int>(argmax_lowest(votes));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perceptron

void Perceptron::fit(const Matrix& X, const Labels& y, int n_classes, std::uint64_t seed) {
  n_classes_ = n_classes;
  const int models = binary_models(n_classes);
  weights_ = Matrix::Zero(X.cols(), models);
  bias_ = RowVector::Zero(models);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(X.rows()));
  for (int k = 0; k < models; ++k) {
    const Vector s = signs_for(y, n_classes, k);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto w = weights_.col(k);
    double& b = bias_(k);
    for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
      shuffle(order, rng);
      int mistakes = 0;
      for (auto i : order) {
        const double z = X.row(i).dot(w) + b;
        if (s(i) * z <= 0.0) {
          w += kLearningRate * s(i) * X.row(i).transpose();
          b += kLearningRate * s(i);
          ++mistakes;
        }
      }
      if (mistakes == 0) break;
    }
  }
}

Labels Perceptron::predict(const Matrix& X) const {
  require_width(X, weights_.rows(), "Per");
  const Matrix scores = (X * weights_).rowwise() + bias_;
  return decide_one_vs_rest(scores, n_classes_);
}

// ---------------------------------------------------------------------------
// Support vector classifier

namespace {

Matrix rbf_kernel(const Matrix& A, const Matrix& B, double gamma) {
  const Vector a2 = A.rowwise().squaredNorm();
  const Vector b2 = B.rowwise().squaredNorm();
  Matrix d = (-2.0 * A * B.transpose()).colwise() + a2;
  d.rowwise() += b2.transpose();
  return (-gamma * d.cwiseMax(0.0)).array().exp().matrix();
}

struct SmoSolution {
  Vector alpha;
  double rho = 0.0;
  int iterations = 0;
};

// Dual C-SVM: minimise 0.5 a'Qa - e'a subject to 0 <= a <= C and y'a = 0,
// with Q_ij = y_i y_j K_ij. Working sets follow the second-order rule.
SmoSolution solve_smo(const Matrix& K, const Vector& y, double C, double eps) {
  constexpr double kTau = 1e-12;
  const Eigen::Index l = K.rows();
  Vector alpha = Vector::Zero(l);
  Vector G = Vector::Constant(l, -1.0);
  const Vector QD = K.diagonal();
  auto Q = [&](Eigen::Index i, Eigen::Index j) { return y(i) * y(j) * K(i, j); };
  auto is_upper = [&](Eigen::Index i) { return alpha(i) >= C; };
  auto is_lower = [&](Eigen::Index i) { return alpha(i) <= 0.0; };

  const long max_iter = std::max<long>(100000, 100 * static_cast<long>(l));
  int iter = 0;
  while (iter < max_iter) {
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < l; ++t) {
      if (y(t) > 0) {
        if (!is_upper(t) && -G(t) >= g_max) {
          g_max = -G(t);
          i = t;
        }
      } else if (!is_lower(t) && G(t) >= g_max) {
        g_max = G(t);
        i = t;
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < l && i >= 0; ++t) {
      if (y(t) > 0) {
        if (is_lower(t)) continue;
        const double grad_diff = g_max + G(t);
        g_max2 = std::max(g_max2, G(t));
        if (grad_diff > 0) {
          double quad = QD(i) + QD(t) - 2.0 * y(i) * Q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      } else {
        if (is_upper(t)) continue;
        const double grad_diff = g_max - G(t);
        g_max2 = std::max(g_max2, -G(t));
        if (grad_diff > 0) {
          double quad = QD(i) + QD(t) + 2.0 * y(i) * Q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    if (i < 0 || j < 0 || g_max + g_max2 < eps) break;
    ++iter;

    const double old_ai = alpha(i);
    const double old_aj = alpha(j);
    double& ai = alpha(i);
    double& aj = alpha(j);
    if (y(i) != y(j)) {
      double quad = QD(i) + QD(j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-G(i) - G(j)) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) {
          aj = 0;
          ai = diff;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > C) {
          ai = C;
          aj = C - diff;
        }
      } else if (aj > C) {
        aj = C;
        ai = C + diff;
      }
    } else {
      double quad = QD(i) + QD(j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (G(i) - G(j)) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) {
          ai = C;
          aj = sum - C;
        }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > C) {
        if (aj > C) {
          aj = C;
          ai = sum - C;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    const double d_i = ai - old_ai;
    const double d_j = aj - old_aj;
    for (Eigen::Index t = 0; t < l; ++t) G(t) += Q(t, i) * d_i + Q(t, j) * d_j;
  }

  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < l; ++t) {
    const double yg = y(t) * G(t);
    if (is_upper(t)) {
      if (y(t) < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (is_lower(t)) {
      if (y(t) > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
  }
  SmoSolution out;
  out.alpha = alpha;
  out.rho = n_free > 0 ? free_sum / n_free : (upper + lower) / 2.0;
  out.iterations = iter;
  return out;
}

}  // namespace

void SupportVectorClassifier::fit(const Matrix& X, const Labels& y, int n_classes) {
  n_classes_ = n_classes;
  gamma_ = 1.0 / static_cast<double>(std::max<Eigen::Index>(1, X.cols()));
  std::vector<IndexList> members(static_cast<std::size_t>(n_classes));
  for (Eigen::Index i = 0; i < y.size(); ++i) members[static_cast<std::size_t>(y(i))].push_back(i);

  machines_.clear();
  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b) {
      IndexList rows = members[static_cast<std::size_t>(a)];
      rows.insert(rows.end(), members[static_cast<std::size_t>(b)].begin(), members[static_cast<std::size_t>(b)].end());
      std::sort(rows.begin(), rows.end());
      check_dense_budget(rows.size(), rows.size(), "SVC kernel matrix");
      const Matrix sub = take_rows(X, rows);
      Vector signs(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) signs(static_cast<Eigen::Index>(r)) = y(rows[r]) == a ? 1.0 : -1.0;

      const auto solution = solve_smo(rbf_kernel(sub, sub, gamma_), signs, kC, kTolerance);
      BinaryMachine machine;
      machine.positive = a;
      machine.negative = b;
      machine.rho = solution.rho;
      machine.iterations = solution.iterations;
      IndexList support;
      for (Eigen::Index r = 0; r < solution.alpha.size(); ++r) {
        if (solution.alpha(r) > 0.0) support.push_back(r);
      }
      machine.support = take_rows(sub, support);
      machine.coef.resize(static_cast<Eigen::Index>(support.size()));
      for (std::size_t s = 0; s < support.size(); ++s) {
        machine.coef(static_cast<Eigen::Index>(s)) = solution.alpha(support[s]) * signs(support[s]);
      }
      machines_.push_back(std::move(machine));
    }
  }
}

Labels SupportVectorClassifier::predict(const Matrix& X) const {
  Matrix votes = Matrix::Zero(X.rows(), n_classes_);
  for (const auto& machine : machines_) {
    require_width(X, machine.support.cols(), "SVC");
    Vector decision = Vector::Constant(X.rows(), -machine.rho);
    if (machine.support.rows() > 0) decision += rbf_kernel(X, machine.support, gamma_) * machine.coef;
    for (Eigen::Index i = 0; i < X.rows(); ++i) votes(i, decision(i) > 0.0 ? machine.positive : machine.negative) += 1.0;
  }
  Labels out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = static_cast<int>(argmax_lowest(votes.row(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

void GaussianNaiveBayes::fit(const Matrix& X, const Labels& y, int n_classes) {
  double smoothing = kVarianceSmoothing * (X.rows() > 0 ? stats::column_variances(X).maxCoeff() : 0.0);
  // All-constant input has no variance scale; fall back to an absolute floor.
  if (!(smoothing > 0.0)) smoothing = kVarianceSmoothing;

  means_ = Matrix::Zero(n_classes, X.cols());
  variances_ = Matrix::Zero(n_classes, X.cols());
  log_prior_ = Vector::Zero(n_classes);
  std::vector<IndexList> members(static_cast<std::size_t>(n_classes));
  for (Eigen::Index i = 0; i < y.size(); ++i) members[static_cast<std::size_t>(y(i))].push_back(i);
  for (int c = 0; c < n_classes; ++c) {
    const auto& rows = members[static_cast<std::size_t>(c)];
    if (rows.empty()) {
      log_prior_(c) = -std::numeric_limits<double>::infinity();
      variances_.row(c).setConstant(smoothing);
      continue;
    }
    const Matrix part = take_rows(X, rows);
    means_.row(c) = stats::column_means(part);
    variances_.row(c) = stats::column_variances(part).array() + smoothing;
    log_prior_(c) = std::log(static_cast<double>(rows.size()) / static_cast<double>(y.size()));
  }
}

Matrix GaussianNaiveBayes::joint_log_likelihood(const Matrix& X) const {
  require_width(X, means_.cols(), "GNB");
  Matrix out(X.rows(), means_.rows());
  for (Eigen::Index c = 0; c < means_.rows(); ++c) {
    const double norm = -0.5 * (2.0 * std::numbers::pi * variances_.row(c).array()).log().sum();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double quad = ((X.row(i) - means_.row(c)).array().square() / variances_.row(c).array()).sum();
      out(i, c) = log_prior_(c) + norm - 0.5 * quad;
    }
  }
  return out;
}

Labels GaussianNaiveBayes::predict(const Matrix& X) const {
  const Matrix jll = joint_log_likelihood(X);
  Labels out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = static_cast<int>(argmax_lowest(jll.row(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Landmarking primitives

void NearestCentroid::fit(const Matrix& X, const Labels& y, int n_classes) {
  centroids_ = Matrix::Zero(n_classes, X.cols());
  Vector counts = Vector::Zero(n_classes);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    centroids_.row(y(i)) += X.row(i);
    counts(y(i)) += 1.0;
  }
  present_.assign(static_cast<std::size_t>(n_classes), false);
  for (int c = 0; c < n_classes; ++c) {
    if (counts(c) > 0.0) {
      centroids_.row(c) /= counts(c);
      present_[static_cast<std::size_t>(c)] = true;
    }
  }
}

Labels NearestCentroid::predict(const Matrix& X) const {
  require_width(X, centroids_.cols(), "nearest centroid");
  Labels out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int label = 0;
    for (Eigen::Index c = 0; c < centroids_.rows(); ++c) {
      if (!present_[static_cast<std::size_t>(c)]) continue;
      const double d = (X.row(i) - centroids_.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        label = static_cast<int>(c);
      }
    }
    out(i) = label;
  }
  return out;
}

void DecisionStump::fit(const Matrix& X, const Labels& y, int n_classes, Eigen::Index feature) {
  feature_ = feature;
  IndexList rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  Vector counts = Vector::Zero(n_classes);
  for (Eigen::Index i = 0; i < y.size(); ++i) counts(y(i)) += 1.0;

  const auto split = best_gini_split(X, y, rows, feature, n_classes);
  split_ = split.valid;
  if (!split_) {
    left_class_ = right_class_ = majority_label(counts);
    impurity_ = gini_impurity(counts);
    return;
  }
  threshold_ = split.threshold;
  impurity_ = split.impurity;
  Vector left = Vector::Zero(n_classes);
  Vector right = Vector::Zero(n_classes);
  for (Eigen::Index i = 0; i < X.rows(); ++i) (X(i, feature) <= threshold_ ? left : right)(y(i)) += 1.0;
  left_class_ = majority_label(left);
  right_class_ = majority_label(right);
}

Labels DecisionStump::predict(const Matrix& X) const {
  Labels out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out(i) = !split_ || X(i, feature_) <= threshold_ ? left_class_ : right_class_;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uniform contract

ForestParams default_forest_params() { return ForestParams{10, true, 0}; }

Labels TrainedModel::predict(const Matrix& X) const {
  require_width(X, n_features_, to_string(kind_).c_str());
  if (X.rows() == 0) return Labels(0);
  const Labels dense = std::visit(
      overloaded{
          [&](const Constant& c) -> Labels { return Labels::Constant(X.rows(), c.label); },
          [&](const auto& model) -> Labels { return model.predict(X); },
      },
      state_);
  Labels out(dense.size());
  for (Eigen::Index i = 0; i < dense.size(); ++i) out(i) = classes_[static_cast<std::size_t>(dense(i))];
  return out;
}

TrainedModel train(ClassifierKind kind, const Matrix& X, const Labels& y, std::uint64_t seed) {
  if (X.rows() == 0) throw ShapeError("cannot train on zero rows");
  if (y.size() != X.rows()) throw ShapeError("label count does not match row count");
  if (!X.allFinite()) throw std::invalid_argument("classifier input contains non-finite values");

  const std::set<int> distinct(y.data(), y.data() + y.size());
  std::vector<int> classes(distinct.begin(), distinct.end());
  std::map<int, int> index_of;
  for (std::size_t c = 0; c < classes.size(); ++c) index_of[classes[c]] = static_cast<int>(c);
  Labels dense(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) dense(i) = index_of[y(i)];
  const int n_classes = static_cast<int>(classes.size());

  if (n_classes == 1) return {kind, std::move(classes), X.cols(), TrainedModel::Constant{0}};

  switch (kind) {
    case ClassifierKind::RFC: {
      RandomForest forest;
      forest.fit(X, dense, n_classes, default_forest_params(), seed);
      return {kind, std::move(classes), X.cols(), std::move(forest)};
    }
    case ClassifierKind::LR: {
      LogisticRegression lr;
      lr.fit(X, dense, n_classes);
      return {kind, std::move(classes), X.cols(), std::move(lr)};
    }
    case ClassifierKind::KNN: {
      KNearestNeighbors knn(5);
      knn.fit(X, dense, n_classes);
      return {kind, std::move(classes), X.cols(), std::move(knn)};
    }
    case ClassifierKind::Per: {
      Perceptron per;
      per.fit(X, dense, n_classes, seed);
      return {kind, std::move(classes), X.cols(), std::move(per)};
    }
    case ClassifierKind::SVC: {
      SupportVectorClassifier svc;
      svc.fit(X, dense, n_classes);
      return {kind, std::move(classes), X.cols(), std::move(svc)};
    }
    case ClassifierKind::GNB: {
      GaussianNaiveBayes gnb;
      gnb.fit(X, dense, n_classes);
      return {kind, std::move(classes), X.cols(), std::move(gnb)};
    }
  }
  throw std::invalid_argument("unknown classifier kind");
}

double accuracy(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (truth.size() == 0) throw std::invalid_argument("accuracy: empty vectors");
  return static_cast<double>((predicted.array() == truth.array()).count()) / static_cast<double>(truth.size());
}

double balanced_accuracy(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("balanced_accuracy: length mismatch");
  if (truth.size() == 0) throw std::invalid_argument("balanced_accuracy: empty vectors");
  std::map<int, std::pair<int, int>> per_class;  // hits, total
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    auto& [hits, total] = per_class[truth(i)];
    ++total;
    if (predicted(i) == truth(i)) ++hits;
  }
  double sum = 0.0;
  for (const auto& [label, tally] : per_class) sum += static_cast<double>(tally.first) / tally.second;
  return sum / static_cast<double>(per_class.size());
}

}  // namespace pipemeta
