#include "pipemeta/metafeatures.hpp"

#include "pipemeta/learners.hpp"
#include "pipemeta/runner.hpp"
#include "pipemeta/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace pipemeta {

namespace {

constexpr std::array<std::string_view, kMetafeatureCount> kNames = {
    // simple
    "n_instances", "log2_n_instances", "n_features", "log2_n_features", "n_classes", "n_numeric_raw",
    "n_categorical_raw", "ratio_categorical_numeric", "ratio_numeric_categorical", "dimensionality",
    "log2_dimensionality", "inverse_dimensionality", "log2_inverse_dimensionality", "pct_missing_values",
    "pct_instances_with_missing", "pct_features_with_missing", "minority_class_fraction", "majority_class_fraction",
    // statistical
    "skewness_mean", "skewness_std", "kurtosis_mean", "kurtosis_std", "mean_abs_correlation",
    "pca_first_component_fraction", "mean_coefficient_of_variation", "sparsity",
    // information-theoretic
    "normalized_class_entropy",
    // landmarking
    "lm_1nn_acc", "lm_1nn_bacc", "lm_best_stump_acc", "lm_best_stump_bacc", "lm_random_stump_acc",
    "lm_random_stump_bacc", "lm_worst_stump_acc", "lm_worst_stump_bacc", "lm_gnb_acc", "lm_gnb_bacc",
    "lm_nearest_centroid_acc", "lm_nearest_centroid_bacc", "lm_majority_acc", "lm_majority_bacc"};

constexpr int kFolds = 5;
constexpr Eigen::Index kMaxCorrelationFeatures = 50;

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(v.size()));
  return out;
}

enum class StumpChoice { Best, Random, Worst };

/// A landmarker: fit on the training fold, predict the held-out fold.
using Landmarker = std::function<Labels(const Matrix&, const Labels&, const Matrix&, int, Rng&)>;

Labels stump_landmark(const Matrix& X, const Labels& y, const Matrix& Xt, int n_classes, Rng& rng, StumpChoice how) {
  if (how == StumpChoice::Random) {
    DecisionStump stump;
    stump.fit(X, y, n_classes, static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(X.cols()))));
    return stump.predict(Xt);
  }
  DecisionStump chosen;
  bool have = false;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    DecisionStump stump;
    stump.fit(X, y, n_classes, j);
    const bool better = how == StumpChoice::Best ? stump.impurity() < chosen.impurity()
                                                 : stump.impurity() > chosen.impurity();
    if (!have || better) {
      chosen = stump;
      have = true;
    }
  }
  return chosen.predict(Xt);
}

std::array<Landmarker, 7> landmarkers() {
  return {
      [](const Matrix& X, const Labels& y, const Matrix& Xt, int k, Rng&) {
        KNearestNeighbors nn(1);
        nn.fit(X, y, k);
        return nn.predict(Xt);
      },
      [](const Matrix& X, const Labels& y, const Matrix& Xt, int k, Rng& rng) {
        return stump_landmark(X, y, Xt, k, rng, StumpChoice::Best);
      },
      [](const Matrix& X, const Labels& y, const Matrix& Xt, int k, Rng& rng) {
        return stump_landmark(X, y, Xt, k, rng, StumpChoice::Random);
      },
      [](const Matrix& X, const Labels& y, const Matrix& Xt, int k, Rng& rng) {
        return stump_landmark(X, y, Xt, k, rng, StumpChoice::Worst);
      },
      [](const Matrix& X, const Labels& y, const Matrix& Xt, int k, Rng&) {
        GaussianNaiveBayes gnb;
        gnb.fit(X, y, k);
        return gnb.predict(Xt);
      },
      [](const Matrix& X, const Labels& y, const Matrix& Xt, int k, Rng&) {
        NearestCentroid nc;
        nc.fit(X, y, k);
        return nc.predict(Xt);
      },
      [](const Matrix&, const Labels& y, const Matrix& Xt, int k, Rng&) {
        RowVector counts = RowVector::Zero(k);
        for (Eigen::Index i = 0; i < y.size(); ++i) counts(y(i)) += 1.0;
        return Labels(Labels::Constant(Xt.rows(), static_cast<int>(argmax_lowest(counts))));
      },
  };
}

void fill_simple(MetafeatureVector& mf, const RawDataset& raw, const CleanDataset& train, const Vector& class_counts) {
  const auto m = static_cast<double>(train.rows());
  const auto n = static_cast<double>(train.cols());
  double numeric = 0, categorical = 0;
  for (const auto& c : raw.columns) (c.kind == ColumnKind::Numeric ? numeric : categorical) += 1;

  std::size_t rows_with_missing = 0;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    for (const auto& c : raw.columns) {
      if (c.missing[r]) {
        ++rows_with_missing;
        break;
      }
    }
  }
  std::size_t cols_with_missing = 0;
  for (const auto& c : raw.columns) cols_with_missing += c.missing_count() > 0;
  const double cells = static_cast<double>(raw.rows() * raw.columns.size());

  std::size_t i = 0;
  mf[i++] = m;
  mf[i++] = std::log2(m);
  mf[i++] = n;
  mf[i++] = std::log2(n);
  mf[i++] = static_cast<double>((class_counts.array() > 0).count());
  mf[i++] = numeric;
  mf[i++] = categorical;
  mf[i++] = numeric > 0 ? categorical / numeric : 0.0;
  mf[i++] = categorical > 0 ? numeric / categorical : 0.0;
  mf[i++] = n / m;
  mf[i++] = std::log2(n / m);
  mf[i++] = m / n;
  mf[i++] = std::log2(m / n);
  mf[i++] = cells > 0 ? static_cast<double>(raw.missing_cells()) / cells : 0.0;
  mf[i++] = raw.rows() > 0 ? static_cast<double>(rows_with_missing) / static_cast<double>(raw.rows()) : 0.0;
  mf[i++] = raw.columns.empty() ? 0.0 : static_cast<double>(cols_with_missing) / static_cast<double>(raw.columns.size());
  double minority = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < class_counts.size(); ++c) {
    if (class_counts(c) > 0) minority = std::min(minority, class_counts(c));
  }
  mf[i++] = minority / m;
  mf[i++] = class_counts.maxCoeff() / m;
}

void fill_statistical(MetafeatureVector& mf, const Matrix& X, std::uint64_t seed) {
  std::vector<double> skew, kurt;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    skew.push_back(stats::skewness(X.col(j)));
    kurt.push_back(stats::excess_kurtosis(X.col(j)));
  }
  const auto s = mean_std(skew);
  const auto k = mean_std(kurt);

  std::vector<Eigen::Index> cols(static_cast<std::size_t>(X.cols()));
  std::iota(cols.begin(), cols.end(), Eigen::Index{0});
  if (X.cols() > kMaxCorrelationFeatures) {
    Rng rng(derive_seed(seed, "correlation"));
    shuffle(cols, rng);
    cols.resize(static_cast<std::size_t>(kMaxCorrelationFeatures));
    std::sort(cols.begin(), cols.end());
  }
  double corr_sum = 0.0;
  std::size_t corr_pairs = 0;
  for (std::size_t a = 0; a < cols.size(); ++a) {
    for (std::size_t b = a + 1; b < cols.size(); ++b) {
      corr_sum += std::abs(stats::pearson(X.col(cols[a]), X.col(cols[b])));
      ++corr_pairs;
    }
  }

  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(stats::covariance(X), Eigen::EigenvaluesOnly).eigenvalues();
  const double trace = eig.cwiseMax(0.0).sum();

  const RowVector means = stats::column_means(X);
  const RowVector sds = stats::column_variances(X).cwiseSqrt();
  double cv = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) cv += sds(j) / std::max(std::abs(means(j)), 1e-12);

  std::size_t i = kSimpleMetafeatures;
  mf[i++] = s.mean;
  mf[i++] = s.std;
  mf[i++] = k.mean;
  mf[i++] = k.std;
  mf[i++] = corr_pairs > 0 ? corr_sum / static_cast<double>(corr_pairs) : 0.0;
  mf[i++] = trace > 0.0 ? std::max(eig.maxCoeff(), 0.0) / trace : 0.0;
  mf[i++] = X.cols() > 0 ? cv / static_cast<double>(X.cols()) : 0.0;
  mf[i++] = X.size() > 0 ? static_cast<double>((X.array() == 0.0).count()) / static_cast<double>(X.size()) : 0.0;
}

void fill_landmarks(MetafeatureVector& mf, const Matrix& X, const Labels& y, int n_classes, std::uint64_t seed) {
  const auto folds = landmark_folds(y, kFolds, derive_seed(seed, "folds"));
  const int n_folds = *std::max_element(folds.begin(), folds.end()) + 1;
  std::vector<IndexList> train_rows(static_cast<std::size_t>(n_folds)), test_rows(static_cast<std::size_t>(n_folds));
  for (std::size_t r = 0; r < folds.size(); ++r) {
    for (int f = 0; f < n_folds; ++f) {
      (folds[r] == f ? test_rows : train_rows)[static_cast<std::size_t>(f)].push_back(static_cast<Eigen::Index>(r));
    }
  }

  const auto learners = landmarkers();
  std::size_t i = kSimpleMetafeatures + kStatisticalMetafeatures + kInformationMetafeatures;
  for (std::size_t l = 0; l < learners.size(); ++l) {
    Rng rng(derive_seed(seed, "landmarker", static_cast<std::uint64_t>(l)));
    Labels predicted(y.size());
    for (int f = 0; f < n_folds; ++f) {
      const auto& tr = train_rows[static_cast<std::size_t>(f)];
      const auto& te = test_rows[static_cast<std::size_t>(f)];
      if (te.empty()) continue;
      const Labels out = learners[l](take_rows(X, tr), take_rows(y, tr), take_rows(X, te), n_classes, rng);
      for (std::size_t t = 0; t < te.size(); ++t) predicted(te[t]) = out(static_cast<Eigen::Index>(t));
    }
    mf[i++] = accuracy(predicted, y);
    mf[i++] = balanced_accuracy(predicted, y);
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

const std::array<std::string_view, kMetafeatureCount>& MetafeatureVector::names() { return kNames; }

std::size_t MetafeatureVector::index_of(std::string_view name) {
  const auto it = std::find(kNames.begin(), kNames.end(), name);
  if (it == kNames.end()) throw std::out_of_range("unknown metafeature '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - kNames.begin());
}

bool MetafeatureVector::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::vector<int> landmark_folds(const Labels& y, int k, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (Eigen::Index i = 0; i < y.size(); ++i) by_class[y(i)].push_back(static_cast<std::size_t>(i));
  std::vector<int> folds(static_cast<std::size_t>(y.size()));
  bool leave_one_out = false;
  for (const auto& [label, rows] : by_class) leave_one_out |= rows.size() < static_cast<std::size_t>(k);
  if (leave_one_out) {
    std::iota(folds.begin(), folds.end(), 0);
    return folds;
  }
  // Round-robin over shuffled class members, continuing the rotation across
  // classes so fold sizes stay balanced.
  int next = 0;
  for (auto& [label, rows] : by_class) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(label))));
    shuffle(rows, rng);
    for (auto r : rows) {
      folds[r] = next;
      next = (next + 1) % k;
    }
  }
  return folds;
}

MetafeatureVector extract(const RawDataset& raw, const CleanDataset& clean_train, std::uint64_t seed) {
  if (clean_train.rows() == 0) throw std::invalid_argument("metafeature extraction needs a nonempty train partition");
  const int n_classes = clean_train.y.maxCoeff() + 1;
  if (clean_train.y.minCoeff() < 0) throw std::invalid_argument("train partition has unencoded labels");
  Vector class_counts = Vector::Zero(n_classes);
  for (Eigen::Index i = 0; i < clean_train.y.size(); ++i) class_counts(clean_train.y(i)) += 1.0;
  if ((class_counts.array() > 0).count() < 2) {
    throw std::invalid_argument(clean_train.id + ": metafeatures need at least two classes in the train partition");
  }

  MetafeatureVector mf;
  fill_simple(mf, raw, clean_train, class_counts);
  fill_statistical(mf, clean_train.X, seed);

  double entropy = 0.0;
  const double m = static_cast<double>(clean_train.rows());
  for (Eigen::Index c = 0; c < n_classes; ++c) {
    if (class_counts(c) > 0) entropy -= (class_counts(c) / m) * std::log2(class_counts(c) / m);
  }
  mf[kSimpleMetafeatures + kStatisticalMetafeatures] = entropy / std::log2(static_cast<double>((class_counts.array() > 0).count()));

  fill_landmarks(mf, clean_train.X, clean_train.y, n_classes, seed);
  return mf;
}

MetafeatureVector extract_for_run(const RawDataset& raw, std::uint64_t run_seed, CleanMode mode, double split_ratio) {
  const auto seed = dataset_seed(run_seed, raw.id);
  const auto task = prepare(raw, seed, mode, split_ratio);
  return extract(raw, task.clean.subset(task.split.train_idx), derive_seed(seed, "metafeatures"));
}

void write_metafeatures_csv(const MetafeatureMap& features, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "dataset_id";
  for (auto name : kNames) out << ',' << name;
  out << '\n';
  for (const auto& [id, mf] : features) {
    out << id;
    for (double v : mf.values) out << ',' << format_double(v);
    out << '\n';
  }
}

MetafeatureMap read_metafeatures_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metafeatures file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty metafeatures file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() != kMetafeatureCount + 1 || header[0] != "dataset_id") {
    throw std::runtime_error(path.string() + ": expected dataset_id plus 41 metafeature columns");
  }
  std::vector<std::size_t> slot(kMetafeatureCount);
  for (std::size_t c = 0; c < kMetafeatureCount; ++c) slot[c] = MetafeatureVector::index_of(header[c + 1]);

  MetafeatureMap out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const std::string id = cell;
    MetafeatureVector mf;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= kMetafeatureCount) break;
      mf[slot[c++]] = std::stod(cell);
    }
    if (c != kMetafeatureCount) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) + " has too few values");
    }
    out[id] = mf;
  }
  return out;
}

}  // namespace pipemeta
