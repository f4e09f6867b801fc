// Metadataset construction and the random-forest metamodel that predicts
// whether a preprocessor will match or beat the baseline test accuracy.

#ifndef PIPEMETA_METALEARNING_HPP_
#define PIPEMETA_METALEARNING_HPP_

#include "pipemeta/analytics.hpp"
#include "pipemeta/forest.hpp"
#include "pipemeta/metafeatures.hpp"
#include "pipemeta/runner.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pipemeta {

/// 41 metafeatures followed by the 8-way preprocessor indicator.
inline constexpr Eigen::Index kMetaFeatureWidth = kMetafeatureCount + 8;
/// Pooled models append a 6-way classifier indicator.
inline constexpr Eigen::Index kPooledMetaFeatureWidth = kMetaFeatureWidth + 6;

struct MetaInstance {
  std::string dataset_id;
  ClassifierKind clf = ClassifierKind::RFC;
  MetafeatureVector metafeatures;
  PreprocessorKind preproc = PreprocessorKind::MMS;  // never None
  int label = 0;

  /// The 49 predictive features (55 with the classifier indicator).
  RowVector features(bool with_classifier = false) const;
};

/// One instance per ok preprocessed record whose baseline is ok; the label is
/// 1 iff the pipeline's test accuracy satisfies `label_rule` against the
/// baseline's. Datasets without metafeatures are skipped with a warning.
std::vector<MetaInstance> build_metadataset(const ResultsStore& store, const MetafeatureMap& metafeatures,
                                            Comparator label_rule = Comparator::GreaterEqual,
                                            const std::function<void(const std::string&)>& warn = {});

class Metamodel {
 public:
  struct Prediction {
    int label = 0;
    double score = 0.0;  // fraction of the forest voting "helps"
  };

  /// Random forest with the classifier defaults. With `pooled`, one model
  /// covers every classifier and sees the classifier indicator.
  static Metamodel train(const std::vector<MetaInstance>& instances, std::uint64_t seed, bool pooled = false);

  /// Score >= 0.5 predicts 1.
  Prediction predict(const MetafeatureVector& mf, PreprocessorKind preproc, ClassifierKind clf) const;
  Prediction predict(const MetaInstance& instance) const;

  /// Majority label of the training instances (ties go to 1).
  int mode_label() const { return mode_label_; }
  /// True when training saw fewer than two distinct labels; such a model
  /// predicts its constant label.
  bool degenerate() const { return !forest_.has_value(); }
  bool pooled() const { return pooled_; }
  std::size_t training_size() const { return training_size_; }
  double positive_fraction() const { return positive_fraction_; }

 private:
  std::optional<RandomForest> forest_;
  int mode_label_ = 0;
  bool pooled_ = false;
  std::size_t training_size_ = 0;
  double positive_fraction_ = 0.0;
};

struct MetaEvaluation {
  double accuracy = 0.0;
  double mode_baseline_accuracy = 0.0;
  std::size_t instances = 0;
};

/// Throws std::invalid_argument on an empty holdout.
MetaEvaluation evaluate_metamodel(const Metamodel& model, const std::vector<MetaInstance>& holdout);

/// Partition dataset ids into train and test sides: a seeded shuffle of the
/// sorted ids, floor(ratio * n) to train, at least one id on each side.
/// Throws std::invalid_argument with fewer than two ids.
std::pair<std::vector<std::string>, std::vector<std::string>> split_datasets(std::vector<std::string> ids,
                                                                             double ratio, std::uint64_t seed);

/// One metamodel per base classifier.
class MetamodelSet {
 public:
  static MetamodelSet train(const std::vector<MetaInstance>& instances, std::uint64_t seed, bool pooled = false);
  const Metamodel& for_classifier(ClassifierKind clf) const;
  bool pooled() const { return pooled_; }

 private:
  std::map<ClassifierKind, Metamodel> models_;
  std::optional<Metamodel> shared_;
  bool pooled_ = false;
};

struct MetaReport {
  std::map<ClassifierKind, MetaEvaluation> per_classifier;
  MetaEvaluation overall;
  std::vector<std::string> train_datasets;
  std::vector<std::string> test_datasets;
};

/// Split by dataset, train per-classifier (or pooled) metamodels on the
/// train side and evaluate on the test side.
MetaReport train_and_evaluate(const std::vector<MetaInstance>& instances, std::uint64_t seed, double ratio = 0.7,
                              bool pooled = false);

void write_metadataset_csv(const std::vector<MetaInstance>& instances, const std::filesystem::path& path);
std::vector<MetaInstance> read_metadataset_csv(const std::filesystem::path& path);

}  // namespace pipemeta

#endif  // PIPEMETA_METALEARNING_HPP_
