#include "pipemeta/metalearning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pipemeta {

RowVector MetaInstance::features(bool with_classifier) const {
  RowVector f = RowVector::Zero(with_classifier ? kPooledMetaFeatureWidth : kMetaFeatureWidth);
  for (std::size_t i = 0; i < kMetafeatureCount; ++i) f(static_cast<Eigen::Index>(i)) = metafeatures[i];
  const auto slot = preprocessor_slot(preproc);
  if (!slot) throw std::invalid_argument("meta instance has no preprocessor");
  f(static_cast<Eigen::Index>(kMetafeatureCount + *slot)) = 1.0;
  if (with_classifier) f(kMetaFeatureWidth + static_cast<Eigen::Index>(clf)) = 1.0;
  return f;
}

std::vector<MetaInstance> build_metadataset(const ResultsStore& store, const MetafeatureMap& metafeatures,
                                            Comparator label_rule,
                                            const std::function<void(const std::string&)>& warn) {
  std::vector<MetaInstance> out;
  std::set<std::string> warned;
  for (const auto& pair : baseline_pairs(store)) {
    const auto& spec = pair.pipeline->spec;
    const auto it = metafeatures.find(spec.dataset_id);
    if (it == metafeatures.end()) {
      if (warned.insert(spec.dataset_id).second && warn) {
        warn("no metafeatures for dataset " + spec.dataset_id + "; skipping its records");
      }
      continue;
    }
    MetaInstance inst;
    inst.dataset_id = spec.dataset_id;
    inst.clf = spec.clf;
    inst.metafeatures = it->second;
    inst.preproc = spec.preproc;
    inst.label = improves(*pair.pipeline->test_acc, *pair.baseline->test_acc, label_rule) ? 1 : 0;
    out.push_back(std::move(inst));
  }
  return out;
}

Metamodel Metamodel::train(const std::vector<MetaInstance>& instances, std::uint64_t seed, bool pooled) {
  Metamodel m;
  m.pooled_ = pooled;
  m.training_size_ = instances.size();
  const auto n = static_cast<Eigen::Index>(instances.size());
  std::size_t positives = 0;
  for (const auto& inst : instances) positives += inst.label == 1;
  m.positive_fraction_ = n > 0 ? static_cast<double>(positives) / static_cast<double>(n) : 0.0;
  m.mode_label_ = n > 0 && 2 * positives >= instances.size() ? 1 : 0;
  if (positives == 0 || positives == instances.size()) return m;

  Matrix X(n, pooled ? kPooledMetaFeatureWidth : kMetaFeatureWidth);
  Labels y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& inst = instances[static_cast<std::size_t>(i)];
    X.row(i) = inst.features(pooled);
    y(i) = inst.label;
  }
  RandomForest forest;
  forest.fit(X, y, 2, default_forest_params(), seed);
  m.forest_ = std::move(forest);
  return m;
}

Metamodel::Prediction Metamodel::predict(const MetafeatureVector& mf, PreprocessorKind preproc,
                                         ClassifierKind clf) const {
  if (!forest_) return {mode_label_, static_cast<double>(mode_label_)};
  MetaInstance inst;
  inst.metafeatures = mf;
  inst.preproc = preproc;
  inst.clf = clf;
  const Matrix x = inst.features(pooled_);
  const double score = forest_->predict_proba(x)(0, 1);
  return {score >= 0.5 ? 1 : 0, score};
}

Metamodel::Prediction Metamodel::predict(const MetaInstance& instance) const {
  return predict(instance.metafeatures, instance.preproc, instance.clf);
}

MetaEvaluation evaluate_metamodel(const Metamodel& model, const std::vector<MetaInstance>& holdout) {
  if (holdout.empty()) throw std::invalid_argument("cannot evaluate a metamodel on an empty holdout");
  std::size_t hits = 0, mode_hits = 0;
  for (const auto& inst : holdout) {
    hits += model.predict(inst).label == inst.label;
    mode_hits += model.mode_label() == inst.label;
  }
  const double n = static_cast<double>(holdout.size());
  return {static_cast<double>(hits) / n, static_cast<double>(mode_hits) / n, holdout.size()};
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_datasets(std::vector<std::string> ids,
                                                                             double ratio, std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw std::invalid_argument("need at least two datasets to split train and test");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must be in (0, 1)");
  Rng rng(derive_seed(seed, "dataset-split"));
  shuffle(ids, rng);
  auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ids.size()) + 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
  std::vector<std::string> train(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::string> test(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

MetamodelSet MetamodelSet::train(const std::vector<MetaInstance>& instances, std::uint64_t seed, bool pooled) {
  MetamodelSet set;
  set.pooled_ = pooled;
  if (pooled) {
    set.shared_ = Metamodel::train(instances, derive_seed(seed, "metamodel", "pooled"), true);
    return set;
  }
  for (const auto clf : kAllClassifiers) {
    std::vector<MetaInstance> subset;
    for (const auto& inst : instances) {
      if (inst.clf == clf) subset.push_back(inst);
    }
    set.models_.emplace(clf, Metamodel::train(subset, derive_seed(seed, "metamodel", to_string(clf))));
  }
  return set;
}

const Metamodel& MetamodelSet::for_classifier(ClassifierKind clf) const {
  if (shared_) return *shared_;
  return models_.at(clf);
}

MetaReport train_and_evaluate(const std::vector<MetaInstance>& instances, std::uint64_t seed, double ratio,
                              bool pooled) {
  std::vector<std::string> ids;
  for (const auto& inst : instances) ids.push_back(inst.dataset_id);
  MetaReport report;
  std::tie(report.train_datasets, report.test_datasets) = split_datasets(ids, ratio, seed);
  const std::set<std::string> train_ids(report.train_datasets.begin(), report.train_datasets.end());

  std::vector<MetaInstance> train, test;
  for (const auto& inst : instances) (train_ids.count(inst.dataset_id) ? train : test).push_back(inst);
  const auto models = MetamodelSet::train(train, seed, pooled);

  std::size_t hits = 0, mode_hits = 0;
  for (const auto clf : kAllClassifiers) {
    std::vector<MetaInstance> holdout;
    for (const auto& inst : test) {
      if (inst.clf == clf) holdout.push_back(inst);
    }
    if (holdout.empty()) continue;
    const auto eval = evaluate_metamodel(models.for_classifier(clf), holdout);
    report.per_classifier[clf] = eval;
    hits += static_cast<std::size_t>(std::llround(eval.accuracy * static_cast<double>(eval.instances)));
    mode_hits += static_cast<std::size_t>(std::llround(eval.mode_baseline_accuracy * static_cast<double>(eval.instances)));
  }
  report.overall.instances = test.size();
  if (!test.empty()) {
    report.overall.accuracy = static_cast<double>(hits) / static_cast<double>(test.size());
    report.overall.mode_baseline_accuracy = static_cast<double>(mode_hits) / static_cast<double>(test.size());
  }
  return report;
}

void write_metadataset_csv(const std::vector<MetaInstance>& instances, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metadataset " + path.string());
  out << "dataset_id,clf";
  for (const auto name : MetafeatureVector::names()) out << ',' << name;
  for (std::size_t s = 0; s < 8; ++s) out << ",pre_" << to_string(kPreprocessors[s]);
  out << ",label\n";
  out << std::setprecision(17);
  for (const auto& inst : instances) {
    out << inst.dataset_id << ',' << to_string(inst.clf);
    const RowVector f = inst.features();
    for (Eigen::Index i = 0; i < f.size(); ++i) out << ',' << f(i);
    out << ',' << inst.label << '\n';
  }
}

std::vector<MetaInstance> read_metadataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metadataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty metadataset");
  const std::size_t expected = 2 + static_cast<std::size_t>(kMetaFeatureWidth) + 1;

  std::vector<MetaInstance> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const auto where = path.string() + ": line " + std::to_string(line_no);
    if (cells.size() != expected) throw std::runtime_error(where + " has " + std::to_string(cells.size()) + " cells");
    MetaInstance inst;
    inst.dataset_id = cells[0];
    const auto clf = parse_classifier(cells[1]);
    if (!clf) throw std::runtime_error(where + ": unknown classifier " + cells[1]);
    inst.clf = *clf;
    for (std::size_t i = 0; i < kMetafeatureCount; ++i) inst.metafeatures[i] = std::stod(cells[2 + i]);
    int hot = -1;
    for (std::size_t s = 0; s < 8; ++s) {
      if (std::stod(cells[2 + kMetafeatureCount + s]) == 1.0) {
        if (hot >= 0) throw std::runtime_error(where + ": more than one preprocessor flag set");
        hot = static_cast<int>(s);
      }
    }
    if (hot < 0) throw std::runtime_error(where + ": no preprocessor flag set");
    inst.preproc = kPreprocessors[static_cast<std::size_t>(hot)];
    inst.label = std::stoi(cells.back());
    if (inst.label != 0 && inst.label != 1) throw std::runtime_error(where + ": label must be 0 or 1");
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace pipemeta
