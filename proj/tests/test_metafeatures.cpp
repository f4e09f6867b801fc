#include "helpers.hpp"
#include "pipemeta/metafeatures.hpp"
#include "pipemeta/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace pipemeta;

namespace {

// Two numeric columns plus one categorical, with labels from `y`.
std::pair<RawDataset, CleanDataset> small_task(const std::vector<int>& y, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const Matrix X = testutil::random_matrix(n, 2, seed, 3.0);
  RawDataset raw;
  raw.id = "t";
  std::vector<double> a, b;
  std::vector<std::string> c;
  for (Eigen::Index i = 0; i < n; ++i) {
    a.push_back(X(i, 0));
    b.push_back(X(i, 1));
    c.push_back(i % 3 == 0 ? "x" : "y");
    raw.target.push_back(std::to_string(y[static_cast<std::size_t>(i)]));
  }
  raw.columns = {testutil::numeric("a", a), testutil::numeric("b", b), testutil::categorical("c", c)};
  CleanDataset clean;
  clean.id = "t";
  clean.X.resize(n, 4);
  clean.X.leftCols(2) = X;
  for (Eigen::Index i = 0; i < n; ++i) {
    clean.X(i, 2) = i % 3 == 0 ? 1.0 : 0.0;
    clean.X(i, 3) = 1.0 - clean.X(i, 2);
  }
  clean.y = Eigen::Map<const Labels>(y.data(), n);
  clean.feature_names = {"a", "b", "c=x", "c=y"};
  return {raw, clean};
}

std::vector<int> labels_with(int zeros, int ones) {
  std::vector<int> y(static_cast<std::size_t>(zeros), 0);
  y.insert(y.end(), static_cast<std::size_t>(ones), 1);
  return y;
}

template <typename T>
std::vector<T> twice(const std::vector<T>& v) {
  auto out = v;
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace

TEST_CASE("names are unique and indexable") {
  const auto& names = MetafeatureVector::names();
  CHECK(names.size() == 41);
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(MetafeatureVector::index_of(names[i]) == i);
  CHECK_THROWS_AS(MetafeatureVector::index_of("nope"), std::out_of_range);
  CHECK(kSimpleMetafeatures + kStatisticalMetafeatures + kInformationMetafeatures + kLandmarkMetafeatures == 41);
}

TEST_CASE("extraction on a synthetic corpus is finite and deterministic") {
  SynthOptions opts;
  for (auto kind : {SynthKind::Blobs, SynthKind::Xor, SynthKind::Mixed}) {
    opts.kind = kind;
    opts.categorical_features = kind == SynthKind::Mixed ? 2 : 0;
    opts.missing_rate = kind == SynthKind::Mixed ? 0.05 : 0.0;
    opts.classes = kind == SynthKind::Xor ? 2 : 3;
    opts.seed = 17;
    const auto raw = synthesize("s", opts);
    const auto a = extract_for_run(raw, 4, CleanMode::PreSplit);
    const auto b = extract_for_run(raw, 4, CleanMode::PreSplit);
    CHECK(a.all_finite());
    CHECK(a.values == b.values);
    for (std::size_t i = kMetafeatureCount - kLandmarkMetafeatures; i < kMetafeatureCount; ++i) {
      CHECK(a[i] >= 0.0);
      CHECK(a[i] <= 1.0);
    }
  }
}

TEST_CASE("balanced binary target has normalised entropy one") {
  const auto [raw, clean] = small_task(labels_with(20, 20), 1);
  const auto mf = extract(raw, clean, 0);
  CHECK(mf.at("normalized_class_entropy") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mf.at("majority_class_fraction") == 0.5);
  CHECK(mf.at("n_classes") == 2);
}

TEST_CASE("class fractions") {
  const auto [raw, clean] = small_task(labels_with(70, 30), 2);
  const auto mf = extract(raw, clean, 0);
  CHECK(mf.at("majority_class_fraction") == doctest::Approx(0.70));
  CHECK(mf.at("minority_class_fraction") == doctest::Approx(0.30));
  CHECK(mf.at("lm_majority_acc") == doctest::Approx(0.70));
  CHECK(mf.at("lm_majority_bacc") == doctest::Approx(0.5));
  const double h = -(0.7 * std::log2(0.7) + 0.3 * std::log2(0.3));
  CHECK(mf.at("normalized_class_entropy") == doctest::Approx(h).epsilon(1e-12));
}

TEST_CASE("simple counts") {
  const auto [raw, clean] = small_task(labels_with(10, 10), 3);
  const auto mf = extract(raw, clean, 0);
  CHECK(mf.at("n_instances") == 20);
  CHECK(mf.at("n_features") == 4);
  CHECK(mf.at("n_numeric_raw") == 2);
  CHECK(mf.at("n_categorical_raw") == 1);
  CHECK(mf.at("ratio_categorical_numeric") == 0.5);
  CHECK(mf.at("ratio_numeric_categorical") == 2.0);
  CHECK(mf.at("dimensionality") == doctest::Approx(0.2));
  CHECK(mf.at("pct_missing_values") == 0.0);
  CHECK(mf.at("pct_instances_with_missing") == 0.0);
  CHECK(mf.at("pct_features_with_missing") == 0.0);
}

TEST_CASE("missing-value features come from the raw table") {
  auto [raw, clean] = small_task(labels_with(10, 10), 4);
  raw.columns[0].missing[0] = true;
  raw.columns[0].missing[1] = true;
  raw.columns[2].missing[1] = true;
  const auto mf = extract(raw, clean, 0);
  CHECK(mf.at("pct_missing_values") == doctest::Approx(3.0 / 60.0));
  CHECK(mf.at("pct_instances_with_missing") == doctest::Approx(2.0 / 20.0));
  CHECK(mf.at("pct_features_with_missing") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("duplicating every row") {
  const auto [raw, clean] = small_task(labels_with(12, 9), 5);
  RawDataset raw2 = raw;
  raw2.target = twice(raw.target);
  for (auto& c : raw2.columns) {
    c.numbers = twice(c.numbers);
    c.labels = twice(c.labels);
    auto m = c.missing;
    c.missing.insert(c.missing.end(), m.begin(), m.end());
  }
  CleanDataset clean2 = clean;
  clean2.X.resize(2 * clean.rows(), clean.cols());
  clean2.X << clean.X, clean.X;
  clean2.y.resize(2 * clean.rows());
  clean2.y << clean.y, clean.y;

  const auto a = extract(raw, clean, 9);
  const auto b = extract(raw2, clean2, 9);
  CHECK(b.at("n_instances") == 2 * a.at("n_instances"));
  // Dimensionality is features per instance, so it halves.
  CHECK(b.at("dimensionality") == doctest::Approx(a.at("dimensionality") / 2));
  for (const char* name : {"majority_class_fraction", "minority_class_fraction", "normalized_class_entropy",
                           "ratio_categorical_numeric", "n_features", "n_classes", "skewness_mean", "kurtosis_mean",
                           "mean_abs_correlation", "pca_first_component_fraction", "sparsity"}) {
    CAPTURE(name);
    CHECK(b.at(name) == doctest::Approx(a.at(name)).epsilon(1e-9));
  }
}

TEST_CASE("constant columns contribute zero skewness") {
  auto [raw, clean] = small_task(labels_with(10, 10), 6);
  clean.X.col(0).setConstant(4.0);
  clean.X.col(1).setConstant(-1.0);
  clean.X.col(2).setConstant(1.0);
  clean.X.col(3).setConstant(0.0);
  const auto mf = extract(raw, clean, 0);
  CHECK(mf.all_finite());
  CHECK(mf.at("skewness_mean") == 0.0);
  CHECK(mf.at("kurtosis_mean") == 0.0);
}

TEST_CASE("extraction rejects a single-class train partition") {
  auto [raw, clean] = small_task(labels_with(10, 0), 7);
  CHECK_THROWS_AS(extract(raw, clean, 0), std::invalid_argument);
}

TEST_CASE("landmark folds are stratified, exhaustive and fall back to leave-one-out") {
  const auto y = testutil::alternating_labels(103, 3);
  const auto folds = landmark_folds(y, 10, 1);
  std::vector<int> sizes(10, 0);
  for (int f : folds) {
    REQUIRE(f >= 0);
    REQUIRE(f < 10);
    ++sizes[static_cast<std::size_t>(f)];
  }
  for (int s : sizes) CHECK(std::abs(s - 10) <= 1);
  CHECK(folds == landmark_folds(y, 10, 1));

  Labels few(6);
  few << 0, 0, 0, 1, 1, 1;
  const auto loo = landmark_folds(few, 10, 1);
  CHECK(loo == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("metafeature CSV round trip") {
  testutil::TempDir dir;
  MetafeatureMap map;
  const auto [raw, clean] = small_task(labels_with(8, 9), 8);
  map["t"] = extract(raw, clean, 0);
  map["u"] = map["t"];
  map["u"][0] = 1.0 / 3.0;
  write_metafeatures_csv(map, dir / "mf.csv");
  const auto back = read_metafeatures_csv(dir / "mf.csv");
  REQUIRE(back.size() == 2);
  CHECK(back.at("t").values == map.at("t").values);
  CHECK(back.at("u").values == map.at("u").values);

  testutil::write_file(dir / "bad.csv", "dataset_id,x\nt,1\n");
  CHECK_THROWS(read_metafeatures_csv(dir / "bad.csv"));
}
