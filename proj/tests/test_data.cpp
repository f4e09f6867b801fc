#include "helpers.hpp"
#include "pipemeta/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace pipemeta;
using testutil::TempDir;

namespace {

Schema target_schema(const std::string& target = "class") {
  Schema s;
  s.target = target;
  return s;
}

RawDataset single_column(std::vector<double> values, const std::vector<bool>& missing) {
  RawDataset raw;
  raw.id = "t";
  auto c = testutil::numeric("a", std::move(values));
  c.missing = missing;
  raw.columns.push_back(c);
  for (std::size_t i = 0; i < missing.size(); ++i) raw.target.push_back(i % 2 ? "x" : "y");
  return raw;
}

DataErrorCode load_error(const std::string& csv) {
  TempDir dir;
  testutil::write_file(dir / "d.csv", csv);
  try {
    load_csv(dir / "d.csv", target_schema());
  } catch (const DataError& e) {
    return e.code();
  }
  FAIL("expected a DataError");
  return DataErrorCode::Unreadable;
}

}  // namespace

TEST_CASE("load_csv flags '?' and empty cells as missing") {
  TempDir dir;
  testutil::write_file(dir / "d.csv", "a,b,class\n1,x,p\n?,y,q\n3,,p\n");
  const auto raw = load_csv(dir / "d.csv", target_schema());
  REQUIRE(raw.rows() == 3);
  REQUIRE(raw.columns.size() == 2);
  CHECK(raw.columns[0].name == "a");
  CHECK(raw.columns[0].missing == std::vector<bool>{false, true, false});
  CHECK(raw.columns[1].missing == std::vector<bool>{false, false, true});
  CHECK(raw.missing_cells() == 2);
}

TEST_CASE("load_csv detects column kinds from the cells") {
  TempDir dir;
  testutil::write_file(dir / "d.csv", "n,c,class\n1,x,p\n2,y,q\n3,x,p\n");
  const auto raw = load_csv(dir / "d.csv", target_schema());
  CHECK(raw.columns[0].kind == ColumnKind::Numeric);
  CHECK(raw.columns[1].kind == ColumnKind::Categorical);
  CHECK(raw.columns[0].numbers == std::vector<double>{1, 2, 3});
}

TEST_CASE("schema declarations override detection") {
  TempDir dir;
  testutil::write_file(dir / "d.csv", "code,class\n1,p\n2,q\n1,p\n");
  Schema s = target_schema();
  s.categorical = {"code"};
  const auto raw = load_csv(dir / "d.csv", s);
  CHECK(raw.columns[0].kind == ColumnKind::Categorical);
}

TEST_CASE("load_csv handles quoted fields") {
  TempDir dir;
  testutil::write_file(dir / "d.csv", "a,b,class\n1,\"x,y\",p\n2,\"z\",q\n");
  const auto raw = load_csv(dir / "d.csv", target_schema());
  CHECK(raw.columns[1].labels[0] == "x,y");
  CHECK(raw.columns[1].labels[1] == "z");
}

TEST_CASE("load_csv error cases are distinct") {
  CHECK(load_error("a,class\n1,p\n2,p\n3,p\n") == DataErrorCode::SingleClass);
  CHECK(load_error("a,class\n") == DataErrorCode::NoRows);
  CHECK(load_error("a,class\n1,p\n2\n") == DataErrorCode::Ragged);
  CHECK(load_error("a,b\n1,p\n2,q\n") == DataErrorCode::UnknownColumn);
  try {
    load_csv("/nonexistent/file.csv", target_schema());
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.code() == DataErrorCode::Unreadable);
  }
}

TEST_CASE("ragged-row errors name the row") {
  TempDir dir;
  testutil::write_file(dir / "d.csv", "a,class\n1,p\n2,q\n3\n");
  try {
    load_csv(dir / "d.csv", target_schema());
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("save_csv and load_csv round-trip") {
  TempDir dir;
  SynthOptions opts;
  opts.kind = SynthKind::Mixed;
  opts.categorical_features = 2;
  opts.missing_rate = 0.1;
  opts.seed = 5;
  const auto raw = synthesize("m", opts);
  write_dataset(raw, dir.path());
  const auto back = load_dataset({"m", dir / "m.csv", dir / "m.schema"});
  REQUIRE(back.columns.size() == raw.columns.size());
  CHECK(back.target == raw.target);
  for (std::size_t j = 0; j < raw.columns.size(); ++j) {
    CHECK(back.columns[j].kind == raw.columns[j].kind);
    CHECK(back.columns[j].missing == raw.columns[j].missing);
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      if (raw.columns[j].missing[i]) continue;
      if (raw.columns[j].kind == ColumnKind::Numeric) {
        CHECK(back.columns[j].numbers[i] == raw.columns[j].numbers[i]);
      } else {
        CHECK(back.columns[j].labels[i] == raw.columns[j].labels[i]);
      }
    }
  }
}

TEST_CASE("impute draws from the column's known values") {
  const auto out = impute(single_column({1, 0, 3}, {false, true, false}), 11);
  const double v = out.columns[0].numbers[1];
  CHECK((v == 1.0 || v == 3.0));
  CHECK(out.columns[0].missing_count() == 0);
}

TEST_CASE("impute leaves a complete column bit-identical") {
  const std::vector<double> values = {0.1, -2.5, 1e300, 7.0};
  const auto out = impute(single_column(values, {false, false, false, false}), 3);
  CHECK(out.columns[0].numbers == values);
}

TEST_CASE("impute with a single support value fills with that value") {
  const auto out = impute(single_column({5, 0, 0, 5}, {false, true, true, false}), 9);
  CHECK(out.columns[0].numbers == std::vector<double>{5, 5, 5, 5});
}

TEST_CASE("impute drops all-missing columns and rejects fully missing data") {
  RawDataset raw = single_column({1, 2, 3, 4}, {false, false, false, false});
  auto empty = testutil::numeric("gone", {0, 0, 0, 0});
  empty.missing.assign(4, true);
  raw.columns.push_back(empty);
  const auto out = impute(raw, 1);
  REQUIRE(out.columns.size() == 1);
  CHECK(out.columns[0].name == "a");

  RawDataset hopeless;
  hopeless.target = {"x", "y"};
  auto c = testutil::numeric("a", {0, 0});
  c.missing = {true, true};
  hopeless.columns.push_back(c);
  try {
    impute(hopeless, 1);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.code() == DataErrorCode::Unusable);
  }
}

TEST_CASE("impute properties on random data") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthOptions opts;
    opts.kind = SynthKind::Mixed;
    opts.categorical_features = 2;
    opts.missing_rate = 0.2;
    opts.seed = seed;
    const auto raw = synthesize("p", opts);
    const auto a = impute(raw, seed);
    const auto b = impute(raw, seed + 1000);
    REQUIRE(a.columns.size() == raw.columns.size());
    for (std::size_t j = 0; j < raw.columns.size(); ++j) {
      const auto& src = raw.columns[j];
      std::set<double> support_n;
      std::set<std::string> support_c;
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (src.missing[i]) continue;
        if (src.kind == ColumnKind::Numeric) {
          support_n.insert(src.numbers[i]);
        } else {
          support_c.insert(src.labels[i]);
        }
      }
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (src.kind == ColumnKind::Numeric) {
          CHECK(support_n.count(a.columns[j].numbers[i]) == 1);
          if (!src.missing[i]) {
            CHECK(a.columns[j].numbers[i] == src.numbers[i]);
            CHECK(b.columns[j].numbers[i] == src.numbers[i]);
          }
        } else {
          CHECK(support_c.count(a.columns[j].labels[i]) == 1);
          if (!src.missing[i]) CHECK(a.columns[j].labels[i] == src.labels[i]);
        }
      }
    }
  }
}

TEST_CASE("impute is deterministic per seed") {
  SynthOptions opts;
  opts.kind = SynthKind::Mixed;
  opts.categorical_features = 1;
  opts.missing_rate = 0.3;
  const auto raw = synthesize("d", opts);
  const auto a = impute(raw, 4);
  const auto b = impute(raw, 4);
  for (std::size_t j = 0; j < a.columns.size(); ++j) {
    CHECK(a.columns[j].numbers == b.columns[j].numbers);
    CHECK(a.columns[j].labels == b.columns[j].labels);
  }
}

TEST_CASE("one_hot_encode expands a categorical column") {
  RawDataset raw;
  raw.columns.push_back(testutil::categorical("c", {"a", "b", "a"}));
  raw.target = {"p", "q", "p"};
  const auto [clean, encoder] = one_hot_encode(raw);
  REQUIRE(clean.X.cols() == 2);
  CHECK(clean.X.col(0) == Vector((Vector(3) << 1, 0, 1).finished()));
  CHECK(clean.X.col(1) == Vector((Vector(3) << 0, 1, 0).finished()));
  CHECK(clean.y == Labels((Labels(3) << 0, 1, 0).finished()));
  CHECK(encoder.class_labels() == std::vector<std::string>{"p", "q"});
}

TEST_CASE("one_hot_encode passes numeric data through") {
  RawDataset raw;
  raw.columns.push_back(testutil::numeric("a", {1.5, -2, 3}));
  raw.columns.push_back(testutil::numeric("b", {0, 4, 8}));
  raw.target = {"p", "q", "p"};
  const auto clean = one_hot_encode(raw).first;
  Matrix expected(3, 2);
  expected << 1.5, 0, -2, 4, 3, 8;
  CHECK(clean.X == expected);
  CHECK(clean.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("encoder maps unseen categories to zeros") {
  RawDataset raw;
  raw.columns.push_back(testutil::numeric("n", {1, 2, 3, 4}));
  raw.columns.push_back(testutil::categorical("c", {"a", "b", "a", "z"}));
  raw.target = {"p", "q", "p", "q"};
  const IndexList fit_rows = {0, 1, 2};
  const auto [clean, encoder] = one_hot_encode(raw, fit_rows);
  REQUIRE(clean.X.cols() == 3);
  CHECK(clean.X(3, 0) == 4.0);
  CHECK(clean.X(3, 1) == 0.0);
  CHECK(clean.X(3, 2) == 0.0);
  CHECK(clean.X.rows() == 4);
}

TEST_CASE("split: 100 balanced rows at 0.7 gives 70/30") {
  const auto y = testutil::alternating_labels(100);
  const auto s = split(y, 0.7, 1);
  CHECK(s.train_idx.size() == 70);
  CHECK(s.test_idx.size() == 30);
}

TEST_CASE("split: 10 + 10 rows at 0.5 gives 5 + 5 train") {
  const auto y = testutil::alternating_labels(20);
  const auto s = split(y, 0.5, 2);
  int per_class[2] = {0, 0};
  for (auto i : s.train_idx) ++per_class[y(i)];
  CHECK(per_class[0] == 5);
  CHECK(per_class[1] == 5);
}

TEST_CASE("split: a two-row class puts one row on each side") {
  Labels y(8);
  y << 0, 0, 0, 0, 0, 0, 1, 1;
  const auto s = split(y, 0.7, 3);
  int train_ones = 0, test_ones = 0;
  for (auto i : s.train_idx) train_ones += y(i) == 1;
  for (auto i : s.test_idx) test_ones += y(i) == 1;
  CHECK(train_ones == 1);
  CHECK(test_ones == 1);
}

TEST_CASE("split rejects a class with fewer than two rows") {
  Labels y(5);
  y << 0, 0, 0, 0, 1;
  try {
    split(y, 0.7, 0);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.code() == DataErrorCode::Stratification);
  }
}

TEST_CASE("split is deterministic, disjoint and exhaustive") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto y = testutil::alternating_labels(30 + static_cast<Eigen::Index>(seed), 3);
    const auto a = split(y, 0.7, seed);
    const auto b = split(y, 0.7, seed);
    CHECK(a.train_idx == b.train_idx);
    CHECK(a.test_idx == b.test_idx);
    std::vector<Eigen::Index> all = a.train_idx;
    all.insert(all.end(), a.test_idx.begin(), a.test_idx.end());
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == static_cast<std::size_t>(y.size()));
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == static_cast<Eigen::Index>(i));
    std::set<int> train_classes;
    for (auto i : a.train_idx) train_classes.insert(y(i));
    CHECK(train_classes.size() == 3);
  }
}

TEST_CASE("post-split cleaning only learns categories from the train rows") {
  RawDataset raw;
  std::vector<std::string> cats(40, "common");
  cats[17] = "rare";
  raw.columns.push_back(testutil::categorical("c", cats));
  raw.columns.push_back(testutil::numeric("n", std::vector<double>(40, 1.0)));
  for (int i = 0; i < 40; ++i) raw.target.push_back(i % 2 ? "p" : "q");
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto task = prepare(raw, seed, CleanMode::PostSplit);
    const bool rare_in_train =
        std::find(task.split.train_idx.begin(), task.split.train_idx.end(), 17) != task.split.train_idx.end();
    const auto& names = task.clean.feature_names;
    const bool has_rare = std::any_of(names.begin(), names.end(),
                                      [](const std::string& n) { return n.find("rare") != std::string::npos; });
    CHECK(has_rare == rare_in_train);

    const auto pre = prepare(raw, seed, CleanMode::PreSplit);
    CHECK(pre.clean.X.cols() == 3);
  }
}

TEST_CASE("clean mode names round-trip") {
  CHECK(parse_clean_mode("pre-split") == CleanMode::PreSplit);
  CHECK(parse_clean_mode(to_string(CleanMode::PostSplit)) == CleanMode::PostSplit);
  CHECK_THROWS(parse_clean_mode("sideways"));
}

TEST_CASE("discover_datasets pairs CSVs with schemas in id order") {
  TempDir dir;
  const auto files = write_synthetic_corpus(dir.path(), 4, 7);
  testutil::write_file(dir / "orphan.csv", "a,class\n1,p\n2,q\n");
  const auto found = discover_datasets(dir.path());
  REQUIRE(found.size() == 4);
  for (std::size_t i = 0; i < found.size(); ++i) CHECK(found[i].id == files[i].id);
  for (const auto& f : found) CHECK_NOTHROW(load_dataset(f).validate());
}

TEST_CASE("synthetic corpus is reproducible") {
  TempDir a, b;
  write_synthetic_corpus(a.path(), 3, 11);
  write_synthetic_corpus(b.path(), 3, 11);
  for (const auto& f : discover_datasets(a.path())) {
    CHECK(testutil::read_file(f.csv) == testutil::read_file(b / (f.id + ".csv")));
  }
}
