// Tabular datasets, the fixed cleaning stage and the stratified split.

#ifndef PIPEMETA_DATA_HPP_
#define PIPEMETA_DATA_HPP_

#include "pipemeta/common.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pipemeta {

enum class ColumnKind { Numeric, Categorical };

/// One feature column. Numeric columns keep their values in `numbers`,
/// categorical columns in `labels`; `missing` flags entries of either.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> numbers;
  std::vector<std::string> labels;
  std::vector<bool> missing;

  std::size_t size() const { return missing.size(); }
  std::size_t missing_count() const;
};

struct RawDataset {
  std::string id;
  std::vector<Column> columns;
  std::vector<std::string> target;
  std::string target_name = "class";

  std::size_t rows() const { return target.size(); }
  std::size_t missing_cells() const;
  /// Throws DataError when a structural invariant does not hold.
  void validate() const;
};

struct CleanDataset {
  std::string id;
  Matrix X;
  Labels y;
  std::vector<std::string> feature_names;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  /// Restrict to the given rows, keeping names and id.
  CleanDataset subset(const IndexList& rows) const;
};

struct TaskSplit {
  IndexList train_idx;
  IndexList test_idx;
  std::uint64_t seed = 0;
};

enum class DataErrorCode {
  Unreadable,
  NoRows,
  SingleClass,
  Ragged,
  UnknownColumn,
  Unusable,
  Stratification,
};

class DataError : public std::runtime_error {
 public:
  DataError(DataErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  DataErrorCode code() const { return code_; }

 private:
  DataErrorCode code_;
};

/// Column-kind declarations read from a `<name>.schema` sidecar.
struct Schema {
  std::string target;
  std::set<std::string> categorical;
  std::set<std::string> numeric;

  static Schema read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

/// Empty cells and "?" are missing. Rows whose target is missing are dropped.
RawDataset load_csv(const std::filesystem::path& path, const Schema& schema);
void save_csv(const RawDataset& raw, const std::filesystem::path& path);

/// Replace every missing cell with a uniformly drawn known value of the same
/// column. When `fit_rows` is given, draws come only from those rows.
/// Columns with no known values are dropped.
RawDataset impute(const RawDataset& raw, std::uint64_t seed, const std::optional<IndexList>& fit_rows = std::nullopt);

/// Maps raw rows into the encoded feature space learned from the fit rows.
class Encoder {
 public:
  Matrix transform(const RawDataset& raw) const;
  Labels transform_target(const std::vector<std::string>& target) const;

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& class_labels() const { return class_labels_; }

 private:
  friend std::pair<CleanDataset, Encoder> one_hot_encode(const RawDataset&, const IndexList&);

  struct ColumnCode {
    std::size_t source = 0;
    bool categorical = false;
    std::vector<std::string> categories;
  };
  std::vector<ColumnCode> codes_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> class_labels_;
  Eigen::Index width_ = 0;
};

/// Expand categorical columns into indicator columns (ordered by first
/// appearance among `fit_rows`) and map target labels to 0..C-1. The
/// returned CleanDataset covers every row of `raw`.
std::pair<CleanDataset, Encoder> one_hot_encode(const RawDataset& raw, const IndexList& fit_rows);
std::pair<CleanDataset, Encoder> one_hot_encode(const RawDataset& raw);

/// Stratified split: per class, floor(ratio * n_class) rows go to train
/// after a seeded shuffle, with at least one train row per class.
TaskSplit split(const Labels& y, double ratio, std::uint64_t seed);
TaskSplit split(const CleanDataset& clean, double ratio, std::uint64_t seed);

enum class CleanMode { PreSplit, PostSplit };

std::string to_string(CleanMode mode);
CleanMode parse_clean_mode(const std::string& text);

/// A dataset cleaned and split according to `mode`, ready for pipelines.
struct PreparedTask {
  CleanDataset clean;
  TaskSplit split;
};

/// The shared preparation used by both the runner and metafeature extraction:
/// pre-split fits imputation and encoding on all rows, post-split only on the
/// train partition.
PreparedTask prepare(const RawDataset& raw, std::uint64_t dataset_seed, CleanMode mode, double ratio = 0.7);

/// A CSV file plus its sidecar schema under a data directory.
struct DatasetFile {
  std::string id;
  std::filesystem::path csv;
  std::filesystem::path schema;
};

/// All `*.csv` files with a matching `.schema` sidecar, sorted by id.
std::vector<DatasetFile> discover_datasets(const std::filesystem::path& dir);
RawDataset load_dataset(const DatasetFile& file);

}  // namespace pipemeta

#endif  // PIPEMETA_DATA_HPP_
