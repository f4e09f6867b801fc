// Pipeline enumeration, execution, and the JSON-lines results store.

#ifndef PIPEMETA_RUNNER_HPP_
#define PIPEMETA_RUNNER_HPP_

#include "pipemeta/data.hpp"
#include "pipemeta/learners.hpp"
#include "pipemeta/transforms.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace pipemeta {

struct PipelineSpec {
  std::string dataset_id;
  PreprocessorKind preproc = PreprocessorKind::None;
  ClassifierKind clf = ClassifierKind::RFC;
  std::uint64_t seed = 0;

  bool is_baseline() const { return preproc == PreprocessorKind::None; }
};

enum class RunStatus { Ok, ConvergenceError, ResourceError, OtherError };

std::string to_string(RunStatus status);
std::optional<RunStatus> parse_status(const std::string& text);

struct ExperimentRecord {
  PipelineSpec spec;
  RunStatus status = RunStatus::Ok;
  double train_time_s = 0.0;
  double test_time_s = 0.0;
  std::optional<double> train_acc;
  std::optional<double> test_acc;
  Eigen::Index out_dim = 0;
  std::string error_detail;

  bool ok() const { return status == RunStatus::Ok; }
};

/// Seed shared by every pipeline on one dataset; cleaning, splitting and the
/// per-step seeds all derive from it.
std::uint64_t dataset_seed(std::uint64_t run_seed, const std::string& dataset_id);
std::uint64_t transform_seed(const PipelineSpec& spec);
std::uint64_t classifier_seed(const PipelineSpec& spec);

/// |ids| x 9 x 6 specs, ordered by dataset, then preprocessor, then classifier.
std::vector<PipelineSpec> enumerate_pipelines(const std::vector<std::string>& dataset_ids, std::uint64_t run_seed);

/// Fit/transform the preprocessor and train the classifier on the train rows,
/// then score both partitions. Failures are captured in the record's status.
ExperimentRecord run_pipeline(const PipelineSpec& spec, const CleanDataset& clean, const TaskSplit& split);

using RecordKey = std::tuple<std::string, PreprocessorKind, ClassifierKind>;

/// Append-only collection of records with at most one record per key.
class ResultsStore {
 public:
  /// Throws std::invalid_argument on a duplicate key.
  void append(ExperimentRecord record);
  bool contains(const RecordKey& key) const { return index_.count(key) != 0; }
  const ExperimentRecord* find(const std::string& dataset_id, PreprocessorKind preproc, ClassifierKind clf) const;

  const std::vector<ExperimentRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  /// Distinct dataset ids in first-appearance order.
  std::vector<std::string> dataset_ids() const;
  /// Records whose dataset id is in `ids`.
  ResultsStore filter_datasets(const std::vector<std::string>& ids) const;

 private:
  std::vector<ExperimentRecord> records_;
  std::map<RecordKey, std::size_t> index_;
};

std::string to_json_line(const ExperimentRecord& record);
ExperimentRecord from_json_line(const std::string& line);

/// Reads every complete record. A malformed final line (an interrupted
/// write) is ignored; malformed lines elsewhere throw.
ResultsStore read_results(const std::filesystem::path& path);
void write_results(const ResultsStore& store, const std::filesystem::path& path);

struct RunOptions {
  std::uint64_t seed = 0;
  int jobs = 1;
  CleanMode clean_mode = CleanMode::PreSplit;
  double split_ratio = 0.7;
  /// Stop after this many new records (simulates an interruption in tests).
  std::optional<std::size_t> max_new_records;
  std::function<void(const std::string&)> warn;
};

struct RunSummary {
  std::size_t total_specs = 0;
  std::size_t skipped_existing = 0;
  std::size_t executed = 0;
  std::size_t failed = 0;
};

/// Run every pipeline for the datasets in `data_dir`, appending to `out`.
/// Keys already present in `out` are skipped, so an interrupted run resumes.
/// Records are written in enumeration order by a single writer.
RunSummary run_experiments(const std::filesystem::path& data_dir, const std::filesystem::path& out,
                           const RunOptions& options);

/// In-memory variant over prepared datasets, used by tests and the simulator.
ResultsStore run_all(const std::vector<RawDataset>& datasets, const RunOptions& options);

}  // namespace pipemeta

#endif  // PIPEMETA_RUNNER_HPP_
