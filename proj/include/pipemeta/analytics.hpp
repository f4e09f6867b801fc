// Comparisons of preprocessed pipelines against their no-preprocessor
// baseline: improvement counts, accuracy deltas and relative runtimes.

#ifndef PIPEMETA_ANALYTICS_HPP_
#define PIPEMETA_ANALYTICS_HPP_

#include "pipemeta/runner.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace pipemeta {

/// (t - t_baseline) / t_baseline. Throws std::domain_error unless t_baseline > 0.
double relative_runtime(double t, double t_baseline);

enum class Comparator { Strict, GreaterEqual };

std::string to_string(Comparator c);
Comparator parse_comparator(const std::string& text);
bool improves(double value, double baseline, Comparator c);

/// An ok pipeline record with a preprocessor, paired with its ok baseline.
struct BaselinePair {
  const ExperimentRecord* pipeline = nullptr;
  const ExperimentRecord* baseline = nullptr;
};

/// Every (ok non-baseline, ok baseline) pair in store order.
std::vector<BaselinePair> baseline_pairs(const ResultsStore& store);

struct ImprovementCell {
  double faster_train = 0;
  double more_accurate = 0;
  double both = 0;
};

/// Rows are the eight preprocessors, columns the six classifiers; means are
/// taken over the cells of a row or column.
struct ImprovementTable {
  std::array<std::array<ImprovementCell, 6>, 8> cells{};
  std::array<ImprovementCell, 8> row_mean{};
  std::array<ImprovementCell, 6> col_mean{};
  ImprovementCell grand_mean{};
};

ImprovementTable improvement_counts(const ResultsStore& store, Comparator accuracy_rule = Comparator::Strict);

struct DeltaStats {
  double train_mean = 0, train_std = 0;
  double test_mean = 0, test_std = 0;
  std::size_t pairs = 0;
};

/// Per preprocessor, mean and population std of (acc - baseline acc) in
/// percentage points, for train and test accuracy.
std::array<DeltaStats, 8> accuracy_deltas(const ResultsStore& store);

struct HistogramBin {
  double left = 0, right = 0;
  std::size_t count = 0;
};

struct RuntimeHistogram {
  std::vector<HistogramBin> bins;
  std::size_t tail_count = 0;   // values above the truncation point
  double max_value = 0.0;       // largest value seen, including the tail
  std::size_t total = 0;
  std::size_t skipped_zero_baseline = 0;
};

struct RuntimeHistograms {
  RuntimeHistogram train;
  RuntimeHistogram test;
};

/// Bins relative runtimes on [-1, truncate_at] in steps of `bin_width`.
/// Pairs whose baseline time is zero are skipped (and counted).
RuntimeHistograms runtime_histogram(const ResultsStore& store, double truncate_at = 3.0, double bin_width = 0.1,
                                    const std::function<void(const std::string&)>& warn = {});

/// Corpus-level shares quoted alongside the tables.
struct CorpusSummary {
  std::size_t records = 0;
  std::size_t ok_records = 0;
  std::size_t compared_pairs = 0;
  double share_faster_train = 0;
  double share_faster_test = 0;
  double share_lower_test_acc = 0;
  /// Among ok pipelines at their dataset's top test accuracy (or within 5 and
  /// 10 percent of it), the share that use a preprocessor.
  double top_uses_preproc = 0;
  double within5_uses_preproc = 0;
  double within10_uses_preproc = 0;
};

CorpusSummary summarize(const ResultsStore& store);

void print_table1(std::ostream& os, const ImprovementTable& table);
void write_table1_csv(std::ostream& os, const ImprovementTable& table);
void print_table2(std::ostream& os, const std::array<DeltaStats, 8>& deltas);
void write_table2_csv(std::ostream& os, const std::array<DeltaStats, 8>& deltas);
void print_histograms(std::ostream& os, const RuntimeHistograms& h);
void write_histograms_csv(std::ostream& os, const RuntimeHistograms& h);
void print_summary(std::ostream& os, const CorpusSummary& s);

}  // namespace pipemeta

#endif  // PIPEMETA_ANALYTICS_HPP_
