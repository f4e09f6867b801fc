// Simulated AutoML agents that pick a preprocessor for a (dataset, classifier)
// task, scored against the best option in hindsight.

#ifndef PIPEMETA_AGENTS_HPP_
#define PIPEMETA_AGENTS_HPP_

#include "pipemeta/metalearning.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pipemeta {

enum class AgentKind { None, Random, Mode, Oracle, Optimal };

inline constexpr std::array<AgentKind, 5> kAllAgents = {AgentKind::None, AgentKind::Random, AgentKind::Mode,
                                                        AgentKind::Oracle, AgentKind::Optimal};

std::string to_string(AgentKind kind);
std::optional<AgentKind> parse_agent(const std::string& name);

struct Task {
  std::string dataset_id;
  ClassifierKind clf = ClassifierKind::RFC;
};

/// Per classifier, how many training datasets each option won: a
/// preprocessor scores when it strictly beats the baseline's test accuracy,
/// and None scores when no preprocessor did.
class ModeStatistics {
 public:
  static ModeStatistics from_store(const ResultsStore& train_store);

  std::size_t count(ClassifierKind clf, PreprocessorKind option) const;
  void set_count(ClassifierKind clf, PreprocessorKind option, std::size_t value);
  /// Datasets that contributed to this classifier's counts.
  std::size_t datasets(ClassifierKind clf) const { return datasets_[static_cast<std::size_t>(clf)]; }
  bool empty() const;

  /// Highest count among `candidates`; ties go to the earlier enum member.
  PreprocessorKind best_of(ClassifierKind clf, const std::vector<PreprocessorKind>& candidates) const;

 private:
  std::array<std::array<std::size_t, 9>, 6> counts_{};
  std::array<std::size_t, 6> datasets_{};
};

/// Everything an agent may look at. Only Optimal reads the test store.
struct AgentContext {
  const ModeStatistics* mode = nullptr;
  const MetamodelSet* metamodels = nullptr;
  const MetafeatureVector* metafeatures = nullptr;
  const ResultsStore* test_store = nullptr;
  std::uint64_t seed = 0;
  bool mode_includes_none = true;
  std::function<void(const std::string&)> warn;
};

PreprocessorKind decide(AgentKind agent, const Task& task, const AgentContext& context);

/// Oracle's choice given the metamodel's verdict per preprocessor slot.
PreprocessorKind oracle_choice(const ModeStatistics& mode, ClassifierKind clf, const std::array<bool, 8>& helps);

enum class ScoreMetric { Relative, Absolute };

std::string to_string(ScoreMetric metric);
std::optional<ScoreMetric> parse_metric(const std::string& name);

struct TaskScore {
  PreprocessorKind chosen = PreprocessorKind::None;
  PreprocessorKind used = PreprocessorKind::None;  // differs from chosen after a fallback
  double accuracy = 0.0;
  double best_accuracy = 0.0;
  double pct_worse = 0.0;
};

/// Relative: 100 (a - a*) / a*. Absolute: 100 (a - a*). A failed choice
/// falls back to the baseline. Returns nothing when the baseline failed or
/// a* is zero.
std::optional<TaskScore> score_task(PreprocessorKind choice, const Task& task, const ResultsStore& test_store,
                                    ScoreMetric metric = ScoreMetric::Relative);

struct AgentSummary {
  AgentKind agent = AgentKind::None;
  double mean_pct_worse = 0.0;
  double std_pct_worse = 0.0;  // population
  std::size_t tasks = 0;
};

struct DecisionLogEntry {
  std::string dataset_id;
  ClassifierKind clf = ClassifierKind::RFC;
  AgentKind agent = AgentKind::None;
  TaskScore score;
};

struct SimulationReport {
  std::array<AgentSummary, 5> agents{};
  std::vector<DecisionLogEntry> log;
  std::vector<std::string> train_datasets;
  std::vector<std::string> test_datasets;
  std::size_t skipped_tasks = 0;
};

struct SimulationOptions {
  double split_ratio = 0.7;
  ScoreMetric metric = ScoreMetric::Relative;
  bool mode_includes_none = true;
  bool pooled_metamodel = false;
  Comparator label_rule = Comparator::GreaterEqual;
  std::function<void(const std::string&)> warn;
};

/// Split datasets, fit Mode statistics and metamodels on the training side,
/// then score all five agents on every test-side task. Test datasets without
/// metafeatures are left out for every agent. Throws std::invalid_argument
/// when either side of the split is empty.
SimulationReport simulate(const ResultsStore& store, const MetafeatureMap& metafeatures, std::uint64_t seed,
                          const SimulationOptions& options = {});

void write_simulation_csv(std::ostream& os, const SimulationReport& report);
/// Reads the agent rows written by write_simulation_csv.
std::array<AgentSummary, 5> read_simulation_csv(const std::filesystem::path& path);
void print_table3(std::ostream& os, const std::array<AgentSummary, 5>& rows);
void write_decision_log(std::ostream& os, const SimulationReport& report);

}  // namespace pipemeta

#endif  // PIPEMETA_AGENTS_HPP_
