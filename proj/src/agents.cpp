#include "pipemeta/agents.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pipemeta {

namespace {

constexpr std::size_t option_index(PreprocessorKind p) { return static_cast<std::size_t>(p); }
constexpr std::size_t clf_index(ClassifierKind c) { return static_cast<std::size_t>(c); }

void emit(const std::function<void(const std::string&)>& warn, const std::string& message) {
  if (warn) warn(message);
}

}  // namespace

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::None: return "None";
    case AgentKind::Random: return "Random";
    case AgentKind::Mode: return "Mode";
    case AgentKind::Oracle: return "Oracle";
    case AgentKind::Optimal: return "Optimal";
  }
  return "?";
}

std::optional<AgentKind> parse_agent(const std::string& name) {
  for (const auto a : kAllAgents) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::string to_string(ScoreMetric metric) { return metric == ScoreMetric::Relative ? "relative" : "absolute"; }

std::optional<ScoreMetric> parse_metric(const std::string& name) {
  if (name == "relative") return ScoreMetric::Relative;
  if (name == "absolute") return ScoreMetric::Absolute;
  return std::nullopt;
}

ModeStatistics ModeStatistics::from_store(const ResultsStore& train_store) {
  ModeStatistics m;
  for (const auto& id : train_store.dataset_ids()) {
    for (const auto clf : kAllClassifiers) {
      const auto* base = train_store.find(id, PreprocessorKind::None, clf);
      if (base == nullptr || !base->ok()) continue;
      ++m.datasets_[clf_index(clf)];
      bool any = false;
      for (const auto p : kPreprocessors) {
        const auto* r = train_store.find(id, p, clf);
        if (r != nullptr && r->ok() && *r->test_acc > *base->test_acc) {
          ++m.counts_[clf_index(clf)][option_index(p)];
          any = true;
        }
      }
      if (!any) ++m.counts_[clf_index(clf)][option_index(PreprocessorKind::None)];
    }
  }
  return m;
}

std::size_t ModeStatistics::count(ClassifierKind clf, PreprocessorKind option) const {
  return counts_[clf_index(clf)][option_index(option)];
}

void ModeStatistics::set_count(ClassifierKind clf, PreprocessorKind option, std::size_t value) {
  counts_[clf_index(clf)][option_index(option)] = value;
  datasets_[clf_index(clf)] = std::max<std::size_t>(datasets_[clf_index(clf)], 1);
}

bool ModeStatistics::empty() const {
  return std::all_of(datasets_.begin(), datasets_.end(), [](std::size_t n) { return n == 0; });
}

PreprocessorKind ModeStatistics::best_of(ClassifierKind clf, const std::vector<PreprocessorKind>& candidates) const {
  if (candidates.empty()) throw std::invalid_argument("no candidate options");
  auto sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  PreprocessorKind best = sorted.front();
  for (const auto p : sorted) {
    if (count(clf, p) > count(clf, best)) best = p;
  }
  return best;
}

PreprocessorKind oracle_choice(const ModeStatistics& mode, ClassifierKind clf, const std::array<bool, 8>& helps) {
  std::vector<PreprocessorKind> predicted;
  for (std::size_t s = 0; s < 8; ++s) {
    if (helps[s]) predicted.push_back(kPreprocessors[s]);
  }
  if (predicted.empty()) return PreprocessorKind::None;
  return mode.best_of(clf, predicted);
}

PreprocessorKind decide(AgentKind agent, const Task& task, const AgentContext& ctx) {
  switch (agent) {
    case AgentKind::None:
      return PreprocessorKind::None;

    case AgentKind::Random: {
      Rng rng(derive_seed(ctx.seed, "random-agent", task.dataset_id, to_string(task.clf)));
      return kAllPreprocessors[uniform_index(rng, kAllPreprocessors.size())];
    }

    case AgentKind::Mode: {
      if (ctx.mode == nullptr || ctx.mode->datasets(task.clf) == 0) {
        emit(ctx.warn, "Mode agent has no training statistics for " + to_string(task.clf) + "; choosing None");
        return PreprocessorKind::None;
      }
      std::vector<PreprocessorKind> candidates(kPreprocessors.begin(), kPreprocessors.end());
      if (ctx.mode_includes_none) candidates.push_back(PreprocessorKind::None);
      return ctx.mode->best_of(task.clf, candidates);
    }

    case AgentKind::Oracle: {
      if (ctx.mode == nullptr || ctx.mode->datasets(task.clf) == 0 || ctx.metamodels == nullptr ||
          ctx.metafeatures == nullptr) {
        emit(ctx.warn, "Oracle agent lacks training data or metafeatures for " + task.dataset_id + "/" +
                           to_string(task.clf) + "; choosing None");
        return PreprocessorKind::None;
      }
      const auto& model = ctx.metamodels->for_classifier(task.clf);
      std::array<bool, 8> helps{};
      for (std::size_t s = 0; s < 8; ++s) {
        helps[s] = model.predict(*ctx.metafeatures, kPreprocessors[s], task.clf).label == 1;
      }
      return oracle_choice(*ctx.mode, task.clf, helps);
    }

    case AgentKind::Optimal: {
      if (ctx.test_store == nullptr) throw std::invalid_argument("Optimal agent needs the test results");
      PreprocessorKind best = PreprocessorKind::None;
      double best_acc = -1.0;
      for (const auto p : kAllPreprocessors) {
        const auto* r = ctx.test_store->find(task.dataset_id, p, task.clf);
        if (r != nullptr && r->ok() && *r->test_acc > best_acc) {
          best = p;
          best_acc = *r->test_acc;
        }
      }
      return best;
    }
  }
  throw std::invalid_argument("unknown agent");
}

std::optional<TaskScore> score_task(PreprocessorKind choice, const Task& task, const ResultsStore& test_store,
                                    ScoreMetric metric) {
  const auto* base = test_store.find(task.dataset_id, PreprocessorKind::None, task.clf);
  if (base == nullptr || !base->ok()) return std::nullopt;
  double best = 0.0;
  for (const auto p : kAllPreprocessors) {
    const auto* r = test_store.find(task.dataset_id, p, task.clf);
    if (r != nullptr && r->ok()) best = std::max(best, *r->test_acc);
  }
  if (best <= 0.0) return std::nullopt;

  TaskScore s;
  s.chosen = choice;
  s.best_accuracy = best;
  const auto* r = test_store.find(task.dataset_id, choice, task.clf);
  if (r != nullptr && r->ok()) {
    s.used = choice;
    s.accuracy = *r->test_acc;
  } else {
    s.used = PreprocessorKind::None;
    s.accuracy = *base->test_acc;
  }
  s.pct_worse = metric == ScoreMetric::Relative ? 100.0 * (s.accuracy - best) / best : 100.0 * (s.accuracy - best);
  return s;
}

SimulationReport simulate(const ResultsStore& store, const MetafeatureMap& metafeatures, std::uint64_t seed,
                          const SimulationOptions& options) {
  if (store.empty()) throw std::invalid_argument("cannot simulate on an empty results store");
  SimulationReport report;
  std::tie(report.train_datasets, report.test_datasets) =
      split_datasets(store.dataset_ids(), options.split_ratio, seed);
  if (report.train_datasets.empty() || report.test_datasets.empty()) {
    throw std::invalid_argument("dataset split left one side empty");
  }
  const auto train_store = store.filter_datasets(report.train_datasets);
  const auto test_store = store.filter_datasets(report.test_datasets);

  const auto mode = ModeStatistics::from_store(train_store);
  if (mode.empty()) emit(options.warn, "training side has no successful baselines");
  const auto instances = build_metadataset(train_store, metafeatures, options.label_rule, options.warn);
  const auto models = MetamodelSet::train(instances, derive_seed(seed, "metamodels"), options.pooled_metamodel);

  std::array<std::vector<double>, 5> scores;
  for (const auto& id : report.test_datasets) {
    const auto mf = metafeatures.find(id);
    if (mf == metafeatures.end()) {
      emit(options.warn, "no metafeatures for test dataset " + id + "; its tasks are skipped");
      report.skipped_tasks += kAllClassifiers.size();
      continue;
    }
    AgentContext ctx{&mode, &models, &mf->second, &test_store, seed, options.mode_includes_none, options.warn};
    for (const auto clf : kAllClassifiers) {
      const Task task{id, clf};
      if (!score_task(PreprocessorKind::None, task, test_store, options.metric)) {
        emit(options.warn, "task " + id + "/" + to_string(clf) + " has no usable baseline or best accuracy; skipped");
        ++report.skipped_tasks;
        continue;
      }
      for (std::size_t a = 0; a < kAllAgents.size(); ++a) {
        const auto choice = decide(kAllAgents[a], task, ctx);
        const auto s = *score_task(choice, task, test_store, options.metric);
        scores[a].push_back(s.pct_worse);
        report.log.push_back({id, clf, kAllAgents[a], s});
      }
    }
  }

  for (std::size_t a = 0; a < kAllAgents.size(); ++a) {
    auto& row = report.agents[a];
    row.agent = kAllAgents[a];
    row.tasks = scores[a].size();
    if (scores[a].empty()) continue;
    const Eigen::Map<const Vector> v(scores[a].data(), static_cast<Eigen::Index>(scores[a].size()));
    row.mean_pct_worse = v.mean();
    row.std_pct_worse = std::sqrt((v.array() - row.mean_pct_worse).square().mean());
  }
  return report;
}

void write_simulation_csv(std::ostream& os, const SimulationReport& report) {
  os << "agent,mean_pct_worse,std_pct_worse,n_tasks\n" << std::setprecision(17);
  for (const auto& row : report.agents) {
    os << to_string(row.agent) << ',' << row.mean_pct_worse << ',' << row.std_pct_worse << ',' << row.tasks << '\n';
  }
}

std::array<AgentSummary, 5> read_simulation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open simulation report " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "agent,mean_pct_worse,std_pct_worse,n_tasks") {
    throw std::runtime_error(path.string() + ": not a simulation report");
  }
  std::array<AgentSummary, 5> rows{};
  std::set<AgentKind> seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string name, mean, sd, n;
    std::getline(ss, name, ',');
    std::getline(ss, mean, ',');
    std::getline(ss, sd, ',');
    std::getline(ss, n, ',');
    const auto agent = parse_agent(name);
    if (!agent) throw std::runtime_error(path.string() + ": unknown agent " + name);
    rows[static_cast<std::size_t>(*agent)] = {*agent, std::stod(mean), std::stod(sd), std::stoul(n)};
    seen.insert(*agent);
  }
  if (seen.size() != kAllAgents.size()) throw std::runtime_error(path.string() + ": expected five agent rows");
  return rows;
}

void print_table3(std::ostream& os, const std::array<AgentSummary, 5>& rows) {
  os << "Percent worse than the Optimal agent\n";
  os << std::left << std::setw(10) << "";
  for (const auto& r : rows) os << std::setw(10) << to_string(r.agent);
  os << "\n" << std::setw(10) << "Mean";
  std::ostringstream cell;
  for (const auto& r : rows) {
    cell.str("");
    cell << std::fixed << std::setprecision(2) << r.mean_pct_worse;
    os << std::setw(10) << cell.str();
  }
  os << "\n" << std::setw(10) << "StdDev";
  for (const auto& r : rows) {
    cell.str("");
    cell << std::fixed << std::setprecision(2) << r.std_pct_worse;
    os << std::setw(10) << cell.str();
  }
  os << "\n" << std::setw(10) << "Tasks";
  for (const auto& r : rows) os << std::setw(10) << r.tasks;
  os << "\n" << std::right;
}

void write_decision_log(std::ostream& os, const SimulationReport& report) {
  for (const auto& e : report.log) {
    nlohmann::ordered_json j;
    j["dataset_id"] = e.dataset_id;
    j["clf"] = to_string(e.clf);
    j["agent"] = to_string(e.agent);
    j["chosen"] = to_string(e.score.chosen);
    j["used"] = to_string(e.score.used);
    j["test_acc"] = e.score.accuracy;
    j["best_test_acc"] = e.score.best_accuracy;
    j["pct_worse"] = e.score.pct_worse;
    os << j.dump() << '\n';
  }
}

}  // namespace pipemeta
