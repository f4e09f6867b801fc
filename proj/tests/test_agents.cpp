#include "helpers.hpp"
#include "pipemeta/agents.hpp"
#include "pipemeta/metalearning.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace pipemeta;
using testutil::record;

namespace {

using P = PreprocessorKind;
using C = ClassifierKind;

// Store in which SS beats everything else for every classifier.
ResultsStore ss_dominates(int datasets) {
  ResultsStore store;
  for (int d = 0; d < datasets; ++d) {
    const std::string id = "d" + std::to_string(d);
    for (auto p : kAllPreprocessors) {
      for (auto c : kAllClassifiers) store.append(record(id, p, c, 1, p == P::SS ? 0.9 : 0.6 + 0.01 * d));
    }
  }
  return store;
}

MetafeatureMap zero_metafeatures(const ResultsStore& store) {
  MetafeatureMap mf;
  for (const auto& id : store.dataset_ids()) mf[id] = MetafeatureVector{};
  return mf;
}

}  // namespace

TEST_CASE("agent names") {
  for (auto a : kAllAgents) CHECK(parse_agent(to_string(a)) == a);
  CHECK_FALSE(parse_agent("Clairvoyant").has_value());
  CHECK(parse_metric("absolute") == ScoreMetric::Absolute);
  CHECK(to_string(ScoreMetric::Relative) == "relative");
}

TEST_CASE("None always picks the baseline") {
  AgentContext ctx;
  for (auto c : kAllClassifiers) CHECK(decide(AgentKind::None, {"x", c}, ctx) == P::None);
}

TEST_CASE("Mode picks the most frequent winner") {
  ModeStatistics mode;
  mode.set_count(C::LR, P::SS, 5);
  mode.set_count(C::LR, P::MMS, 3);
  AgentContext ctx;
  ctx.mode = &mode;
  CHECK(decide(AgentKind::Mode, {"x", C::LR}, ctx) == P::SS);

  mode.set_count(C::LR, P::None, 7);
  CHECK(decide(AgentKind::Mode, {"x", C::LR}, ctx) == P::None);
  ctx.mode_includes_none = false;
  CHECK(decide(AgentKind::Mode, {"x", C::LR}, ctx) == P::SS);

  mode.set_count(C::LR, P::MMS, 5);  // tie with SS; MMS comes first
  CHECK(decide(AgentKind::Mode, {"x", C::LR}, ctx) == P::MMS);

  std::vector<std::string> warnings;
  ctx.warn = [&](const std::string& w) { warnings.push_back(w); };
  CHECK(decide(AgentKind::Mode, {"x", C::GNB}, ctx) == P::None);
  CHECK(warnings.size() == 1);
}

TEST_CASE("Mode statistics from a store") {
  ResultsStore store;
  store.append(record("a", P::None, C::LR, 1, 0.5));
  store.append(record("a", P::SS, C::LR, 1, 0.6));
  store.append(record("a", P::MMS, C::LR, 1, 0.7));
  store.append(record("b", P::None, C::LR, 1, 0.5));
  store.append(record("b", P::SS, C::LR, 1, 0.5));
  const auto mode = ModeStatistics::from_store(store);
  CHECK(mode.count(C::LR, P::SS) == 1);
  CHECK(mode.count(C::LR, P::MMS) == 1);
  CHECK(mode.count(C::LR, P::None) == 1);
  CHECK(mode.datasets(C::LR) == 2);
  CHECK(mode.datasets(C::GNB) == 0);
  CHECK_FALSE(mode.empty());
  CHECK(ModeStatistics{}.empty());
}

TEST_CASE("Oracle with no predicted helpers chooses None") {
  ModeStatistics mode;
  mode.set_count(C::KNN, P::PCA, 4);
  CHECK(oracle_choice(mode, C::KNN, {}) == P::None);
}

TEST_CASE("Oracle with every helper predicted matches Mode without None") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    ModeStatistics mode;
    for (auto p : kAllPreprocessors) mode.set_count(C::SVC, p, uniform_index(rng, 6));
    std::array<bool, 8> all{};
    all.fill(true);
    AgentContext ctx;
    ctx.mode = &mode;
    ctx.mode_includes_none = false;
    CHECK(oracle_choice(mode, C::SVC, all) == decide(AgentKind::Mode, {"x", C::SVC}, ctx));
  }
}

TEST_CASE("Oracle restricts Mode to the predicted helpers") {
  ModeStatistics mode;
  mode.set_count(C::RFC, P::SS, 9);
  mode.set_count(C::RFC, P::PF, 2);
  mode.set_count(C::RFC, P::FA, 1);
  std::array<bool, 8> helps{};
  helps[*preprocessor_slot(P::PF)] = true;
  helps[*preprocessor_slot(P::FA)] = true;
  CHECK(oracle_choice(mode, C::RFC, helps) == P::PF);
}

TEST_CASE("Random is uniform over the nine options") {
  std::array<int, 9> counts{};
  AgentContext ctx;
  ctx.seed = 21;
  const int n = 9000;
  for (int i = 0; i < n; ++i) {
    const auto p = decide(AgentKind::Random, {"d" + std::to_string(i), C::LR}, ctx);
    ++counts[static_cast<std::size_t>(p)];
  }
  for (int c : counts) CHECK(std::abs(c - n / 9) <= 0.03 * n);
  CHECK(decide(AgentKind::Random, {"d1", C::LR}, ctx) == decide(AgentKind::Random, {"d1", C::LR}, ctx));
}

TEST_CASE("task scoring") {
  ResultsStore store;
  store.append(record("a", P::None, C::LR, 1, 0.7));
  store.append(record("a", P::SS, C::LR, 1, 0.8));
  store.append(record("a", P::PCA, C::LR, 1, 0.9));
  store.append(testutil::failed("a", P::ICA, C::LR));
  const Task task{"a", C::LR};

  const auto s = score_task(P::SS, task, store);
  REQUIRE(s.has_value());
  CHECK(s->pct_worse == doctest::Approx(-100.0 / 9.0));
  CHECK(s->best_accuracy == 0.9);
  CHECK(score_task(P::SS, task, store, ScoreMetric::Absolute)->pct_worse == doctest::Approx(-10.0));
  CHECK(score_task(P::PCA, task, store)->pct_worse == 0.0);

  const auto fallback = score_task(P::ICA, task, store);
  CHECK(fallback->chosen == P::ICA);
  CHECK(fallback->used == P::None);
  CHECK(fallback->accuracy == 0.7);

  AgentContext ctx;
  ctx.test_store = &store;
  CHECK(decide(AgentKind::Optimal, task, ctx) == P::PCA);

  ResultsStore broken;
  broken.append(testutil::failed("b", P::None, C::LR));
  broken.append(record("b", P::SS, C::LR, 1, 0.8));
  CHECK_FALSE(score_task(P::SS, {"b", C::LR}, broken).has_value());
  ResultsStore zero;
  zero.append(record("z", P::None, C::LR, 1, 0.0));
  CHECK_FALSE(score_task(P::None, {"z", C::LR}, zero).has_value());
}

TEST_CASE("Optimal breaks ties toward the earlier enum member") {
  ResultsStore store;
  store.append(record("a", P::None, C::GNB, 1, 0.5));
  store.append(record("a", P::PF, C::GNB, 1, 0.8));
  store.append(record("a", P::MMS, C::GNB, 1, 0.8));
  AgentContext ctx;
  ctx.test_store = &store;
  CHECK(decide(AgentKind::Optimal, {"a", C::GNB}, ctx) == P::MMS);
}

TEST_CASE("simulation needs datasets on both sides") {
  const auto store = ss_dominates(1);
  CHECK_THROWS_AS(simulate(store, zero_metafeatures(store), 1), std::invalid_argument);
}

TEST_CASE("simulation on a store where SS always wins") {
  const auto store = ss_dominates(10);
  const auto report = simulate(store, zero_metafeatures(store), 3);
  CHECK(report.train_datasets.size() == 7);
  CHECK(report.test_datasets.size() == 3);
  CHECK(report.skipped_tasks == 0);
  const auto& rows = report.agents;
  for (const auto& r : rows) {
    CHECK(r.tasks == 18);
    CHECK(r.mean_pct_worse <= 1e-12);
  }
  CHECK(rows[2].agent == AgentKind::Mode);
  CHECK(rows[2].mean_pct_worse == doctest::Approx(0.0));
  CHECK(rows[3].mean_pct_worse == doctest::Approx(0.0));
  CHECK(rows[4].mean_pct_worse == 0.0);
  CHECK(rows[4].std_pct_worse == 0.0);
  CHECK(rows[0].mean_pct_worse < 0.0);
  CHECK(report.log.size() == 5 * 18);

  std::ostringstream csv, log;
  write_simulation_csv(csv, report);
  CHECK(csv.str().rfind("agent,mean_pct_worse,std_pct_worse,n_tasks\n", 0) == 0);
  write_decision_log(log, report);
  CHECK(log.str().find("\"pct_worse\"") != std::string::npos);

  testutil::TempDir dir;
  testutil::write_file(dir / "t3.csv", csv.str());
  const auto back = read_simulation_csv(dir / "t3.csv");
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back[i].agent == rows[i].agent);
    CHECK(back[i].mean_pct_worse == doctest::Approx(rows[i].mean_pct_worse));
    CHECK(back[i].tasks == rows[i].tasks);
  }
}

TEST_CASE("test datasets without metafeatures are left out") {
  const auto store = ss_dominates(10);
  auto mf = zero_metafeatures(store);
  const auto full = simulate(store, mf, 3);
  mf.erase(full.test_datasets.front());
  const auto report = simulate(store, mf, 3);
  CHECK(report.skipped_tasks == 6);
  for (const auto& r : report.agents) CHECK(r.tasks == 12);
}

TEST_CASE("simulation is deterministic and never beats Optimal") {
  Rng rng(8);
  ResultsStore store;
  MetafeatureMap mf;
  for (int d = 0; d < 12; ++d) {
    const std::string id = "r" + std::to_string(d);
    MetafeatureVector v;
    for (auto& x : v.values) x = uniform_unit(rng);
    mf[id] = v;
    for (auto p : kAllPreprocessors) {
      for (auto c : kAllClassifiers) {
        if (p != P::None && uniform_unit(rng) < 0.05) {
          store.append(testutil::failed(id, p, c));
        } else {
          store.append(record(id, p, c, 1, 0.3 + 0.6 * uniform_unit(rng)));
        }
      }
    }
  }
  for (auto metric : {ScoreMetric::Relative, ScoreMetric::Absolute}) {
    SimulationOptions opts;
    opts.metric = metric;
    const auto a = simulate(store, mf, 4, opts);
    const auto b = simulate(store, mf, 4, opts);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(a.agents[i].mean_pct_worse == b.agents[i].mean_pct_worse);
      CHECK(a.agents[i].mean_pct_worse <= 1e-12);
    }
    for (const auto& e : a.log) CHECK(e.score.pct_worse <= 1e-12);
  }
}
