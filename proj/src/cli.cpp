#include "pipemeta/cli.hpp"

#include "pipemeta/agents.hpp"
#include "pipemeta/analytics.hpp"
#include "pipemeta/metafeatures.hpp"
#include "pipemeta/metalearning.hpp"
#include "pipemeta/runner.hpp"
#include "pipemeta/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace fs = std::filesystem;

namespace pipemeta {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw std::runtime_error(what + " not found: " + p.string());
}

void require_dir(const fs::path& p, const std::string& what) {
  if (!fs::is_directory(p)) throw std::runtime_error(what + " not found: " + p.string());
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void distinct_paths(const std::vector<fs::path>& paths) {
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      if (fs::weakly_canonical(paths[i]) == fs::weakly_canonical(paths[j])) {
        throw std::runtime_error("input and output paths must differ: " + paths[i].string());
      }
    }
  }
}

const std::vector<std::string> kCleanModes = {"pre-split", "post-split"};
const std::vector<std::string> kComparators = {"strict", "ge"};

struct Settings {
  std::uint64_t seed = 0;
  std::size_t n = 12;
  int jobs = 1;
  double split = 0.7;
  double truncate = 3.0;
  std::string clean_mode = "pre-split";
  std::string comparator = "strict";
  std::string label_comparator = "ge";
  std::string metric = "relative";
  std::string report_kind;
  bool pooled = false;
  bool mode_includes_none = true;
  fs::path data_dir, out, results, metafeatures, meta, report, log, csv;
};

CLI::Option* add_seed(CLI::App* cmd, Settings& s) {
  return cmd->add_option("--seed", s.seed, "Root seed for all randomness")->envname("PIPEMETA_SEED")->required();
}

int cmd_synth(const Settings& s, std::ostream& out) {
  const auto files = write_synthetic_corpus(s.out, s.n, s.seed);
  out << "wrote " << files.size() << " datasets to " << s.out.string() << "\n";
  return 0;
}

int cmd_run(const Settings& s, std::ostream& out, std::ostream& err) {
  require_dir(s.data_dir, "data directory");
  distinct_paths({s.data_dir, s.out});
  RunOptions opts;
  opts.seed = s.seed;
  opts.jobs = s.jobs;
  opts.clean_mode = parse_clean_mode(s.clean_mode);
  opts.split_ratio = s.split;
  opts.warn = [&err](const std::string& m) { err << "warning: " << m << "\n"; };
  if (s.out.has_parent_path()) fs::create_directories(s.out.parent_path());
  const auto summary = run_experiments(s.data_dir, s.out, opts);
  out << "pipelines: " << summary.total_specs << ", already present: " << summary.skipped_existing
      << ", executed: " << summary.executed << ", failed: " << summary.failed << "\n";
  return 0;
}

int cmd_metafeatures(const Settings& s, std::ostream& out, std::ostream& err) {
  require_dir(s.data_dir, "data directory");
  distinct_paths({s.data_dir, s.out});
  const auto mode = parse_clean_mode(s.clean_mode);
  MetafeatureMap features;
  for (const auto& file : discover_datasets(s.data_dir)) {
    try {
      features[file.id] = extract_for_run(load_dataset(file), s.seed, mode, s.split);
    } catch (const std::exception& e) {
      err << "warning: skipping " << file.id << ": " << e.what() << "\n";
    }
  }
  if (features.empty()) throw std::runtime_error("no metafeatures could be extracted from " + s.data_dir.string());
  if (s.out.has_parent_path()) fs::create_directories(s.out.parent_path());
  write_metafeatures_csv(features, s.out);
  out << "wrote metafeatures for " << features.size() << " datasets\n";
  return 0;
}

int cmd_metadataset(const Settings& s, std::ostream& out, std::ostream& err) {
  require_file(s.results, "results file");
  require_file(s.metafeatures, "metafeatures file");
  distinct_paths({s.results, s.metafeatures, s.out});
  const auto instances = build_metadataset(read_results(s.results), read_metafeatures_csv(s.metafeatures),
                                           parse_comparator(s.label_comparator),
                                           [&err](const std::string& m) { err << "warning: " << m << "\n"; });
  if (s.out.has_parent_path()) fs::create_directories(s.out.parent_path());
  write_metadataset_csv(instances, s.out);
  std::size_t positive = 0;
  for (const auto& i : instances) positive += i.label;
  out << "wrote " << instances.size() << " instances (" << positive << " labelled 1)\n";
  return 0;
}

int cmd_train_meta(const Settings& s, std::ostream& out) {
  require_file(s.meta, "metadataset");
  const auto instances = read_metadataset_csv(s.meta);
  if (instances.empty()) throw std::runtime_error("metadataset is empty: " + s.meta.string());
  const auto report = train_and_evaluate(instances, s.seed, s.split, s.pooled);

  auto emit = [&](std::ostream& os, bool csv) {
    if (csv) {
      os << "clf,accuracy,mode_baseline_accuracy,instances\n" << std::setprecision(17);
    } else {
      os << "Metamodel holdout accuracy (" << report.train_datasets.size() << " train / "
         << report.test_datasets.size() << " test datasets)\n"
         << std::left << std::setw(8) << "Clf" << std::setw(12) << "Accuracy" << std::setw(12) << "Mode"
         << "Instances\n" << std::fixed << std::setprecision(4);
    }
    auto row = [&](const std::string& name, const MetaEvaluation& e) {
      if (csv) {
        os << name << ',' << e.accuracy << ',' << e.mode_baseline_accuracy << ',' << e.instances << '\n';
      } else {
        os << std::setw(8) << name << std::setw(12) << e.accuracy << std::setw(12) << e.mode_baseline_accuracy
           << e.instances << "\n";
      }
    };
    for (const auto& [clf, e] : report.per_classifier) row(to_string(clf), e);
    row("all", report.overall);
    os << std::defaultfloat << std::right;
  };
  emit(out, false);
  if (!s.report.empty()) {
    auto f = open_out(s.report);
    emit(f, true);
  }
  return 0;
}

int cmd_simulate(const Settings& s, std::ostream& out, std::ostream& err) {
  require_file(s.results, "results file");
  require_file(s.metafeatures, "metafeatures file");
  distinct_paths({s.results, s.metafeatures, s.out});
  SimulationOptions opts;
  opts.split_ratio = s.split;
  const auto metric = parse_metric(s.metric);
  if (!metric) throw std::runtime_error("unknown metric " + s.metric);
  opts.metric = *metric;
  opts.mode_includes_none = s.mode_includes_none;
  opts.pooled_metamodel = s.pooled;
  opts.label_rule = parse_comparator(s.label_comparator);
  opts.warn = [&err](const std::string& m) { err << "warning: " << m << "\n"; };
  const auto report = simulate(read_results(s.results), read_metafeatures_csv(s.metafeatures), s.seed, opts);
  {
    auto f = open_out(s.out);
    write_simulation_csv(f, report);
  }
  if (!s.log.empty()) {
    auto f = open_out(s.log);
    write_decision_log(f, report);
  }
  print_table3(out, report.agents);
  return 0;
}

int cmd_report(const Settings& s, std::ostream& out, std::ostream& err) {
  if (s.report_kind == "table3") {
    if (s.report.empty()) {
      throw std::runtime_error("table3 needs a simulation report (--report); run `pipemeta simulate` first");
    }
    require_file(s.report, "simulation report");
    const auto rows = read_simulation_csv(s.report);
    print_table3(out, rows);
    if (!s.csv.empty()) {
      auto f = open_out(s.csv);
      SimulationReport r;
      r.agents = rows;
      write_simulation_csv(f, r);
    }
    return 0;
  }
  if (s.results.empty()) throw std::runtime_error(s.report_kind + " needs --results");
  require_file(s.results, "results file");
  const auto store = read_results(s.results);
  std::optional<std::ofstream> csv;
  if (!s.csv.empty()) csv = open_out(s.csv);

  if (s.report_kind == "table1") {
    const auto t = improvement_counts(store, parse_comparator(s.comparator));
    print_table1(out, t);
    if (csv) write_table1_csv(*csv, t);
  } else if (s.report_kind == "table2") {
    const auto d = accuracy_deltas(store);
    print_table2(out, d);
    if (csv) write_table2_csv(*csv, d);
  } else if (s.report_kind == "fig1") {
    const auto h = runtime_histogram(store, s.truncate, 0.1,
                                     [&err](const std::string& m) { err << "warning: " << m << "\n"; });
    print_histograms(out, h);
    if (csv) write_histograms_csv(*csv, h);
  } else {
    print_summary(out, summarize(store));
  }
  return 0;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  std::optional<fs::path> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!config) return kept;

  std::ifstream in(*config);
  if (!in) throw std::runtime_error("cannot read config file " + config->string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(config->string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) != 0) key = "--" + key;
    const bool given = std::any_of(kept.begin(), kept.end(), [&](const std::string& a) {
      return a == key || a.rfind(key + "=", 0) == 0;
    });
    if (!given) kept.push_back(key + "=" + value);
  }
  return kept;
}

int cli_main(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Preprocessing pipeline benchmark and metalearning workbench", "pipemeta"};
  app.require_subcommand(1);
  app.add_option("--config", "key=value file supplying defaults for any flag");

  auto* datasets = app.add_subcommand("datasets", "Dataset utilities");
  datasets->require_subcommand(1);
  auto* synth = datasets->add_subcommand("synth", "Write a synthetic dataset corpus");
  synth->add_option("--n", s.n, "Number of datasets")->check(CLI::PositiveNumber);
  synth->add_option("--out", s.out, "Output directory")->required();
  add_seed(synth, s);

  auto* run = app.add_subcommand("run", "Run every pipeline on every dataset");
  run->add_option("--data-dir", s.data_dir, "Directory of CSV datasets with .schema sidecars")->required();
  run->add_option("--out", s.out, "Results file (JSON lines); existing records are kept")->required();
  add_seed(run, s);
  run->add_option("--jobs", s.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--clean-mode", s.clean_mode, "Fit cleaning before or after the split")
      ->check(CLI::IsMember(kCleanModes));
  run->add_option("--split", s.split, "Train fraction")->check(CLI::Range(0.0, 1.0));

  auto* mf = app.add_subcommand("metafeatures", "Extract the 41 metafeatures per dataset");
  mf->add_option("--data-dir", s.data_dir, "Dataset directory")->required();
  mf->add_option("--out", s.out, "Output CSV")->required();
  add_seed(mf, s);
  mf->add_option("--clean-mode", s.clean_mode, "Must match the run")->check(CLI::IsMember(kCleanModes));
  mf->add_option("--split", s.split, "Train fraction")->check(CLI::Range(0.0, 1.0));

  auto* md = app.add_subcommand("metadataset", "Label every preprocessed pipeline against its baseline");
  md->add_option("--results", s.results, "Results file")->required();
  md->add_option("--metafeatures", s.metafeatures, "Metafeature CSV")->required();
  md->add_option("--out", s.out, "Output CSV")->required();
  md->add_option("--label-comparator", s.label_comparator, "Label 1 when accuracy is strictly / at least baseline")
      ->check(CLI::IsMember(kComparators));

  auto* tm = app.add_subcommand("train-meta", "Train and evaluate metamodels on a dataset-level split");
  tm->add_option("--meta", s.meta, "Metadataset CSV")->required();
  add_seed(tm, s);
  tm->add_option("--split", s.split, "Train fraction of datasets")->check(CLI::Range(0.0, 1.0));
  tm->add_option("--report", s.report, "Print the evaluation; with a path, also write it as CSV")->expected(0, 1);
  tm->add_flag("--pooled", s.pooled, "One metamodel across classifiers");

  auto* sim = app.add_subcommand("simulate", "Score the AutoML agents against the optimal choice");
  sim->add_option("--results", s.results, "Results file")->required();
  sim->add_option("--metafeatures", s.metafeatures, "Metafeature CSV")->required();
  add_seed(sim, s);
  sim->add_option("--split", s.split, "Train fraction of datasets")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--out", s.out, "Report CSV")->required();
  sim->add_option("--log", s.log, "Per-task decision log (JSON lines)");
  sim->add_option("--metric", s.metric, "Percent-worse formula")->check(CLI::IsMember({"relative", "absolute"}));
  sim->add_option("--mode-includes-none", s.mode_includes_none, "Let the Mode agent choose no preprocessing");
  sim->add_flag("--pooled", s.pooled, "One metamodel across classifiers");
  sim->add_option("--label-comparator", s.label_comparator, "Metamodel label rule")
      ->check(CLI::IsMember(kComparators));

  auto* rep = app.add_subcommand("report", "Print result tables");
  rep->add_option("kind", s.report_kind, "table1, table2, fig1, table3 or summary")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "fig1", "table3", "summary"}));
  rep->add_option("--results", s.results, "Results file");
  rep->add_option("--csv", s.csv, "Also write the table as CSV");
  rep->add_option("--comparator", s.comparator, "Accuracy rule for table1")->check(CLI::IsMember(kComparators));
  rep->add_option("--report", s.report, "Simulation report CSV (table3)");
  rep->add_option("--truncate", s.truncate, "Histogram truncation point (fig1)")->check(CLI::PositiveNumber);

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "pipemeta: " << e.what() << "\n";
    const CLI::App* failed = &app;
    for (auto* sub : {datasets, synth, run, mf, md, tm, sim, rep}) {
      if (sub->parsed()) failed = sub;
    }
    err << failed->help();
    return 2;
  } catch (const std::exception& e) {
    err << "pipemeta: error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(s, out);
    if (run->parsed()) return cmd_run(s, out, err);
    if (mf->parsed()) return cmd_metafeatures(s, out, err);
    if (md->parsed()) return cmd_metadataset(s, out, err);
    if (tm->parsed()) return cmd_train_meta(s, out);
    if (sim->parsed()) return cmd_simulate(s, out, err);
    if (rep->parsed()) return cmd_report(s, out, err);
  } catch (const std::exception& e) {
    err << "pipemeta: error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace pipemeta
