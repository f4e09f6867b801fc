#include "pipemeta/runner.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <new>
#include <thread>

namespace pipemeta {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct PreparedDataset {
  std::string id;
  std::optional<PreparedTask> task;
  std::string error;
};

PreparedDataset prepare_dataset(const RawDataset& raw, const RunOptions& options) {
  PreparedDataset out;
  out.id = raw.id;
  try {
    out.task = prepare(raw, dataset_seed(options.seed, raw.id), options.clean_mode, options.split_ratio);
  } catch (const std::exception& e) {
    out.error = std::string("dataset preparation failed: ") + e.what();
  }
  return out;
}

ExperimentRecord execute(const PipelineSpec& spec, const PreparedDataset& dataset) {
  if (!dataset.task) {
    ExperimentRecord record;
    record.spec = spec;
    record.status = RunStatus::OtherError;
    record.error_detail = dataset.error;
    return record;
  }
  return run_pipeline(spec, dataset.task->clean, dataset.task->split);
}

}  // namespace

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Ok: return "ok";
    case RunStatus::ConvergenceError: return "convergence_error";
    case RunStatus::ResourceError: return "resource_error";
    case RunStatus::OtherError: return "other_error";
  }
  return "other_error";
}

std::optional<RunStatus> parse_status(const std::string& text) {
  for (auto s : {RunStatus::Ok, RunStatus::ConvergenceError, RunStatus::ResourceError, RunStatus::OtherError}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::uint64_t dataset_seed(std::uint64_t run_seed, const std::string& dataset_id) {
  return derive_seed(run_seed, dataset_id);
}

std::uint64_t transform_seed(const PipelineSpec& spec) {
  return derive_seed(spec.seed, "transform", to_string(spec.preproc));
}

std::uint64_t classifier_seed(const PipelineSpec& spec) {
  return derive_seed(spec.seed, "classifier", to_string(spec.clf));
}

std::vector<PipelineSpec> enumerate_pipelines(const std::vector<std::string>& dataset_ids, std::uint64_t run_seed) {
  std::vector<PipelineSpec> specs;
  specs.reserve(dataset_ids.size() * kAllPreprocessors.size() * kAllClassifiers.size());
  for (const auto& id : dataset_ids) {
    const auto seed = dataset_seed(run_seed, id);
    for (auto preproc : kAllPreprocessors) {
      for (auto clf : kAllClassifiers) specs.push_back({id, preproc, clf, seed});
    }
  }
  return specs;
}

ExperimentRecord run_pipeline(const PipelineSpec& spec, const CleanDataset& clean, const TaskSplit& split) {
  ExperimentRecord record;
  record.spec = spec;
  const Matrix X_train = take_rows(clean.X, split.train_idx);
  const Labels y_train = take_rows(clean.y, split.train_idx);
  const Matrix X_test = take_rows(clean.X, split.test_idx);
  const Labels y_test = take_rows(clean.y, split.test_idx);
  record.out_dim = output_dimension(spec.preproc, X_train.cols(), X_train.rows());

  auto start = Clock::now();
  bool training = true;
  try {
    const auto transform = fit(spec.preproc, X_train, y_train, transform_seed(spec));
    record.out_dim = transform.out_dim();
    const Matrix Z_train = transform.transform(X_train);
    const auto model = train(spec.clf, Z_train, y_train, classifier_seed(spec));
    record.train_time_s = seconds_since(start);
    training = false;

    start = Clock::now();
    const Labels test_pred = model.predict(transform.transform(X_test));
    record.test_time_s = seconds_since(start);

    record.test_acc = accuracy(test_pred, y_test);
    record.train_acc = accuracy(model.predict(Z_train), y_train);
    record.status = RunStatus::Ok;
  } catch (const ConvergenceError& e) {
    record.status = RunStatus::ConvergenceError;
    record.error_detail = e.what();
  } catch (const ResourceError& e) {
    record.status = RunStatus::ResourceError;
    record.error_detail = e.what();
  } catch (const std::bad_alloc&) {
    record.status = RunStatus::ResourceError;
    record.error_detail = "out of memory";
  } catch (const std::exception& e) {
    record.status = RunStatus::OtherError;
    record.error_detail = e.what();
  }
  if (!record.ok()) {
    (training ? record.train_time_s : record.test_time_s) = seconds_since(start);
    record.train_acc.reset();
    record.test_acc.reset();
  }
  return record;
}

void ResultsStore::append(ExperimentRecord record) {
  RecordKey key{record.spec.dataset_id, record.spec.preproc, record.spec.clf};
  if (index_.count(key)) {
    throw std::invalid_argument("duplicate record for " + record.spec.dataset_id + "/" +
                                to_string(record.spec.preproc) + "/" + to_string(record.spec.clf));
  }
  index_.emplace(std::move(key), records_.size());
  records_.push_back(std::move(record));
}

const ExperimentRecord* ResultsStore::find(const std::string& dataset_id, PreprocessorKind preproc,
                                           ClassifierKind clf) const {
  const auto it = index_.find(RecordKey{dataset_id, preproc, clf});
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<std::string> ResultsStore::dataset_ids() const {
  std::vector<std::string> ids;
  for (const auto& r : records_) {
    if (std::find(ids.begin(), ids.end(), r.spec.dataset_id) == ids.end()) ids.push_back(r.spec.dataset_id);
  }
  return ids;
}

ResultsStore ResultsStore::filter_datasets(const std::vector<std::string>& ids) const {
  ResultsStore out;
  for (const auto& r : records_) {
    if (std::find(ids.begin(), ids.end(), r.spec.dataset_id) != ids.end()) out.append(r);
  }
  return out;
}

std::string to_json_line(const ExperimentRecord& r) {
  json j;
  j["dataset_id"] = r.spec.dataset_id;
  j["preproc"] = to_string(r.spec.preproc);
  j["clf"] = to_string(r.spec.clf);
  j["seed"] = r.spec.seed;
  j["status"] = to_string(r.status);
  j["train_time_s"] = r.train_time_s;
  j["test_time_s"] = r.test_time_s;
  j["train_acc"] = r.train_acc ? json(*r.train_acc) : json(nullptr);
  j["test_acc"] = r.test_acc ? json(*r.test_acc) : json(nullptr);
  j["out_dim"] = r.out_dim;
  j["error_detail"] = r.error_detail;
  return j.dump();
}

ExperimentRecord from_json_line(const std::string& line) {
  const json j = json::parse(line);
  ExperimentRecord r;
  r.spec.dataset_id = j.at("dataset_id").get<std::string>();
  const auto preproc = parse_preprocessor(j.at("preproc").get<std::string>());
  const auto clf = parse_classifier(j.at("clf").get<std::string>());
  const auto status = parse_status(j.at("status").get<std::string>());
  if (!preproc || !clf || !status) throw std::invalid_argument("unrecognised enum value in record: " + line);
  r.spec.preproc = *preproc;
  r.spec.clf = *clf;
  r.spec.seed = j.at("seed").get<std::uint64_t>();
  r.status = *status;
  r.train_time_s = j.at("train_time_s").get<double>();
  r.test_time_s = j.at("test_time_s").get<double>();
  if (!j.at("train_acc").is_null()) r.train_acc = j.at("train_acc").get<double>();
  if (!j.at("test_acc").is_null()) r.test_acc = j.at("test_acc").get<double>();
  r.out_dim = j.at("out_dim").get<Eigen::Index>();
  r.error_detail = j.at("error_detail").get<std::string>();
  if (r.ok() != (r.train_acc.has_value() && r.test_acc.has_value())) {
    throw std::invalid_argument("record accuracies inconsistent with status: " + line);
  }
  return r;
}

ResultsStore read_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  ResultsStore store;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      store.append(from_json_line(lines[i]));
    } catch (const json::exception&) {
      if (i + 1 == lines.size()) break;
      throw std::runtime_error(path.string() + ": malformed record on line " + std::to_string(i + 1));
    }
  }
  return store;
}

void write_results(const ResultsStore& store, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write results file " + path.string());
  for (const auto& r : store.records()) out << to_json_line(r) << '\n';
}

namespace {

// Executes `pending` on `jobs` workers and hands each record, in order, to
// `sink`. Workers only compute; the calling thread is the single writer.
void execute_in_order(const std::vector<PipelineSpec>& pending, const std::map<std::string, PreparedDataset>& prepared,
                      int jobs, const std::function<void(const ExperimentRecord&)>& sink) {
  std::vector<std::optional<ExperimentRecord>> slots(pending.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      auto record = execute(pending[i], prepared.at(pending[i].dataset_id));
      {
        std::lock_guard lock(mutex);
        slots[i] = std::move(record);
      }
      ready.notify_all();
    }
  };
  std::vector<std::thread> workers;
  for (int w = 0; w < std::max(1, jobs); ++w) workers.emplace_back(worker);

  for (std::size_t i = 0; i < pending.size(); ++i) {
    ExperimentRecord record;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return slots[i].has_value(); });
      record = std::move(*slots[i]);
      slots[i].reset();
    }
    sink(record);
  }
  for (auto& t : workers) t.join();
}

}  // namespace

RunSummary run_experiments(const fs::path& data_dir, const fs::path& out, const RunOptions& options) {
  const auto files = discover_datasets(data_dir);
  if (files.empty()) throw std::runtime_error("no datasets (*.csv with .schema sidecar) in " + data_dir.string());

  std::map<std::string, PreparedDataset> prepared;
  std::vector<std::string> ids;
  for (const auto& file : files) {
    ids.push_back(file.id);
    try {
      prepared.emplace(file.id, prepare_dataset(load_dataset(file), options));
    } catch (const std::exception& e) {
      PreparedDataset failed;
      failed.id = file.id;
      failed.error = std::string("dataset load failed: ") + e.what();
      prepared.emplace(file.id, std::move(failed));
    }
    if (!prepared.at(file.id).error.empty() && options.warn) options.warn(prepared.at(file.id).error);
  }

  ResultsStore existing;
  if (fs::exists(out)) {
    existing = read_results(out);
    write_results(existing, out);  // drops a truncated trailing line, if any
  }

  RunSummary summary;
  const auto specs = enumerate_pipelines(ids, options.seed);
  summary.total_specs = specs.size();
  std::vector<PipelineSpec> pending;
  for (const auto& spec : specs) {
    if (existing.contains(RecordKey{spec.dataset_id, spec.preproc, spec.clf})) {
      ++summary.skipped_existing;
    } else {
      pending.push_back(spec);
    }
  }
  if (options.max_new_records && pending.size() > *options.max_new_records) pending.resize(*options.max_new_records);

  std::ofstream sink(out, std::ios::app);
  if (!sink) throw std::runtime_error("cannot write results file " + out.string());
  execute_in_order(pending, prepared, options.jobs, [&](const ExperimentRecord& record) {
    sink << to_json_line(record) << '\n';
    sink.flush();
    ++summary.executed;
    if (!record.ok()) ++summary.failed;
  });
  return summary;
}

ResultsStore run_all(const std::vector<RawDataset>& datasets, const RunOptions& options) {
  std::map<std::string, PreparedDataset> prepared;
  std::vector<std::string> ids;
  for (const auto& raw : datasets) {
    ids.push_back(raw.id);
    prepared.emplace(raw.id, prepare_dataset(raw, options));
  }
  auto specs = enumerate_pipelines(ids, options.seed);
  if (options.max_new_records && specs.size() > *options.max_new_records) specs.resize(*options.max_new_records);
  ResultsStore store;
  execute_in_order(specs, prepared, options.jobs, [&](const ExperimentRecord& r) { store.append(r); });
  return store;
}

}  // namespace pipemeta
