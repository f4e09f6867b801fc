#include "pipemeta/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace pipemeta {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd population_mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

void add(ImprovementCell& into, const ImprovementCell& c, double weight) {
  into.faster_train += weight * c.faster_train;
  into.more_accurate += weight * c.more_accurate;
  into.both += weight * c.both;
}

std::string triple(const ImprovementCell& c) {
  std::ostringstream os;
  os << std::setprecision(3) << c.faster_train << "," << c.more_accurate << "," << c.both;
  return os.str();
}

std::string percent(double v, int precision = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v << "%";
  return os.str();
}

RuntimeHistogram bin_values(const std::vector<double>& values, double truncate_at, double bin_width) {
  RuntimeHistogram h;
  h.total = values.size();
  if (values.empty()) return h;
  const auto n_bins = static_cast<std::size_t>(std::max(1L, std::lround((truncate_at + 1.0) / bin_width)));
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double left = -1.0 + static_cast<double>(b) * bin_width;
    h.bins.push_back({left, b + 1 == n_bins ? truncate_at : left + bin_width, 0});
  }
  h.max_value = *std::max_element(values.begin(), values.end());
  for (double v : values) {
    if (v > truncate_at) {
      ++h.tail_count;
      continue;
    }
    const double pos = std::floor((v + 1.0) / bin_width);
    const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(n_bins - 1)));
    ++h.bins[b].count;
  }
  return h;
}

}  // namespace

double relative_runtime(double t, double t_baseline) {
  if (!(t_baseline > 0.0)) throw std::domain_error("relative runtime needs a positive baseline time");
  return (t - t_baseline) / t_baseline;
}

std::string to_string(Comparator c) { return c == Comparator::Strict ? "strict" : "ge"; }

Comparator parse_comparator(const std::string& text) {
  if (text == "strict" || text == "gt") return Comparator::Strict;
  if (text == "ge") return Comparator::GreaterEqual;
  throw std::invalid_argument("unknown comparator '" + text + "' (expected strict or ge)");
}

bool improves(double value, double baseline, Comparator c) {
  return c == Comparator::Strict ? value > baseline : value >= baseline;
}

std::vector<BaselinePair> baseline_pairs(const ResultsStore& store) {
  std::vector<BaselinePair> pairs;
  for (const auto& r : store.records()) {
    if (r.spec.is_baseline() || !r.ok()) continue;
    const auto* base = store.find(r.spec.dataset_id, PreprocessorKind::None, r.spec.clf);
    if (base == nullptr || !base->ok()) continue;
    pairs.push_back({&r, base});
  }
  return pairs;
}

ImprovementTable improvement_counts(const ResultsStore& store, Comparator accuracy_rule) {
  ImprovementTable t;
  for (const auto& [p, b] : baseline_pairs(store)) {
    auto& cell = t.cells[*preprocessor_slot(p->spec.preproc)][static_cast<std::size_t>(p->spec.clf)];
    const bool faster = p->train_time_s < b->train_time_s;
    const bool better = improves(*p->test_acc, *b->test_acc, accuracy_rule);
    cell.faster_train += faster;
    cell.more_accurate += better;
    cell.both += faster && better;
  }
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      add(t.row_mean[r], t.cells[r][c], 1.0 / 6.0);
      add(t.col_mean[c], t.cells[r][c], 1.0 / 8.0);
      add(t.grand_mean, t.cells[r][c], 1.0 / 48.0);
    }
  }
  return t;
}

std::array<DeltaStats, 8> accuracy_deltas(const ResultsStore& store) {
  std::array<std::vector<double>, 8> train, test;
  for (const auto& [p, b] : baseline_pairs(store)) {
    const auto slot = *preprocessor_slot(p->spec.preproc);
    train[slot].push_back(100.0 * (*p->train_acc - *b->train_acc));
    test[slot].push_back(100.0 * (*p->test_acc - *b->test_acc));
  }
  std::array<DeltaStats, 8> out{};
  for (std::size_t s = 0; s < 8; ++s) {
    const auto tr = population_mean_std(train[s]);
    const auto te = population_mean_std(test[s]);
    out[s] = {tr.mean, tr.std, te.mean, te.std, train[s].size()};
  }
  return out;
}

RuntimeHistograms runtime_histogram(const ResultsStore& store, double truncate_at, double bin_width,
                                    const std::function<void(const std::string&)>& warn) {
  std::vector<double> train, test;
  std::size_t skipped_train = 0, skipped_test = 0;
  for (const auto& [p, b] : baseline_pairs(store)) {
    if (b->train_time_s > 0.0) {
      train.push_back(relative_runtime(p->train_time_s, b->train_time_s));
    } else {
      ++skipped_train;
    }
    if (b->test_time_s > 0.0) {
      test.push_back(relative_runtime(p->test_time_s, b->test_time_s));
    } else {
      ++skipped_test;
    }
  }
  RuntimeHistograms h{bin_values(train, truncate_at, bin_width), bin_values(test, truncate_at, bin_width)};
  h.train.skipped_zero_baseline = skipped_train;
  h.test.skipped_zero_baseline = skipped_test;
  if (warn && skipped_train + skipped_test > 0) {
    warn("skipped " + std::to_string(skipped_train + skipped_test) + " relative runtimes with a zero baseline time");
  }
  return h;
}

CorpusSummary summarize(const ResultsStore& store) {
  CorpusSummary s;
  s.records = store.size();
  std::map<std::string, double> top;
  for (const auto& r : store.records()) {
    if (!r.ok()) continue;
    ++s.ok_records;
    auto [it, inserted] = top.emplace(r.spec.dataset_id, *r.test_acc);
    if (!inserted) it->second = std::max(it->second, *r.test_acc);
  }
  const auto pairs = baseline_pairs(store);
  s.compared_pairs = pairs.size();
  if (!pairs.empty()) {
    double faster_train = 0, faster_test = 0, lower = 0;
    for (const auto& [p, b] : pairs) {
      faster_train += p->train_time_s < b->train_time_s;
      faster_test += p->test_time_s < b->test_time_s;
      lower += *p->test_acc < *b->test_acc;
    }
    const auto n = static_cast<double>(pairs.size());
    s.share_faster_train = faster_train / n;
    s.share_faster_test = faster_test / n;
    s.share_lower_test_acc = lower / n;
  }
  auto share_within = [&](double fraction) {
    double with = 0, total = 0;
    for (const auto& r : store.records()) {
      if (!r.ok()) continue;
      if (*r.test_acc < top.at(r.spec.dataset_id) * (1.0 - fraction)) continue;
      total += 1;
      with += !r.spec.is_baseline();
    }
    return total > 0 ? with / total : 0.0;
  };
  s.top_uses_preproc = share_within(0.0);
  s.within5_uses_preproc = share_within(0.05);
  s.within10_uses_preproc = share_within(0.10);
  return s;
}

void print_table1(std::ostream& os, const ImprovementTable& t) {
  os << "Datasets where the preprocessor improved train time, test accuracy, both\n";
  os << std::left << std::setw(6) << "";
  for (auto clf : kAllClassifiers) os << std::setw(18) << to_string(clf);
  os << std::setw(18) << "Mean" << "\n";
  for (std::size_t r = 0; r < 8; ++r) {
    os << std::setw(6) << to_string(kPreprocessors[r]);
    for (std::size_t c = 0; c < 6; ++c) os << std::setw(18) << triple(t.cells[r][c]);
    os << std::setw(18) << triple(t.row_mean[r]) << "\n";
  }
  os << std::setw(6) << "Mean";
  for (std::size_t c = 0; c < 6; ++c) os << std::setw(18) << triple(t.col_mean[c]);
  os << std::setw(18) << triple(t.grand_mean) << "\n" << std::right;
}

void write_table1_csv(std::ostream& os, const ImprovementTable& t) {
  os << "preproc,clf,faster_train,more_accurate,both\n";
  auto row = [&](const std::string& p, const std::string& c, const ImprovementCell& cell) {
    os << p << ',' << c << ',' << cell.faster_train << ',' << cell.more_accurate << ',' << cell.both << '\n';
  };
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 6; ++c) row(to_string(kPreprocessors[r]), to_string(kAllClassifiers[c]), t.cells[r][c]);
    row(to_string(kPreprocessors[r]), "Mean", t.row_mean[r]);
  }
  for (std::size_t c = 0; c < 6; ++c) row("Mean", to_string(kAllClassifiers[c]), t.col_mean[c]);
  row("Mean", "Mean", t.grand_mean);
}

void print_table2(std::ostream& os, const std::array<DeltaStats, 8>& d) {
  os << "Accuracy above baseline (train, test), percentage points\n";
  os << std::left << std::setw(8) << "Preproc" << std::setw(24) << "Mean" << std::setw(24) << "StdDev" << "Pairs\n";
  for (std::size_t s = 0; s < 8; ++s) {
    os << std::setw(8) << to_string(kPreprocessors[s]) << std::setw(24)
       << (percent(d[s].train_mean) + ", " + percent(d[s].test_mean)) << std::setw(24)
       << (percent(d[s].train_std) + ", " + percent(d[s].test_std)) << d[s].pairs << "\n";
  }
  os << std::right;
}

void write_table2_csv(std::ostream& os, const std::array<DeltaStats, 8>& d) {
  os << "preproc,train_mean_pct,train_std_pct,test_mean_pct,test_std_pct,pairs\n";
  for (std::size_t s = 0; s < 8; ++s) {
    os << to_string(kPreprocessors[s]) << ',' << d[s].train_mean << ',' << d[s].train_std << ',' << d[s].test_mean
       << ',' << d[s].test_std << ',' << d[s].pairs << '\n';
  }
}

void print_histograms(std::ostream& os, const RuntimeHistograms& h) {
  for (const auto* part : {&h.train, &h.test}) {
    os << (part == &h.train ? "Train" : "Test") << " relative runtime above baseline (" << part->total
       << " pipelines, " << part->tail_count << " above truncation, max " << part->max_value << ")\n";
    std::size_t peak = 1;
    for (const auto& b : part->bins) peak = std::max(peak, b.count);
    for (const auto& b : part->bins) {
      os << std::fixed << std::setprecision(1) << std::setw(6) << b.left << " .. " << std::setw(4) << b.right
         << std::defaultfloat << " | " << std::setw(5) << b.count << " "
         << std::string(static_cast<std::size_t>(40.0 * static_cast<double>(b.count) / static_cast<double>(peak)), '#')
         << "\n";
    }
  }
}

void write_histograms_csv(std::ostream& os, const RuntimeHistograms& h) {
  os << "phase,bin_left,bin_right,count\n";
  for (const auto* part : {&h.train, &h.test}) {
    const char* phase = part == &h.train ? "train" : "test";
    for (const auto& b : part->bins) os << phase << ',' << b.left << ',' << b.right << ',' << b.count << '\n';
  }
  os << "# tail summary\nphase,total,tail_count,max_value,skipped_zero_baseline\n";
  for (const auto* part : {&h.train, &h.test}) {
    os << (part == &h.train ? "train" : "test") << ',' << part->total << ',' << part->tail_count << ','
       << part->max_value << ',' << part->skipped_zero_baseline << '\n';
  }
}

void print_summary(std::ostream& os, const CorpusSummary& s) {
  os << "records: " << s.records << " (" << s.ok_records << " ok)\n"
     << "compared non-baseline pipelines: " << s.compared_pairs << "\n"
     << "trained faster than baseline: " << percent(100.0 * s.share_faster_train, 1) << "\n"
     << "predicted faster than baseline: " << percent(100.0 * s.share_faster_test, 1) << "\n"
     << "lower test accuracy than baseline: " << percent(100.0 * s.share_lower_test_acc, 1) << "\n"
     << "top pipelines using a preprocessor: " << percent(100.0 * s.top_uses_preproc, 1) << "\n"
     << "within 5% of top using a preprocessor: " << percent(100.0 * s.within5_uses_preproc, 1) << "\n"
     << "within 10% of top using a preprocessor: " << percent(100.0 * s.within10_uses_preproc, 1) << "\n";
}

}  // namespace pipemeta
