#ifndef PIPEMETA_TESTS_HELPERS_HPP_
#define PIPEMETA_TESTS_HELPERS_HPP_

#include "pipemeta/data.hpp"
#include "pipemeta/runner.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

namespace testutil {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("pipemeta_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream(p) << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline pipemeta::Column numeric(const std::string& name, std::vector<double> values) {
  pipemeta::Column c;
  c.name = name;
  c.kind = pipemeta::ColumnKind::Numeric;
  c.missing.assign(values.size(), false);
  c.numbers = std::move(values);
  return c;
}

inline pipemeta::Column categorical(const std::string& name, std::vector<std::string> values) {
  pipemeta::Column c;
  c.name = name;
  c.kind = pipemeta::ColumnKind::Categorical;
  c.missing.assign(values.size(), false);
  c.labels = std::move(values);
  return c;
}

/// Uniform entries in [-scale, scale] from a seeded generator.
inline pipemeta::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  pipemeta::Rng rng(seed);
  pipemeta::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * (2.0 * pipemeta::uniform_unit(rng) - 1.0);
  }
  return m;
}

inline pipemeta::Labels alternating_labels(Eigen::Index n, int classes = 2) {
  pipemeta::Labels y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = static_cast<int>(i % classes);
  return y;
}

/// An ok record with the given accuracies and train time.
inline pipemeta::ExperimentRecord record(const std::string& id, pipemeta::PreprocessorKind p,
                                         pipemeta::ClassifierKind c, double train_acc, double test_acc,
                                         double train_time = 1.0, double test_time = 1.0) {
  pipemeta::ExperimentRecord r;
  r.spec = {id, p, c, 0};
  r.status = pipemeta::RunStatus::Ok;
  r.train_acc = train_acc;
  r.test_acc = test_acc;
  r.train_time_s = train_time;
  r.test_time_s = test_time;
  return r;
}

inline pipemeta::ExperimentRecord failed(const std::string& id, pipemeta::PreprocessorKind p,
                                         pipemeta::ClassifierKind c) {
  pipemeta::ExperimentRecord r;
  r.spec = {id, p, c, 0};
  r.status = pipemeta::RunStatus::ConvergenceError;
  r.error_detail = "did not converge";
  return r;
}

}  // namespace testutil

#endif  // PIPEMETA_TESTS_HELPERS_HPP_
