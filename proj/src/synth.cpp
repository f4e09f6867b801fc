#include "pipemeta/synth.hpp"

#include <cmath>
#include <cstdio>

namespace pipemeta {

namespace fs = std::filesystem;

namespace {

std::string class_name(std::size_t k) { return "k" + std::to_string(k); }

std::vector<double> feature_scales(const SynthOptions& opts, Rng& rng, std::size_t d) {
  std::vector<double> scales(d, 1.0);
  if (!opts.heterogeneous_scales) return scales;
  for (auto& s : scales) s = std::pow(10.0, -1.0 + 3.0 * uniform_unit(rng));
  return scales;
}

std::vector<std::size_t> draw_classes(const SynthOptions& opts, Rng& rng) {
  std::vector<std::size_t> cls(opts.rows);
  // Every class gets at least two rows so the stratified split is defined.
  for (std::size_t i = 0; i < opts.rows; ++i) {
    cls[i] = i < 2 * opts.classes ? i % opts.classes : uniform_index(rng, opts.classes);
  }
  shuffle(cls, rng);
  return cls;
}

enum class Noise { Gaussian, Uniform, Laplace, Skewed };

std::vector<Noise> noise_shapes(const SynthOptions& opts, Rng& rng, std::size_t d) {
  std::vector<Noise> shapes(d, Noise::Gaussian);
  if (!opts.mixed_noise) return shapes;
  for (auto& s : shapes) s = static_cast<Noise>(uniform_index(rng, 4));
  return shapes;
}

double draw_noise(Noise shape, Rng& rng) {
  switch (shape) {
    case Noise::Gaussian: return standard_normal(rng);
    case Noise::Uniform: return std::sqrt(3.0) * (2.0 * uniform_unit(rng) - 1.0);
    case Noise::Laplace: {
      const double u = uniform_unit(rng) - 0.5;
      return -std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u)) / std::sqrt(2.0);
    }
    case Noise::Skewed: return -std::log1p(-uniform_unit(rng)) - 1.0;
  }
  return 0.0;
}

Column numeric_column(const std::string& name, std::vector<double> values) {
  Column c;
  c.name = name;
  c.kind = ColumnKind::Numeric;
  c.missing.assign(values.size(), false);
  c.numbers = std::move(values);
  return c;
}

}  // namespace

std::string to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::Blobs: return "blobs";
    case SynthKind::Xor: return "xor";
    case SynthKind::Mixed: return "mixed";
  }
  return "unknown";
}

RawDataset make_blobs(const std::string& id, const SynthOptions& opts) {
  Rng rng(derive_seed(opts.seed, "blobs"));
  const auto d = opts.numeric_features;
  Matrix centres(static_cast<Eigen::Index>(opts.classes), static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < centres.rows(); ++k) {
    for (Eigen::Index j = 0; j < centres.cols(); ++j) centres(k, j) = opts.class_separation * standard_normal(rng);
  }
  const auto scales = feature_scales(opts, rng, d);
  const auto shapes = noise_shapes(opts, rng, d);
  const auto cls = draw_classes(opts, rng);

  RawDataset raw;
  raw.id = id;
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> values(opts.rows);
    for (std::size_t i = 0; i < opts.rows; ++i) {
      values[i] = scales[j] * (centres(static_cast<Eigen::Index>(cls[i]), static_cast<Eigen::Index>(j)) +
                               draw_noise(shapes[j], rng));
    }
    raw.columns.push_back(numeric_column("f" + std::to_string(j), std::move(values)));
  }
  for (auto k : cls) raw.target.push_back(class_name(k));
  return raw;
}

RawDataset make_xor(const std::string& id, const SynthOptions& opts) {
  Rng rng(derive_seed(opts.seed, "xor"));
  const auto d = std::max<std::size_t>(2, opts.numeric_features);
  const auto scales = feature_scales(opts, rng, d);
  const auto shapes = noise_shapes(opts, rng, d);
  RawDataset raw;
  raw.id = id;
  std::vector<std::vector<double>> values(d, std::vector<double>(opts.rows));
  for (std::size_t i = 0; i < opts.rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) values[j][i] = draw_noise(shapes[j], rng);
    const bool a = values[0][i] > 0.0;
    const bool b = values[1][i] > 0.0;
    raw.target.push_back(class_name(a != b ? 1 : 0));
  }
  if (raw.target.size() >= 2) {
    // Guarantee both classes with two rows each.
    values[0][0] = 1.0, values[1][0] = 1.0, raw.target[0] = class_name(0);
    values[0][1] = -1.0, values[1][1] = -1.0, raw.target[1] = class_name(0);
  }
  if (raw.target.size() >= 4) {
    values[0][2] = 1.0, values[1][2] = -1.0, raw.target[2] = class_name(1);
    values[0][3] = -1.0, values[1][3] = 1.0, raw.target[3] = class_name(1);
  }
  for (std::size_t j = 0; j < d; ++j) {
    for (auto& v : values[j]) v *= scales[j];
    raw.columns.push_back(numeric_column("f" + std::to_string(j), std::move(values[j])));
  }
  return raw;
}

RawDataset make_mixed(const std::string& id, const SynthOptions& opts) {
  SynthOptions numeric_opts = opts;
  RawDataset raw = make_blobs(id, numeric_opts);
  Rng rng(derive_seed(opts.seed, "mixed"));

  std::vector<std::size_t> cls(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) cls[i] = static_cast<std::size_t>(std::stoul(raw.target[i].substr(1)));

  for (std::size_t j = 0; j < opts.categorical_features; ++j) {
    const std::size_t levels = 2 + uniform_index(rng, 4);
    // Each class prefers one level; other levels appear as noise.
    std::vector<std::size_t> preferred(opts.classes);
    for (auto& p : preferred) p = uniform_index(rng, levels);
    Column c;
    c.name = "c" + std::to_string(j);
    c.kind = ColumnKind::Categorical;
    c.missing.assign(raw.rows(), false);
    c.labels.resize(raw.rows());
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      const std::size_t level = uniform_unit(rng) < 0.6 ? preferred[cls[i]] : uniform_index(rng, levels);
      c.labels[i] = "v" + std::to_string(level);
    }
    raw.columns.push_back(std::move(c));
  }

  if (opts.missing_rate > 0.0) {
    for (auto& c : raw.columns) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (uniform_unit(rng) >= opts.missing_rate) continue;
        c.missing[i] = true;
        if (c.kind == ColumnKind::Numeric) {
          c.numbers[i] = 0.0;
        } else {
          c.labels[i].clear();
        }
      }
    }
  }
  return raw;
}

RawDataset synthesize(const std::string& id, const SynthOptions& opts) {
  switch (opts.kind) {
    case SynthKind::Blobs: return make_blobs(id, opts);
    case SynthKind::Xor: return make_xor(id, opts);
    case SynthKind::Mixed: return make_mixed(id, opts);
  }
  throw std::invalid_argument("unknown synthetic dataset kind");
}

void write_dataset(const RawDataset& raw, const fs::path& dir) {
  fs::create_directories(dir);
  save_csv(raw, dir / (raw.id + ".csv"));
  Schema schema;
  schema.target = raw.target_name;
  for (const auto& c : raw.columns) {
    (c.kind == ColumnKind::Categorical ? schema.categorical : schema.numeric).insert(c.name);
  }
  schema.write(dir / (raw.id + ".schema"));
}

std::vector<DatasetFile> write_synthetic_corpus(const fs::path& dir, std::size_t n, std::uint64_t seed) {
  std::vector<DatasetFile> files;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    SynthOptions opts;
    opts.kind = static_cast<SynthKind>(i % 3);
    opts.rows = 60 + uniform_index(rng, 141);
    opts.numeric_features = 3 + uniform_index(rng, 10);
    opts.classes = opts.kind == SynthKind::Xor ? 2 : 2 + uniform_index(rng, 3);
    opts.class_separation = 0.6 + 1.4 * uniform_unit(rng);
    opts.heterogeneous_scales = uniform_unit(rng) < 0.6;
    opts.mixed_noise = true;
    if (opts.kind == SynthKind::Mixed) {
      opts.categorical_features = 1 + uniform_index(rng, 3);
      opts.missing_rate = 0.02 + 0.15 * uniform_unit(rng);
    }
    opts.seed = rng();

    char name[32];
    std::snprintf(name, sizeof(name), "synth_%02zu", i);
    const auto raw = synthesize(name, opts);
    write_dataset(raw, dir);
    files.push_back({name, dir / (std::string(name) + ".csv"), dir / (std::string(name) + ".schema")});
  }
  return files;
}

}  // namespace pipemeta
