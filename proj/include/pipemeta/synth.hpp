// Synthetic classification datasets for desk-scale corpora.

#ifndef PIPEMETA_SYNTH_HPP_
#define PIPEMETA_SYNTH_HPP_

#include "pipemeta/data.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pipemeta {

enum class SynthKind { Blobs, Xor, Mixed };

std::string to_string(SynthKind kind);

struct SynthOptions {
  SynthKind kind = SynthKind::Blobs;
  std::size_t rows = 120;
  std::size_t numeric_features = 6;
  std::size_t categorical_features = 0;  // Mixed only
  std::size_t classes = 2;
  double missing_rate = 0.0;             // Mixed only
  double class_separation = 2.0;
  bool heterogeneous_scales = true;
  /// Draw each feature's noise from a Gaussian, uniform, Laplace or skewed
  /// (shifted exponential) law, all with zero mean and unit variance.
  bool mixed_noise = false;
  std::uint64_t seed = 0;
};

/// Blobs: one centre per class plus unit-variance noise, optionally with per-feature scales
/// spanning several orders of magnitude.
RawDataset make_blobs(const std::string& id, const SynthOptions& opts);
/// XOR-style target on the first two features; the rest are noise.
RawDataset make_xor(const std::string& id, const SynthOptions& opts);
/// Numeric blobs plus class-dependent categorical columns, with missing cells
/// injected at `missing_rate`.
RawDataset make_mixed(const std::string& id, const SynthOptions& opts);
RawDataset synthesize(const std::string& id, const SynthOptions& opts);

/// Write `n` varied datasets (`synth_00.csv` + `synth_00.schema`, ...) into
/// `dir`, cycling through the three generators.
std::vector<DatasetFile> write_synthetic_corpus(const std::filesystem::path& dir, std::size_t n, std::uint64_t seed);

void write_dataset(const RawDataset& raw, const std::filesystem::path& dir);

}  // namespace pipemeta

#endif  // PIPEMETA_SYNTH_HPP_
