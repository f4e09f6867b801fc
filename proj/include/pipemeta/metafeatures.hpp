// The 41 dataset characteristics used as metalearning inputs.

#ifndef PIPEMETA_METAFEATURES_HPP_
#define PIPEMETA_METAFEATURES_HPP_

#include "pipemeta/data.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pipemeta {

inline constexpr std::size_t kMetafeatureCount = 41;
inline constexpr std::size_t kSimpleMetafeatures = 18;
inline constexpr std::size_t kStatisticalMetafeatures = 8;
inline constexpr std::size_t kInformationMetafeatures = 1;
inline constexpr std::size_t kLandmarkMetafeatures = 14;

struct MetafeatureVector {
  std::array<double, kMetafeatureCount> values{};

  static const std::array<std::string_view, kMetafeatureCount>& names();
  /// Position of a named metafeature; throws std::out_of_range if unknown.
  static std::size_t index_of(std::string_view name);

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  double at(std::string_view name) const { return values[index_of(name)]; }
  bool all_finite() const;
};

using MetafeatureMap = std::map<std::string, MetafeatureVector>;

/// Fold id per row: stratified k-fold with seeded per-class shuffles, or
/// leave-one-out (fold = row) when any class has fewer than k rows.
std::vector<int> landmark_folds(const Labels& y, int k, std::uint64_t seed);

/// Missing-value features come from `raw` (before imputation); everything
/// else from the cleaned training partition. Throws std::invalid_argument
/// when `clean_train` has fewer than two classes.
MetafeatureVector extract(const RawDataset& raw, const CleanDataset& clean_train, std::uint64_t seed);

/// Clean and split `raw` exactly as the runner does for `run_seed`, then
/// extract from the training partition.
MetafeatureVector extract_for_run(const RawDataset& raw, std::uint64_t run_seed, CleanMode mode,
                                  double split_ratio = 0.7);

void write_metafeatures_csv(const MetafeatureMap& features, const std::filesystem::path& path);
MetafeatureMap read_metafeatures_csv(const std::filesystem::path& path);

}  // namespace pipemeta

#endif  // PIPEMETA_METAFEATURES_HPP_
