#include "pipemeta/common.hpp"

#include <cmath>
#include <numbers>

namespace pipemeta {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(parent ^ splitmix64(h));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) {
  return splitmix64(parent ^ splitmix64(label + 0x632be59bd9b4e019ULL));
}

double standard_normal(Rng& rng) {
  double u1 = uniform_unit(rng);
  while (u1 <= 0.0) u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void check_dense_budget(std::size_t rows, std::size_t cols, std::string_view what) {
  if (cols != 0 && rows > kMaxDenseEntries / cols) {
    throw ResourceError(std::string(what) + ": " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " exceeds the dense allocation budget");
  }
}

}  // namespace pipemeta
