#pragma once

#include <complex>
#include <random>
#include <vector>

#include "ucahrpe/channel_model.hpp"

namespace uca::test {

inline ArrayGeometry full_geometry() { return {0.5, 720}; }
inline FrequencyGrid full_grid() { return {28e9, 30e9, 750}; }
inline ArrayGeometry desk_geometry() { return {0.5, 72}; }
inline FrequencyGrid desk_grid() { return {2.8e9, 3.0e9, 128}; }

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (auto& v : m.values()) v = {n(rng), n(rng)};
  return m;
}

inline double relative_error(std::span<const Complex> a, std::span<const Complex> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline ArrayOutput single_path(const ArrayGeometry& g, const FrequencyGrid& f, const PathParams& p,
                               double noise = 0.0, std::uint64_t seed = 1) {
  std::vector<PathParams> paths{p};
  std::vector<GainMask> masks{GainMask::all_visible(g.num_elements)};
  return synthesize_channel(g, f, paths, masks, {noise, seed});
}

}  // namespace uca::test
