#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ucahrpe/channel_model.hpp"

namespace uca {

/// One path seen by a single element: delay in [0, 1/df) and complex amplitude.
struct ElementPathEstimate {
  double delay = 0.0;
  Complex amplitude{};

  double power() const { return std::norm(amplitude); }
  bool operator==(const ElementPathEstimate&) const = default;
};

/// Element-wise SAGE settings.
///
/// Extraction stops at `max_paths` or once a new path falls more than
/// `dynamic_range_db` below the strongest one. If `noise_variance` is set, a
/// path whose power is below noise_gate * noise_variance / K also stops it.
///
/// With `joint_polish` the SAGE passes are followed by a joint least-squares
/// refinement of all delays (amplitudes projected out), after which paths
/// that dropped below the gates are discarded. Closely spaced paths (around
/// 1/(5B)) need it: the one-path-at-a-time updates converge very slowly there.
struct SageConfig {
  std::size_t max_paths = 20;
  double dynamic_range_db = 30.0;
  std::size_t refinement_cycles = 3;
  std::size_t delay_oversample = 8;
  double noise_variance = 0.0;
  double noise_gate = 10.0;
  bool joint_polish = true;
  std::size_t polish_iterations = 50;

  void validate() const;
};

struct SingleDelayFit {
  ElementPathEstimate estimate;
  bool degenerate = false;  // all-zero input
};

/// Single-path maximum-likelihood delay: oversampled IDFT peak, 3-point
/// quadratic interpolation of the log-magnitude, then Newton polishing of
/// |sum_k y_k exp(+j 2 pi f_k tau)|^2 inside the peak bin.
SingleDelayFit delay_ml_single(std::span<const Complex> y, const FrequencyGrid& grid,
                               const SageConfig& cfg);

/// Successive cancellation followed by `refinement_cycles` SAGE passes.
/// Result is sorted by descending power.
std::vector<ElementPathEstimate> estimate_element(std::span<const Complex> y,
                                                  const FrequencyGrid& grid, const SageConfig& cfg);

/// sum over estimates of alpha * exp(-j 2 pi f_k tau).
std::vector<Complex> reconstruct_element(std::span<const ElementPathEstimate> estimates,
                                         const FrequencyGrid& grid);

/// Per-element estimates for the whole array.
struct ElementEstimateSet {
  ArrayGeometry geometry;
  FrequencyGrid grid;
  std::vector<std::vector<ElementPathEstimate>> per_element;

  std::size_t total_count() const;
  bool operator==(const ElementEstimateSet&) const = default;
};

ElementEstimateSet estimate_all(const ArrayOutput& out, const SageConfig& cfg);

/// P x K array output rebuilt from every estimate in the set.
ComplexMatrix reconstruct_array(const ElementEstimateSet& set);

}  // namespace uca
