#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "ucahrpe/matrix.hpp"

namespace uca {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle into [0, 2*pi).
double wrap_azimuth(double radians);

/// Uniform circular array: `num_elements` isotropic elements on a circle of
/// `radius` meters, element p at azimuth 2*pi*p/P.
struct ArrayGeometry {
  double radius = 0.5;
  std::size_t num_elements = 720;

  double element_azimuth(std::size_t p) const {
    return kTwoPi * static_cast<double>(p) / static_cast<double>(num_elements);
  }
  void validate() const;
  bool operator==(const ArrayGeometry&) const = default;
};

/// Uniform frequency sweep including both end points.
struct FrequencyGrid {
  double f_start = 28e9;
  double f_stop = 30e9;
  std::size_t num_points = 750;

  double step() const { return (f_stop - f_start) / static_cast<double>(num_points - 1); }
  double frequency(std::size_t k) const { return f_start + static_cast<double>(k) * step(); }
  double bandwidth() const { return f_stop - f_start; }
  /// Unambiguous delay range 1/step.
  double max_delay() const { return 1.0 / step(); }
  std::size_t center_index() const { return (num_points - 1) / 2; }
  void validate() const;
  bool operator==(const FrequencyGrid&) const = default;
};

/// One spherical-wave path: delay and amplitude are referenced to the array
/// center, distance is to the last interaction point.
struct PathParams {
  double delay = 0.0;            // s
  double azimuth = 0.0;          // rad, [0, 2*pi)
  double elevation = 0.0;        // rad, (0, pi/2]
  double source_distance = 0.0;  // m
  Complex amplitude{1.0, 0.0};

  /// Throws InvariantError unless delay >= 0, elevation in (0, pi/2] and the
  /// source lies outside the array.
  void validate(const ArrayGeometry& geom) const;
  bool operator==(const PathParams&) const = default;
};

/// Per-element visibility of one path (1 = visible, 0 = absent).
struct GainMask {
  std::vector<double> gain;

  static GainMask all_visible(std::size_t num_elements) {
    return GainMask{std::vector<double>(num_elements, 1.0)};
  }
  void validate(std::size_t num_elements) const;
};

struct NoiseSpec {
  double variance = 0.0;  // per complex sample
  std::uint64_t seed = 0;
};

/// P x K frequency responses observed by the array.
struct ArrayOutput {
  ArrayGeometry geometry;
  FrequencyGrid grid;
  ComplexMatrix matrix;

  void validate() const;
};

/// Per-element delay and amplitude of one path.
struct ElementPath {
  double delay;
  Complex amplitude;
};

/// Distance from element p to the path's source point.
double source_distance_at_element(const ArrayGeometry& geom, const PathParams& path, std::size_t p);

/// d - d_p, bounded by the radius in magnitude.
double excess_distance(const ArrayGeometry& geom, const PathParams& path, std::size_t p);

/// Delay tau - excess/c and Friis-scaled amplitude (d/d_p) * alpha seen by element p.
ElementPath element_path_params(const ArrayGeometry& geom, const PathParams& path, std::size_t p);

/// alpha * exp(-j 2 pi f_k tau) for every grid frequency.
std::vector<Complex> delay_response(const FrequencyGrid& grid, double delay, Complex amplitude);

/// Noise-free P x K response of one path, scaled per element by `mask`.
ComplexMatrix synthesize_path(const ArrayGeometry& geom, const FrequencyGrid& grid,
                              const PathParams& path, const GainMask& mask);

/// Sum of all paths plus seeded circular white Gaussian noise.
ArrayOutput synthesize_channel(const ArrayGeometry& geom, const FrequencyGrid& grid,
                               std::span<const PathParams> paths, std::span<const GainMask> masks,
                               const NoiseSpec& noise);

/// Noise variance that gives `snr_db` relative to the mean per-sample power of `signal`.
double noise_variance_for_snr(const ComplexMatrix& signal, double snr_db);

enum class Window { rectangular, hann };

/// Concatenated power delay profile: one row per element.
struct Cpdp {
  RealMatrix power;
  std::vector<double> delay_axis;  // s
};

/// |IDFT(window * Y(p, .))|^2 with the IDFT scaled by 1/sum(window), so an
/// on-bin path of amplitude alpha peaks at |alpha|^2.
Cpdp cpdp(const ArrayOutput& out, Window window, std::size_t zero_pad);

}  // namespace uca
