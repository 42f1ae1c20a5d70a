#pragma once

#include <cstddef>
#include <optional>

#include "ucahrpe/channel_model.hpp"
#include "ucahrpe/trajectory.hpp"

namespace uca {

/// Search windows for the maximization stage. Angles in radians; the delay
/// window and step are in units of 1/B.
struct RefineConfig {
  double azimuth_window = deg2rad(2.0);
  double azimuth_step = deg2rad(0.05);
  double elevation_window = deg2rad(10.0);
  double elevation_step = deg2rad(0.5);
  std::size_t distance_points = 50;  // log-spaced from 2r to c * tau_hat
  double delay_window = 2.0;
  double delay_step = 1.0 / 16.0;
  std::optional<std::size_t> frequency_index;  // defaults to the centre frequency
  std::size_t stages = 2;  // coarse-to-fine passes over the angle/distance grid
  double shrink = 4.0;     // window and step reduction between passes

  void validate() const;
};

struct AngleDistanceFit {
  double azimuth = 0.0;
  double elevation = 0.0;
  double distance = 0.0;
  double score = 0.0;
};

struct DelayFit {
  double delay = 0.0;
  double score = 0.0;
  bool at_window_edge = false;  // maximum sits on the window boundary
};

/// P x K response of one trajectory: each selected (tau_p, alpha_p) expanded
/// over the grid, zero rows where the element has no selection.
ComplexMatrix reconstruct_trajectory_output(const Trajectory& traj, const FrequencyGrid& grid);

/// |sum_p H(p, f_k) conj(W(p, f_k))| with W the unit-amplitude, zero-delay
/// spherical steering vector for (azimuth, elevation, distance).
double steering_score(const ComplexMatrix& h, std::size_t k, double azimuth, double elevation,
                      double distance, const ArrayGeometry& geom, const FrequencyGrid& grid);

/// Grid maximization of steering_score at one frequency around the
/// trajectory's initial azimuth/elevation; distance is bounded by c * tau_hat.
/// Ties go to the lexicographically smallest (azimuth, elevation, distance).
AngleDistanceFit refine_angles_distance(const ComplexMatrix& h, const Trajectory& init,
                                        const RefineConfig& cfg, const ArrayGeometry& geom,
                                        const FrequencyGrid& grid);

/// 1D search of |vec(H)^T vec(W*)| over delay, all frequencies, with
/// quadratic interpolation at the peak.
DelayFit refine_delay(const ComplexMatrix& h, double azimuth, double elevation, double distance,
                      double init_delay, const RefineConfig& cfg, const ArrayGeometry& geom,
                      const FrequencyGrid& grid);

/// vec(H)^T vec(W*) / (C K). Dividing by the support C rather than P keeps
/// elements where the path is absent from diluting the amplitude.
Complex estimate_amplitude(const ComplexMatrix& h, const PathParams& refined, std::size_t support,
                           const ArrayGeometry& geom, const FrequencyGrid& grid);

}  // namespace uca
