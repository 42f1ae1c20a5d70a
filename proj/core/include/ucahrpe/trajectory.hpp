#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ucahrpe/delay_estimator.hpp"

namespace uca {

/// Band of +/- half_width around the delay trajectory predicted for one
/// elevation hypothesis.
struct TrajectoryArea {
  double elevation = 0.0;           // rad
  double init_delay = 0.0;          // s
  double init_azimuth = 0.0;        // rad
  std::vector<double> center_delays;  // one per element
  double half_width = 0.0;          // s

  bool contains(std::size_t p, double delay) const;
};

/// One path traced across the array: the estimate picked at each element, if any.
struct Trajectory {
  std::vector<std::optional<ElementPathEstimate>> selections;
  std::size_t support_count = 0;
  double elevation = 0.0;
  double init_delay = 0.0;
  double init_azimuth = 0.0;

  bool empty() const { return support_count == 0; }
};

/// tau_hat - (r/c) sin(theta) cos(phi_hat - phi_p).
double trajectory_center(double tau_hat, double phi_hat, double theta, const ArrayGeometry& geom,
                         std::size_t p);

TrajectoryArea make_area(double tau_hat, double phi_hat, double theta, double half_width,
                         const ArrayGeometry& geom);

/// Number of elements with at least one estimate inside the band.
std::size_t count_in_area(const ElementEstimateSet& residual, const TrajectoryArea& area);

struct ElevationEstimate {
  double elevation = 0.0;
  std::size_t count = 0;
  bool degenerate = false;            // no element inside any band
  std::vector<std::size_t> counts;    // per grid elevation
  double plateau_low = 0.0;           // smallest / largest grid elevation reaching `count`
  double plateau_high = 0.0;
};

/// Elevations 1, 2, ..., 90 degrees (in radians) for step_deg = 1.
std::vector<double> elevation_grid(double step_deg);

/// Grid elevation with the largest element count.
///
/// Counts saturate over a wide plateau (the band is wider than the change in
/// ripple between neighbouring elevations), so ties are broken by how well the
/// in-band delays follow the predicted curve: the spread of the per-element
/// offsets delay - T_theta(p), after removing their mean, is minimized. Any
/// remaining tie goes to the larger elevation.
ElevationEstimate estimate_elevation(const ElementEstimateSet& residual, double tau_hat,
                                     double phi_hat, std::span<const double> theta_grid,
                                     double half_width, const ArrayGeometry& geom);

/// Per element, the in-band candidate whose power (dB) is closest to the mean
/// power of all in-band candidates of all elements.
Trajectory select_trajectory(const ElementEstimateSet& residual, const TrajectoryArea& area);

/// Copy of `residual` without the selected entries. Entries are matched by
/// value, so removing the same trajectory twice removes nothing the second time.
ElementEstimateSet remove_trajectory(const ElementEstimateSet& residual, const Trajectory& traj);

struct InitialGuess {
  double delay = 0.0;
  double azimuth = 0.0;
};

/// Pulls a rough (delay, azimuth) onto the element estimates: picks the
/// in-band candidate per element, fits tau - a cos(phi_p) - b sin(phi_p) by
/// least squares, and repeats with the fitted curve as the new band centre.
/// Returns the input unchanged unless the best elevation count improves.
InitialGuess snap_initialization(const ElementEstimateSet& residual, InitialGuess guess,
                                 std::span<const double> theta_grid, double half_width,
                                 const ArrayGeometry& geom, std::size_t iterations = 8);

}  // namespace uca
