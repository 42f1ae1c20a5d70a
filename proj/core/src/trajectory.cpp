#include "ucahrpe/trajectory.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ucahrpe/errors.hpp"

namespace uca {
namespace {

void check_area(const ElementEstimateSet& residual, const TrajectoryArea& area) {
  if (area.center_delays.size() != residual.per_element.size())
    throw InvariantError("trajectory area covers " + std::to_string(area.center_delays.size()) +
                         " elements but the estimate set has " +
                         std::to_string(residual.per_element.size()));
}

// Index of the in-band candidate nearest to the band centre, if any.
std::optional<std::size_t> nearest_in_band(const std::vector<ElementPathEstimate>& candidates,
                                           double center, double half_width) {
  std::optional<std::size_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double dist = std::abs(candidates[i].delay - center);
    if (dist <= half_width && dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

// Spread of per-element offsets from the band centres once their mean is removed.
double centered_spread(const ElementEstimateSet& residual, const TrajectoryArea& area) {
  std::vector<double> offsets;
  for (std::size_t p = 0; p < residual.per_element.size(); ++p) {
    const auto& cands = residual.per_element[p];
    if (auto i = nearest_in_band(cands, area.center_delays[p], area.half_width))
      offsets.push_back(cands[*i].delay - area.center_delays[p]);
  }
  if (offsets.empty()) return std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (double o : offsets) mean += o;
  mean /= static_cast<double>(offsets.size());
  double acc = 0.0;
  for (double o : offsets) acc += (o - mean) * (o - mean);
  return acc / static_cast<double>(offsets.size());
}

double power_db(const ElementPathEstimate& e) { return 10.0 * std::log10(std::max(e.power(), 1e-300)); }

}  // namespace

bool TrajectoryArea::contains(std::size_t p, double delay) const {
  return std::abs(delay - center_delays[p]) <= half_width;
}

double trajectory_center(double tau_hat, double phi_hat, double theta, const ArrayGeometry& geom,
                         std::size_t p) {
  return tau_hat - geom.radius / kSpeedOfLight * std::sin(theta) * std::cos(phi_hat - geom.element_azimuth(p));
}

TrajectoryArea make_area(double tau_hat, double phi_hat, double theta, double half_width,
                         const ArrayGeometry& geom) {
  if (!(half_width > 0.0)) throw InvariantError("trajectory half width must be positive");
  TrajectoryArea area{theta, tau_hat, phi_hat, std::vector<double>(geom.num_elements), half_width};
  for (std::size_t p = 0; p < geom.num_elements; ++p)
    area.center_delays[p] = trajectory_center(tau_hat, phi_hat, theta, geom, p);
  return area;
}

std::size_t count_in_area(const ElementEstimateSet& residual, const TrajectoryArea& area) {
  check_area(residual, area);
  std::size_t count = 0;
  for (std::size_t p = 0; p < residual.per_element.size(); ++p) {
    const auto& cands = residual.per_element[p];
    if (std::any_of(cands.begin(), cands.end(), [&](const auto& e) { return area.contains(p, e.delay); }))
      ++count;
  }
  return count;
}

std::vector<double> elevation_grid(double step_deg) {
  if (!(step_deg > 0.0 && step_deg <= 90.0)) throw InvariantError("elevation step must lie in (0, 90] degrees");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor(90.0 / step_deg + 1e-9));
  for (std::size_t i = 1; i <= n; ++i) grid.push_back(deg2rad(static_cast<double>(i) * step_deg));
  return grid;
}

ElevationEstimate estimate_elevation(const ElementEstimateSet& residual, double tau_hat,
                                     double phi_hat, std::span<const double> theta_grid,
                                     double half_width, const ArrayGeometry& geom) {
  if (theta_grid.empty()) throw InvariantError("elevation grid is empty");
  for (double t : theta_grid)
    if (!(t > 0.0 && t <= std::numbers::pi / 2.0 + 1e-12))
      throw InvariantError("elevation grid must lie in (0, 90] degrees");

  ElevationEstimate est;
  est.counts.resize(theta_grid.size());
  for (std::size_t i = 0; i < theta_grid.size(); ++i)
    est.counts[i] = count_in_area(residual, make_area(tau_hat, phi_hat, theta_grid[i], half_width, geom));
  est.count = *std::max_element(est.counts.begin(), est.counts.end());
  if (est.count == 0) {
    est.degenerate = true;
    est.elevation = *std::max_element(theta_grid.begin(), theta_grid.end());
    est.plateau_low = est.plateau_high = est.elevation;
    return est;
  }

  double best_spread = std::numeric_limits<double>::infinity();
  est.plateau_low = std::numeric_limits<double>::infinity();
  est.plateau_high = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (est.counts[i] != est.count) continue;
    const double theta = theta_grid[i];
    est.plateau_low = std::min(est.plateau_low, theta);
    est.plateau_high = std::max(est.plateau_high, theta);
    const double spread = centered_spread(residual, make_area(tau_hat, phi_hat, theta, half_width, geom));
    if (spread < best_spread || (spread == best_spread && theta > est.elevation)) {
      best_spread = spread;
      est.elevation = theta;
    }
  }
  return est;
}

Trajectory select_trajectory(const ElementEstimateSet& residual, const TrajectoryArea& area) {
  check_area(residual, area);
  Trajectory traj;
  traj.selections.resize(residual.per_element.size());
  traj.elevation = area.elevation;
  traj.init_delay = area.init_delay;
  traj.init_azimuth = area.init_azimuth;

  double sum_db = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < residual.per_element.size(); ++p)
    for (const auto& e : residual.per_element[p])
      if (area.contains(p, e.delay)) {
        sum_db += power_db(e);
        ++n;
      }
  if (n == 0) return traj;
  const double mean_db = sum_db / static_cast<double>(n);

  for (std::size_t p = 0; p < residual.per_element.size(); ++p) {
    const ElementPathEstimate* pick = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : residual.per_element[p]) {
      if (!area.contains(p, e.delay)) continue;
      const double diff = std::abs(power_db(e) - mean_db);
      if (diff < best) {
        best = diff;
        pick = &e;
      }
    }
    if (pick != nullptr) {
      traj.selections[p] = *pick;
      ++traj.support_count;
    }
  }
  return traj;
}

ElementEstimateSet remove_trajectory(const ElementEstimateSet& residual, const Trajectory& traj) {
  if (traj.selections.size() != residual.per_element.size())
    throw InvariantError("trajectory spans " + std::to_string(traj.selections.size()) +
                         " elements but the estimate set has " +
                         std::to_string(residual.per_element.size()));
  ElementEstimateSet out = residual;
  for (std::size_t p = 0; p < traj.selections.size(); ++p) {
    if (!traj.selections[p]) continue;
    auto& list = out.per_element[p];
    if (auto it = std::find(list.begin(), list.end(), *traj.selections[p]); it != list.end()) list.erase(it);
  }
  return out;
}

InitialGuess snap_initialization(const ElementEstimateSet& residual, InitialGuess guess,
                                 std::span<const double> theta_grid, double half_width,
                                 const ArrayGeometry& geom, std::size_t iterations) {
  const auto start = estimate_elevation(residual, guess.delay, guess.azimuth, theta_grid, half_width, geom);
  if (start.degenerate) return guess;

  const std::size_t p_count = geom.num_elements;
  const double ripple = geom.radius / kSpeedOfLight * std::sin(start.elevation);
  double tau = guess.delay;
  double a = ripple * std::cos(guess.azimuth);
  double b = ripple * std::sin(guess.azimuth);

  std::vector<std::optional<std::size_t>> members(p_count), previous;
  for (std::size_t it = 0; it < iterations; ++it) {
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    std::size_t used = 0;
    for (std::size_t p = 0; p < p_count; ++p) {
      const double phi_p = geom.element_azimuth(p);
      const double center = tau - a * std::cos(phi_p) - b * std::sin(phi_p);
      members[p] = nearest_in_band(residual.per_element[p], center, half_width);
      if (!members[p]) continue;
      const Eigen::Vector3d row(1.0, -std::cos(phi_p), -std::sin(phi_p));
      normal += row * row.transpose();
      rhs += row * residual.per_element[p][*members[p]].delay;
      ++used;
    }
    if (used < 3 || members == previous) break;
    const Eigen::Vector3d x = normal.ldlt().solve(rhs);
    if (!x.allFinite()) break;
    tau = x(0);
    a = x(1);
    b = x(2);
    previous = members;
  }

  const InitialGuess snapped{tau, wrap_azimuth(std::atan2(b, a))};
  if (!(std::hypot(a, b) > 0.0)) return guess;
  const auto after = estimate_elevation(residual, snapped.delay, snapped.azimuth, theta_grid, half_width, geom);
  return after.count >= start.count ? snapped : guess;
}

}  // namespace uca
