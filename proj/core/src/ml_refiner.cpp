#include "ucahrpe/ml_refiner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ucahrpe/errors.hpp"

namespace uca {
namespace {

void check_matrix(const ComplexMatrix& h, const ArrayGeometry& geom, const FrequencyGrid& grid) {
  if (h.rows() != geom.num_elements || h.cols() != grid.num_points)
    throw InvariantError("reconstructed output has the wrong shape");
}

std::vector<double> centered_grid(double center, double window, double step) {
  const auto n = static_cast<long>(std::floor(window / step + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * n + 1));
  for (long i = -n; i <= n; ++i) out.push_back(center + static_cast<double>(i) * step);
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n <= 1 || hi <= lo) return {hi};
  std::vector<double> out(n);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

// Rows carrying any energy; absent elements contribute nothing to correlations.
std::vector<std::size_t> active_rows(const ComplexMatrix& h) {
  std::vector<std::size_t> rows;
  for (std::size_t p = 0; p < h.rows(); ++p) {
    const auto row = h.row(p);
    if (std::any_of(row.begin(), row.end(), [](const Complex& v) { return v != Complex{}; })) rows.push_back(p);
  }
  return rows;
}

// sum_p H(p, k) (d/d_p) exp(-j 2 pi f_k excess_p / c) for every k.
std::vector<Complex> delay_free_projection(const ComplexMatrix& h, double azimuth, double elevation,
                                           double distance, const ArrayGeometry& geom,
                                           const FrequencyGrid& grid) {
  const PathParams path{0.0, azimuth, elevation, distance, 1.0};
  std::vector<Complex> proj(grid.num_points);
  for (std::size_t p : active_rows(h)) {
    const double dp = source_distance_at_element(geom, path, p);
    const double gain = distance / dp;
    const double excess = distance - dp;
    const auto row = h.row(p);
    for (std::size_t k = 0; k < grid.num_points; ++k)
      proj[k] += row[k] * gain * std::polar(1.0, -kTwoPi * grid.frequency(k) * excess / kSpeedOfLight);
  }
  return proj;
}

Complex delay_correlation(std::span<const Complex> proj, const FrequencyGrid& grid, double tau) {
  Complex acc{};
  for (std::size_t k = 0; k < proj.size(); ++k) acc += proj[k] * std::polar(1.0, kTwoPi * grid.frequency(k) * tau);
  return acc;
}

double parabolic_offset(double left, double centre, double right) {
  if (!(left > 0.0 && right > 0.0 && centre > 0.0)) return 0.0;
  const double a = std::log(left), b = std::log(centre), c = std::log(right);
  const double denom = a - 2.0 * b + c;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

}  // namespace

void RefineConfig::validate() const {
  if (!(azimuth_window > 0.0 && azimuth_step > 0.0)) throw InvariantError("azimuth window and step must be positive");
  if (!(elevation_window > 0.0 && elevation_step > 0.0))
    throw InvariantError("elevation window and step must be positive");
  if (distance_points < 1) throw InvariantError("distance grid needs at least one point");
  if (!(delay_window > 0.0 && delay_step > 0.0)) throw InvariantError("delay window and step must be positive");
  if (stages < 1) throw InvariantError("at least one refinement stage is required");
  if (!(shrink >= 1.0)) throw InvariantError("shrink factor must be at least 1");
}

ComplexMatrix reconstruct_trajectory_output(const Trajectory& traj, const FrequencyGrid& grid) {
  if (traj.empty()) throw InvariantError("cannot reconstruct an empty trajectory");
  ComplexMatrix out(traj.selections.size(), grid.num_points);
  for (std::size_t p = 0; p < traj.selections.size(); ++p) {
    if (!traj.selections[p]) continue;
    const auto row = delay_response(grid, traj.selections[p]->delay, traj.selections[p]->amplitude);
    std::copy(row.begin(), row.end(), out.row(p).begin());
  }
  return out;
}

double steering_score(const ComplexMatrix& h, std::size_t k, double azimuth, double elevation,
                      double distance, const ArrayGeometry& geom, const FrequencyGrid& grid) {
  check_matrix(h, geom, grid);
  const double wavenumber = kTwoPi * grid.frequency(k) / kSpeedOfLight;
  const double r = geom.radius;
  const double rs = 2.0 * r * distance * std::sin(elevation);
  Complex acc{};
  for (std::size_t p = 0; p < geom.num_elements; ++p) {
    const Complex v = h(p, k);
    if (v == Complex{}) continue;
    const double dp = std::sqrt(distance * distance + r * r - rs * std::cos(azimuth - geom.element_azimuth(p)));
    // H * conj(W), W = (d/d_p) exp(+j k (d - d_p))
    acc += v * (distance / dp) * std::polar(1.0, -wavenumber * (distance - dp));
  }
  return std::abs(acc);
}

AngleDistanceFit refine_angles_distance(const ComplexMatrix& h, const Trajectory& init,
                                        const RefineConfig& cfg, const ArrayGeometry& geom,
                                        const FrequencyGrid& grid) {
  cfg.validate();
  check_matrix(h, geom, grid);
  const std::size_t k = cfg.frequency_index.value_or(grid.center_index());
  if (k >= grid.num_points) throw InvariantError("refinement frequency index out of range");

  // Column at f_k restricted to active elements, with per-element cos/sin tables.
  std::vector<Complex> column;
  std::vector<double> phi_p;
  for (std::size_t p = 0; p < geom.num_elements; ++p)
    if (h(p, k) != Complex{}) {
      column.push_back(h(p, k));
      phi_p.push_back(geom.element_azimuth(p));
    }
  if (column.empty()) throw DegenerateInput("trajectory output is zero at the refinement frequency");

  const double wavenumber = kTwoPi * grid.frequency(k) / kSpeedOfLight;
  const double r = geom.radius;
  const double d_min = r > 0.0 ? 2.0 * r : 1.0;
  const double d_max = std::max(kSpeedOfLight * init.init_delay, d_min);
  const double half_pi = std::numbers::pi / 2.0;

  double az_window = cfg.azimuth_window, el_window = cfg.elevation_window;
  const double coarse = std::pow(cfg.shrink, static_cast<double>(cfg.stages - 1));
  double az_step = cfg.azimuth_step * coarse, el_step = cfg.elevation_step * coarse;
  double log_lo = std::log(d_min), log_hi = std::log(d_max);

  AngleDistanceFit best{init.init_azimuth, std::min(init.elevation, half_pi), d_max, -1.0};
  std::vector<double> cos_table(column.size());
  for (std::size_t stage = 0; stage < cfg.stages; ++stage) {
    const auto azimuths = centered_grid(best.azimuth, az_window, az_step);
    std::vector<double> elevations;
    for (double e : centered_grid(best.elevation, el_window, el_step))
      if (e > 0.0 && e <= half_pi + 1e-12) elevations.push_back(std::min(e, half_pi));
    if (elevations.empty()) elevations.push_back(std::clamp(best.elevation, 1e-6, half_pi));
    const auto distances = log_grid(std::exp(log_lo), std::exp(log_hi), cfg.distance_points);

    AngleDistanceFit stage_best{0.0, 0.0, 0.0, -1.0};
    for (double az : azimuths) {
      for (std::size_t i = 0; i < column.size(); ++i) cos_table[i] = std::cos(az - phi_p[i]);
      for (double el : elevations) {
        const double sin_el = std::sin(el);
        for (double d : distances) {
          const double rs = 2.0 * r * d * sin_el;
          const double base = d * d + r * r;
          Complex acc{};
          for (std::size_t i = 0; i < column.size(); ++i) {
            const double dp = std::sqrt(base - rs * cos_table[i]);
            acc += column[i] * (d / dp) * std::polar(1.0, -wavenumber * (d - dp));
          }
          const double score = std::abs(acc);
          if (score > stage_best.score) stage_best = {az, el, d, score};
        }
      }
    }
    best = stage_best;

    az_window /= cfg.shrink;
    el_window /= cfg.shrink;
    az_step /= cfg.shrink;
    el_step /= cfg.shrink;
    const double half_span = (log_hi - log_lo) / (2.0 * cfg.shrink);
    const double centre = std::log(best.distance);
    log_lo = std::max(std::log(d_min), centre - half_span);
    log_hi = std::min(std::log(d_max), centre + half_span);
  }
  best.azimuth = wrap_azimuth(best.azimuth);
  return best;
}

DelayFit refine_delay(const ComplexMatrix& h, double azimuth, double elevation, double distance,
                      double init_delay, const RefineConfig& cfg, const ArrayGeometry& geom,
                      const FrequencyGrid& grid) {
  cfg.validate();
  check_matrix(h, geom, grid);
  const auto proj = delay_free_projection(h, azimuth, elevation, distance, geom, grid);
  if (std::all_of(proj.begin(), proj.end(), [](const Complex& v) { return v == Complex{}; }))
    throw DegenerateInput("trajectory output is zero");

  const double step = cfg.delay_step / grid.bandwidth();
  const auto taus = centered_grid(init_delay, cfg.delay_window / grid.bandwidth(), step);
  std::vector<double> scores(taus.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    scores[i] = std::abs(delay_correlation(proj, grid, taus[i]));
    if (scores[i] > scores[best]) best = i;
  }

  DelayFit fit{taus[best], scores[best], best == 0 || best + 1 == taus.size()};
  if (!fit.at_window_edge) {
    const double offset = parabolic_offset(scores[best - 1], scores[best], scores[best + 1]);
    if (offset != 0.0) {
      const double tau = taus[best] + offset * step;
      const double score = std::abs(delay_correlation(proj, grid, tau));
      if (score >= fit.score) fit = {tau, score, false};
    }
  }
  return fit;
}

Complex estimate_amplitude(const ComplexMatrix& h, const PathParams& refined, std::size_t support,
                           const ArrayGeometry& geom, const FrequencyGrid& grid) {
  check_matrix(h, geom, grid);
  if (support == 0) throw InvariantError("amplitude normalization needs a non-zero support count");
  const auto proj = delay_free_projection(h, refined.azimuth, refined.elevation, refined.source_distance, geom, grid);
  return delay_correlation(proj, grid, refined.delay) /
         (static_cast<double>(support) * static_cast<double>(grid.num_points));
}

}  // namespace uca
