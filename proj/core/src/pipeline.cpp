#include "ucahrpe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "ucahrpe/errors.hpp"
#include "ucahrpe/phase_mode.hpp"

namespace uca {
namespace {

double azimuth_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

}  // namespace

std::size_t PipelineConfig::support_threshold_for(const ArrayGeometry& geom) const {
  return support_threshold.value_or(std::max<std::size_t>(1, geom.num_elements / 2));
}

void PipelineConfig::validate(const ArrayGeometry& geom) const {
  sage.validate();
  refine.validate();
  if (pad_azimuth < 1 || pad_delay < 1) throw InvariantError("spectrum padding factors must be at least 1");
  if (!(half_width > 0.0)) throw InvariantError("trajectory half width must be positive");
  if (!(elevation_step_deg > 0.0 && elevation_step_deg <= 90.0))
    throw InvariantError("elevation step must lie in (0, 90] degrees");
  const std::size_t cs = support_threshold_for(geom);
  if (cs < 1 || cs > geom.num_elements) throw InvariantError("support threshold must lie in [1, P]");
}

PipelineResult run(const ArrayOutput& out, const PipelineConfig& cfg) {
  out.validate();
  cfg.validate(out.geometry);
  const auto& geom = out.geometry;
  const auto& grid = out.grid;
  const std::size_t cs = cfg.support_threshold_for(geom);
  const double half_width = cfg.half_width / grid.bandwidth();
  const auto theta_grid = elevation_grid(cfg.elevation_step_deg);
  const int modes = max_mode(geom, grid);

  PipelineResult result;
  result.residual = estimate_all(out, cfg.sage);

  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    if (result.residual.total_count() == 0) break;
    const ArrayOutput residual_output{geom, grid, reconstruct_array(result.residual)};
    const auto spectrum = delay_azimuth_spectrum(phase_mode_transform(residual_output, modes), cfg.pad_azimuth,
                                                 cfg.pad_delay);
    const auto peak = find_dominant_peak(spectrum);
    if (!peak.found) break;

    InitialGuess guess{peak.delay, peak.azimuth};
    if (cfg.snap_initialization)
      guess = snap_initialization(result.residual, guess, theta_grid, half_width, geom);
    const auto elev = estimate_elevation(result.residual, guess.delay, guess.azimuth, theta_grid, half_width, geom);

    IterationDiagnostics diag{peak.delay, peak.azimuth, peak.power, guess.delay, guess.azimuth, elev.elevation,
                              elev.count, elev.plateau_low, elev.plateau_high, false};
    if (elev.degenerate || elev.count < cs) {
      result.diagnostics.push_back(diag);
      break;
    }
    const auto area = make_area(guess.delay, guess.azimuth, elev.elevation, half_width, geom);
    auto traj = select_trajectory(result.residual, area);

    const auto h = reconstruct_trajectory_output(traj, grid);
    const auto angles = refine_angles_distance(h, traj, cfg.refine, geom, grid);
    const auto delay =
        refine_delay(h, angles.azimuth, angles.elevation, angles.distance, traj.init_delay, cfg.refine, geom, grid);
    EstimatedPath path;
    path.params = {delay.delay, angles.azimuth, angles.elevation, angles.distance, Complex{}};
    path.params.amplitude = estimate_amplitude(h, path.params, traj.support_count, geom, grid);
    path.support = traj.support_count;
    path.score = angles.score;
    path.delay_score = delay.score;
    path.delay_at_window_edge = delay.at_window_edge;

    diag.accepted = true;
    result.diagnostics.push_back(diag);
    result.residual = remove_trajectory(result.residual, traj);
    result.paths.push_back(path);
    result.trajectories.push_back(std::move(traj));
  }

  const double input_power = total_power(out.matrix.values());
  if (input_power > 0.0) {
    const auto model = reconstruct_paths(result, geom, grid);
    double diff = 0.0;
    for (std::size_t i = 0; i < model.values().size(); ++i) diff += std::norm(out.matrix.values()[i] - model.values()[i]);
    result.residual_power_ratio = diff / input_power;
  }
  return result;
}

ComplexMatrix reconstruct_paths(const PipelineResult& result, const ArrayGeometry& geom,
                                const FrequencyGrid& grid) {
  ComplexMatrix model(geom.num_elements, grid.num_points);
  for (std::size_t i = 0; i < result.paths.size(); ++i) {
    GainMask mask{std::vector<double>(geom.num_elements, 0.0)};
    const auto& traj = result.trajectories[i];
    for (std::size_t p = 0; p < geom.num_elements && p < traj.selections.size(); ++p)
      if (traj.selections[p]) mask.gain[p] = 1.0;
    const auto contribution = synthesize_path(geom, grid, result.paths[i].params, mask);
    for (std::size_t j = 0; j < model.values().size(); ++j) model.values()[j] += contribution.values()[j];
  }
  return model;
}

EvaluationReport evaluate(const PipelineResult& result, std::span<const PathParams> truth,
                          const FrequencyGrid& grid, double gate) {
  EvaluationReport report;
  report.residual_power_ratio = result.residual_power_ratio;

  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t t = 0; t < truth.size(); ++t)
    for (std::size_t e = 0; e < result.paths.size(); ++e) {
      const auto& est = result.paths[e].params;
      const double dt = (est.delay - truth[t].delay) * grid.bandwidth();
      const double dphi = rad2deg(azimuth_difference(est.azimuth, truth[t].azimuth));
      const double dtheta = rad2deg(est.elevation - truth[t].elevation);
      const double dist = std::sqrt(dt * dt + dphi * dphi + dtheta * dtheta);
      if (dist <= gate) pairs.emplace_back(dist, t, e);
    }
  std::sort(pairs.begin(), pairs.end());

  std::vector<bool> truth_used(truth.size(), false), est_used(result.paths.size(), false);
  for (const auto& [dist, t, e] : pairs) {
    if (truth_used[t] || est_used[e]) continue;
    truth_used[t] = est_used[e] = true;
    const auto& est = result.paths[e].params;
    PathMatch m;
    m.truth_index = t;
    m.estimate_index = e;
    m.delay_error = est.delay - truth[t].delay;
    m.azimuth_error = azimuth_difference(est.azimuth, truth[t].azimuth);
    m.elevation_error = est.elevation - truth[t].elevation;
    m.distance_error = est.source_distance - truth[t].source_distance;
    const double ref = std::abs(truth[t].amplitude), got = std::abs(est.amplitude);
    m.amplitude_error_db = ref > 0.0 && got > 0.0 ? 20.0 * std::log10(got / ref) : 0.0;
    report.matches.push_back(m);
  }
  std::sort(report.matches.begin(), report.matches.end(),
            [](const PathMatch& a, const PathMatch& b) { return a.truth_index < b.truth_index; });
  for (std::size_t t = 0; t < truth.size(); ++t)
    if (!truth_used[t]) report.missed.push_back(t);
  for (std::size_t e = 0; e < result.paths.size(); ++e)
    if (!est_used[e]) report.false_alarms.push_back(e);
  return report;
}

}  // namespace uca
