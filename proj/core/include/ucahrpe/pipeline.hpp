#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ucahrpe/delay_estimator.hpp"
#include "ucahrpe/ml_refiner.hpp"
#include "ucahrpe/trajectory.hpp"

namespace uca {

struct PipelineConfig {
  SageConfig sage;
  std::size_t pad_azimuth = 2;
  std::size_t pad_delay = 4;
  double half_width = 0.5;            // trajectory band, in units of 1/B
  double elevation_step_deg = 1.0;
  RefineConfig refine;
  std::optional<std::size_t> support_threshold;  // C_s; P/2 when unset
  std::size_t max_iterations = 50;
  bool snap_initialization = true;

  std::size_t support_threshold_for(const ArrayGeometry& geom) const;
  void validate(const ArrayGeometry& geom) const;
};

struct EstimatedPath {
  PathParams params;
  std::size_t support = 0;
  double score = 0.0;        // angle/distance correlation magnitude
  double delay_score = 0.0;
  bool delay_at_window_edge = false;
};

struct IterationDiagnostics {
  double peak_delay = 0.0;
  double peak_azimuth = 0.0;
  double peak_power = 0.0;
  double init_delay = 0.0;    // after snapping
  double init_azimuth = 0.0;
  double elevation = 0.0;
  std::size_t support = 0;
  double plateau_low = 0.0;
  double plateau_high = 0.0;
  bool accepted = false;
};

struct PipelineResult {
  std::vector<EstimatedPath> paths;
  std::vector<Trajectory> trajectories;
  ElementEstimateSet residual;
  std::vector<IterationDiagnostics> diagnostics;
  double residual_power_ratio = 0.0;  // |Y - sum of accepted paths|^2 / |Y|^2
};

PipelineResult run(const ArrayOutput& out, const PipelineConfig& cfg);

/// Model output of the accepted paths, each restricted to the elements of its trajectory.
ComplexMatrix reconstruct_paths(const PipelineResult& result, const ArrayGeometry& geom,
                                const FrequencyGrid& grid);

struct PathMatch {
  std::size_t truth_index = 0;
  std::size_t estimate_index = 0;
  double delay_error = 0.0;      // s, estimate - truth
  double azimuth_error = 0.0;    // rad, wrapped to (-pi, pi]
  double elevation_error = 0.0;  // rad
  double distance_error = 0.0;   // m
  double amplitude_error_db = 0.0;
};

struct EvaluationReport {
  std::vector<PathMatch> matches;
  std::vector<std::size_t> missed;        // truth indices
  std::vector<std::size_t> false_alarms;  // estimate indices
  double residual_power_ratio = 0.0;
};

/// Greedy nearest matching on sqrt((dtau B)^2 + dphi_deg^2 + dtheta_deg^2),
/// pairs farther than `gate` left unmatched.
EvaluationReport evaluate(const PipelineResult& result, std::span<const PathParams> truth,
                          const FrequencyGrid& grid, double gate = 10.0);

}  // namespace uca
