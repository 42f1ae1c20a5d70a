#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ucahrpe/channel_model.hpp"
#include "ucahrpe/pipeline.hpp"

namespace uca::cli {

/// Synthetic scene description.
///
///   radius = 0.5
///   elements = 720
///   f_start = 28e9
///   f_stop = 30e9
///   points = 750
///   snr_db = 30            (or noise_variance = ...)
///   noise_seed = 7
///   [paths]
///   # delay_s azimuth_deg elevation_deg distance_m amp_re amp_im
///   15e-9 180 70 5 1 0
///   [masks]
///   # path first_element last_element gain
///   0 0 359 0
///
/// Masks start fully visible; each row sets the gain of elements
/// first..last (inclusive, wrapping past P-1) for one path.
struct Scenario {
  ArrayGeometry geometry;
  FrequencyGrid grid;
  std::vector<PathParams> paths;
  std::vector<GainMask> masks;
  std::optional<double> snr_db;
  double noise_variance = 0.0;
  std::uint64_t noise_seed = 0;

  void validate() const;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Noise variance actually used: from snr_db when given, otherwise noise_variance.
double effective_noise_variance(const Scenario& s);
ArrayOutput synthesize(const Scenario& s);

/// key = value pipeline settings; unknown keys are rejected, missing keys keep defaults.
PipelineConfig parse_pipeline_config(std::string_view text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Every setting of `cfg` as key = value text accepted by parse_pipeline_config.
/// Unset support threshold is written for `geom`.
std::string format_pipeline_config(const PipelineConfig& cfg, const ArrayGeometry& geom);

}  // namespace uca::cli
