#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "ucahrpe/channel_model.hpp"
#include "ucahrpe/phase_mode.hpp"
#include "ucahrpe/pipeline.hpp"

namespace uca::cli {

namespace fs = std::filesystem;

/// Scenario file to binary array output. Returns the written output.
ArrayOutput cmd_synth(const fs::path& scenario, const fs::path& out,
                      std::optional<std::uint64_t> seed_override = std::nullopt);

/// Runs the pipeline and writes paths.csv, trajectories.csv, diagnostics.csv,
/// residual.csv and manifest.json into `out_dir` (created if missing).
PipelineResult cmd_estimate(const fs::path& array, const std::optional<fs::path>& config, const fs::path& out_dir);

/// Delay-azimuth spectrum of the array output. A ".csv" extension selects
/// CSV, anything else the binary format. Throws DegenerateInput after writing
/// an all-zero spectrum.
SpectrumPeak cmd_spectrum(const fs::path& array, const fs::path& out, std::size_t pad_azimuth = 2,
                          std::size_t pad_delay = 4);

/// Per-element power delay profiles as CSV.
Cpdp cmd_cpdp(const fs::path& array, const fs::path& out, Window window = Window::rectangular,
              std::size_t zero_pad = 1);

/// Matches paths.csv in `result_dir` against the scenario's paths. Writes the
/// report CSV to `out` when given.
EvaluationReport cmd_eval(const fs::path& result_dir, const fs::path& scenario,
                          const std::optional<fs::path>& out = std::nullopt);

}  // namespace uca::cli
