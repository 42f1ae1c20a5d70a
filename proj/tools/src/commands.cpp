#include "ucahrpe/cli/commands.hpp"

#include <fstream>

#include "ucahrpe/cli/codec.hpp"
#include "ucahrpe/cli/manifest.hpp"
#include "ucahrpe/cli/scenario.hpp"
#include "ucahrpe/errors.hpp"

namespace uca::cli {
namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace

ArrayOutput cmd_synth(const fs::path& scenario, const fs::path& out, std::optional<std::uint64_t> seed_override) {
  auto s = load_scenario(scenario);
  if (seed_override) s.noise_seed = *seed_override;
  auto array = synthesize(s);
  auto os = open_output(out);
  write_array_output(os, array);
  return array;
}

PipelineResult cmd_estimate(const fs::path& array, const std::optional<fs::path>& config, const fs::path& out_dir) {
  RunManifest manifest;
  manifest.command = "estimate";
  manifest.started_at = utc_timestamp();
  manifest.input_path = array.string();
  manifest.input_digest = sha256_file(array);

  const auto input = load_array_output(array);
  const PipelineConfig cfg = config ? load_pipeline_config(*config) : PipelineConfig{};
  manifest.config = parse_key_values(format_pipeline_config(cfg, input.geometry));

  const auto result = run(input, cfg);

  fs::create_directories(out_dir);
  {
    auto os = open_output(out_dir / "paths.csv");
    write_paths_csv(os, result.paths);
  }
  {
    auto os = open_output(out_dir / "trajectories.csv");
    write_trajectories_csv(os, result.trajectories);
  }
  {
    auto os = open_output(out_dir / "diagnostics.csv");
    write_diagnostics_csv(os, result.diagnostics);
  }
  {
    auto os = open_output(out_dir / "residual.csv");
    write_estimates_csv(os, result.residual);
  }
  manifest.results["path_count"] = std::to_string(result.paths.size());
  manifest.results["residual_power_ratio"] = format_double(result.residual_power_ratio);
  manifest.results["residual_estimates"] = std::to_string(result.residual.total_count());
  manifest.finished_at = utc_timestamp();
  save_manifest(out_dir / "manifest.json", manifest);
  return result;
}

SpectrumPeak cmd_spectrum(const fs::path& array, const fs::path& out, std::size_t pad_azimuth, std::size_t pad_delay) {
  const auto input = load_array_output(array);
  const auto spec = delay_azimuth_spectrum(phase_mode_transform(input, max_mode(input.geometry, input.grid)),
                                           pad_azimuth, pad_delay);
  auto os = open_output(out);
  if (out.extension() == ".csv")
    write_spectrum_csv(os, spec);
  else
    write_spectrum(os, spec);
  const auto peak = find_dominant_peak(spec);
  if (!peak.found) throw DegenerateInput("spectrum is zero everywhere");
  return peak;
}

Cpdp cmd_cpdp(const fs::path& array, const fs::path& out, Window window, std::size_t zero_pad) {
  const auto input = load_array_output(array);
  auto c = cpdp(input, window, zero_pad);
  auto os = open_output(out);
  write_cpdp_csv(os, c);
  return c;
}

EvaluationReport cmd_eval(const fs::path& result_dir, const fs::path& scenario, const std::optional<fs::path>& out) {
  const auto s = load_scenario(scenario);
  if (s.paths.empty()) throw InvariantError("scenario has no paths to evaluate against");
  std::ifstream is(result_dir / "paths.csv", std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + (result_dir / "paths.csv").string());
  PipelineResult result;
  result.paths = read_paths_csv(is);
  if (fs::exists(result_dir / "manifest.json")) {
    const auto m = load_manifest(result_dir / "manifest.json");
    if (auto it = m.results.find("residual_power_ratio"); it != m.results.end())
      result.residual_power_ratio = std::stod(it->second);
  }
  const auto report = evaluate(result, s.paths, s.grid);
  if (out) {
    auto os = open_output(*out);
    write_report_csv(os, report, s.grid);
  }
  return report;
}

}  // namespace uca::cli
