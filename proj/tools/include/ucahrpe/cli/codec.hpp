#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ucahrpe/channel_model.hpp"
#include "ucahrpe/delay_estimator.hpp"
#include "ucahrpe/phase_mode.hpp"
#include "ucahrpe/pipeline.hpp"

namespace uca::cli {

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);

/// Binary array output: "UCAH", u32 version, u32 P, u32 K, f64 f_start,
/// f64 f_stop, f64 radius, then P*K (re, im) f64 pairs row-major. Little endian.
void write_array_output(std::ostream& os, const ArrayOutput& out);
ArrayOutput read_array_output(std::istream& is);
void save_array_output(const std::filesystem::path& path, const ArrayOutput& out);
ArrayOutput load_array_output(const std::filesystem::path& path);

/// Binary spectrum: "UCAS", u32 version, u32 rows (azimuth), u32 cols (delay),
/// f64 delay step, f64 azimuth step, f64 0, then rows*cols f64 powers.
void write_spectrum(std::ostream& os, const DelayAzimuthSpectrum& spec);
DelayAzimuthSpectrum read_spectrum(std::istream& is);

/// CSV tables. Angles in degrees, delays in seconds.
void write_cpdp_csv(std::ostream& os, const Cpdp& c);
void write_spectrum_csv(std::ostream& os, const DelayAzimuthSpectrum& spec);
void write_estimates_csv(std::ostream& os, const ElementEstimateSet& set);
ElementEstimateSet read_estimates_csv(std::istream& is, const ArrayGeometry& geom, const FrequencyGrid& grid);
void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajectories);
void write_paths_csv(std::ostream& os, const std::vector<EstimatedPath>& paths);
std::vector<EstimatedPath> read_paths_csv(std::istream& is);
void write_diagnostics_csv(std::ostream& os, const std::vector<IterationDiagnostics>& diags);
void write_report_csv(std::ostream& os, const EvaluationReport& report, const FrequencyGrid& grid);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace uca::cli
