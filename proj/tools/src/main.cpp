#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "ucahrpe/cli/codec.hpp"
#include "ucahrpe/cli/commands.hpp"
#include "ucahrpe/cli/manifest.hpp"
#include "ucahrpe/errors.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitDegenerate = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace uca;
  CLI::App app{"High-resolution path estimation for uniform circular arrays"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kToolVersion));

  std::string input, scenario_path, out;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> pads{2, 4};
  std::string window_name = "rect";
  std::size_t zero_pad = 1;

  auto* synth = app.add_subcommand("synth", "Synthesize an array output from a scenario file");
  synth->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out, "Binary array output file")->required();
  synth->add_option("--seed-override", seed, "Replace the scenario's noise seed");

  auto* estimate = app.add_subcommand("estimate", "Run the path estimation pipeline");
  estimate->add_option("array", input, "Binary array output file")->required()->check(CLI::ExistingFile);
  estimate->add_option("--config", config, "Pipeline settings (key = value)")->check(CLI::ExistingFile);
  estimate->add_option("--out", out, "Result directory")->required();

  auto* spectrum = app.add_subcommand("spectrum", "Delay-azimuth power spectrum");
  spectrum->add_option("array", input, "Binary array output file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--out", out, "Spectrum file (.csv or binary)")->required();
  spectrum->add_option("--pads", pads, "Azimuth and delay zero-padding factors")->expected(2);

  auto* cpdp = app.add_subcommand("cpdp", "Concatenated power delay profile");
  cpdp->add_option("array", input, "Binary array output file")->required()->check(CLI::ExistingFile);
  cpdp->add_option("--out", out, "CSV file")->required();
  cpdp->add_option("--window", window_name, "rect or hann")->check(CLI::IsMember({"rect", "hann"}));
  cpdp->add_option("--pads", zero_pad, "Delay zero-padding factor");

  auto* eval = app.add_subcommand("eval", "Compare estimated paths with a scenario");
  eval->add_option("result-dir", input, "Directory written by estimate")->required()->check(CLI::ExistingDirectory);
  eval->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out, "Report CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (*synth) {
      const auto a = cli::cmd_synth(scenario_path, out, seed);
      std::printf("wrote %zu x %zu array output to %s\n", a.matrix.rows(), a.matrix.cols(), out.c_str());
    } else if (*estimate) {
      const auto r = cli::cmd_estimate(input, config ? std::optional<cli::fs::path>(*config) : std::nullopt, out);
      std::printf("%zu paths, residual power ratio %s\n", r.paths.size(),
                  cli::format_double(r.residual_power_ratio).c_str());
    } else if (*spectrum) {
      const auto peak = cli::cmd_spectrum(input, out, pads.at(0), pads.at(1));
      std::printf("peak delay %s s azimuth %s deg power %s\n", cli::format_double(peak.delay).c_str(),
                  cli::format_double(rad2deg(peak.azimuth)).c_str(), cli::format_double(peak.power).c_str());
    } else if (*cpdp) {
      const auto c = cli::cmd_cpdp(input, out, window_name == "hann" ? Window::hann : Window::rectangular, zero_pad);
      std::printf("wrote %zu x %zu profile to %s\n", c.power.rows(), c.power.cols(), out.c_str());
    } else if (*eval) {
      const auto report = cli::cmd_eval(input, scenario_path, out.empty() ? std::nullopt : std::optional<cli::fs::path>(out));
      std::printf("matched %zu, missed %zu, false alarms %zu\n", report.matches.size(), report.missed.size(),
                  report.false_alarms.size());
      for (const auto& m : report.matches)
        std::printf("truth %zu: delay %s s, azimuth %s deg, elevation %s deg, amplitude %s dB\n", m.truth_index,
                    cli::format_double(m.delay_error).c_str(),
                    cli::format_double(rad2deg(m.azimuth_error)).c_str(),
                    cli::format_double(rad2deg(m.elevation_error)).c_str(),
                    cli::format_double(m.amplitude_error_db).c_str());
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const DegenerateInput& e) {
    std::cerr << "degenerate input: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
