#include "ucahrpe/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fft.hpp"
#include "ucahrpe/errors.hpp"

namespace uca {

double wrap_azimuth(double radians) {
  double w = std::fmod(radians, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod of a value just below 0 can round up to exactly 2*pi
  return w >= kTwoPi ? 0.0 : w;
}

void ArrayGeometry::validate() const {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvariantError("array radius must be non-negative");
  if (num_elements < 1) throw InvariantError("array needs at least one element");
}

void FrequencyGrid::validate() const {
  if (num_points < 2) throw InvariantError("frequency grid needs at least two points");
  if (!(f_start > 0.0)) throw InvariantError("f_start must be positive");
  if (!(f_stop > f_start)) throw InvariantError("f_stop must exceed f_start");
}

void PathParams::validate(const ArrayGeometry& geom) const {
  if (!(delay >= 0.0)) throw InvariantError("path delay must be non-negative");
  if (!(elevation > 0.0 && elevation <= std::numbers::pi / 2.0 + 1e-12))
    throw InvariantError("path elevation must lie in (0, 90] degrees");
  if (!(source_distance > geom.radius))
    throw InvariantError("source distance " + std::to_string(source_distance) +
                         " m must exceed the array radius " + std::to_string(geom.radius) + " m");
  if (!std::isfinite(amplitude.real()) || !std::isfinite(amplitude.imag()))
    throw InvariantError("path amplitude must be finite");
}

void GainMask::validate(std::size_t num_elements) const {
  if (gain.size() != num_elements)
    throw InvariantError("gain mask length " + std::to_string(gain.size()) +
                         " does not match " + std::to_string(num_elements) + " elements");
  for (double g : gain)
    if (!(g >= 0.0 && g <= 1.0)) throw InvariantError("gain mask entries must lie in [0, 1]");
}

void ArrayOutput::validate() const {
  geometry.validate();
  grid.validate();
  if (matrix.rows() != geometry.num_elements || matrix.cols() != grid.num_points)
    throw InvariantError("array output is " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + ", expected " +
                         std::to_string(geometry.num_elements) + "x" + std::to_string(grid.num_points));
}

double source_distance_at_element(const ArrayGeometry& geom, const PathParams& path, std::size_t p) {
  if (p >= geom.num_elements) throw InvariantError("element index out of range");
  const double r = geom.radius;
  const double d = path.source_distance;
  const double c = std::cos(path.azimuth - geom.element_azimuth(p));
  return std::sqrt(d * d + r * r - 2.0 * r * d * std::sin(path.elevation) * c);
}

double excess_distance(const ArrayGeometry& geom, const PathParams& path, std::size_t p) {
  return path.source_distance - source_distance_at_element(geom, path, p);
}

ElementPath element_path_params(const ArrayGeometry& geom, const PathParams& path, std::size_t p) {
  const double dp = source_distance_at_element(geom, path, p);
  const double excess = path.source_distance - dp;
  return {path.delay - excess / kSpeedOfLight, path.amplitude * (path.source_distance / dp)};
}

std::vector<Complex> delay_response(const FrequencyGrid& grid, double delay, Complex amplitude) {
  std::vector<Complex> out(grid.num_points);
  for (std::size_t k = 0; k < grid.num_points; ++k)
    out[k] = amplitude * std::polar(1.0, -kTwoPi * grid.frequency(k) * delay);
  return out;
}

ComplexMatrix synthesize_path(const ArrayGeometry& geom, const FrequencyGrid& grid,
                              const PathParams& path, const GainMask& mask) {
  mask.validate(geom.num_elements);
  ComplexMatrix out(geom.num_elements, grid.num_points);
  for (std::size_t p = 0; p < geom.num_elements; ++p) {
    if (mask.gain[p] == 0.0) continue;
    const auto ep = element_path_params(geom, path, p);
    const auto row = delay_response(grid, ep.delay, mask.gain[p] * ep.amplitude);
    std::copy(row.begin(), row.end(), out.row(p).begin());
  }
  return out;
}

ArrayOutput synthesize_channel(const ArrayGeometry& geom, const FrequencyGrid& grid,
                               std::span<const PathParams> paths, std::span<const GainMask> masks,
                               const NoiseSpec& noise) {
  geom.validate();
  grid.validate();
  if (paths.size() != masks.size())
    throw InvariantError("got " + std::to_string(paths.size()) + " paths but " +
                         std::to_string(masks.size()) + " gain masks");
  if (!(noise.variance >= 0.0)) throw InvariantError("noise variance must be non-negative");

  ArrayOutput out{geom, grid, ComplexMatrix(geom.num_elements, grid.num_points)};
  for (std::size_t l = 0; l < paths.size(); ++l) {
    paths[l].validate(geom);
    const auto h = synthesize_path(geom, grid, paths[l], masks[l]);
    auto dst = out.matrix.values();
    auto src = h.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  if (noise.variance > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(noise.variance / 2.0));
    for (auto& v : out.matrix.values()) {
      const double re = normal(rng);
      const double im = normal(rng);
      v += Complex(re, im);
    }
  }
  return out;
}

double noise_variance_for_snr(const ComplexMatrix& signal, double snr_db) {
  if (signal.empty()) return 0.0;
  const double mean_power = total_power(signal.values()) / static_cast<double>(signal.size());
  return mean_power * std::pow(10.0, -snr_db / 10.0);
}

Cpdp cpdp(const ArrayOutput& out, Window window, std::size_t zero_pad) {
  out.validate();
  if (zero_pad < 1) throw InvariantError("zero_pad must be at least 1");
  const std::size_t k_count = out.grid.num_points;
  const std::size_t n = k_count * zero_pad;

  std::vector<double> w(k_count, 1.0);
  if (window == Window::hann) {
    for (std::size_t k = 0; k < k_count; ++k)
      w[k] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(k_count - 1)));
  }
  double wsum = 0.0;
  for (double v : w) wsum += v;

  Cpdp result{RealMatrix(out.geometry.num_elements, n), std::vector<double>(n)};
  const double dt = 1.0 / (static_cast<double>(n) * out.grid.step());
  for (std::size_t i = 0; i < n; ++i) result.delay_axis[i] = static_cast<double>(i) * dt;

  std::vector<Complex> buf(n);
  for (std::size_t p = 0; p < out.geometry.num_elements; ++p) {
    std::fill(buf.begin(), buf.end(), Complex{});
    const auto row = out.matrix.row(p);
    for (std::size_t k = 0; k < k_count; ++k) buf[k] = w[k] * row[k];
    detail::fft(buf, detail::FftSign::backward);
    auto dst = result.power.row(p);
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::norm(buf[i] / wsum);
  }
  return result;
}

}  // namespace uca
