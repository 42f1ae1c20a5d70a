#include "ucahrpe/phase_mode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "ucahrpe/bessel.hpp"
#include "ucahrpe/errors.hpp"

namespace uca {
namespace {

double mode_argument(double frequency, const ArrayGeometry& geom) {
  return kTwoPi * frequency * geom.radius / kSpeedOfLight;
}

double filter_from_denominator(double denom) {
  if (std::abs(denom) < kModeFilterFloor) return 2.0 / std::copysign(kModeFilterFloor, denom);
  return 2.0 / denom;
}

// G_0 .. G_M at one frequency from a single Bessel sequence.
std::vector<double> filters_up_to(int max_order, double x) {
  const auto j = bessel_j_sequence(max_order + 1, x);
  std::vector<double> g(static_cast<std::size_t>(max_order) + 1);
  for (int m = 0; m <= max_order; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const double deriv = m == 0 ? -j[1] : 0.5 * (j[mi - 1] - j[mi + 1]);
    g[mi] = filter_from_denominator(j[mi] + deriv);
  }
  return g;
}

// j^{-m}
Complex inverse_j_power(int m) {
  switch (((m % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

double parabolic_offset(double left, double centre, double right) {
  if (!(left > 0.0 && right > 0.0 && centre > 0.0)) return 0.0;
  const double a = std::log(left), b = std::log(centre), c = std::log(right);
  const double denom = a - 2.0 * b + c;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

}  // namespace

Complex mode_filter(int m, double frequency, const ArrayGeometry& geom) {
  const int order = std::abs(m);
  const double g = filters_up_to(order, mode_argument(frequency, geom))[static_cast<std::size_t>(order)];
  const double sign = (m < 0 && (order % 2 == 1)) ? -1.0 : 1.0;
  return {sign * g, 0.0};
}

int max_mode(const ArrayGeometry& geom, const FrequencyGrid& grid) {
  geom.validate();
  const int by_bessel = static_cast<int>(std::floor(mode_argument(grid.f_start, geom)));
  const int by_nyquist = static_cast<int>((geom.num_elements - 1) / 2);
  return std::max(0, std::min(by_bessel, by_nyquist));
}

PhaseModeResponse phase_mode_transform(const ArrayOutput& out, int max_mode) {
  out.validate();
  const std::size_t p_count = out.geometry.num_elements;
  if (max_mode < 0 || static_cast<std::size_t>(2 * max_mode + 1) > p_count)
    throw InvariantError("mode bound M=" + std::to_string(max_mode) + " needs 2M+1 <= P=" +
                         std::to_string(p_count));
  if (max_mode > kBesselMaxOrder - 1) throw InvariantError("mode order beyond the Bessel envelope");

  const std::size_t k_count = out.grid.num_points;
  PhaseModeResponse pm{max_mode, out.grid, ComplexMatrix(2 * static_cast<std::size_t>(max_mode) + 1, k_count)};

  std::vector<Complex> column(p_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t p = 0; p < p_count; ++p) column[p] = out.matrix(p, k);
    // forward DFT over elements: sum_p Y_p exp(-j 2 pi m p / P)
    detail::fft(column, detail::FftSign::forward);

    const auto g = filters_up_to(max_mode, mode_argument(out.grid.frequency(k), out.geometry));
    for (int m = -max_mode; m <= max_mode; ++m) {
      const int order = std::abs(m);
      const double sign = (m < 0 && (order % 2 == 1)) ? -1.0 : 1.0;
      const std::size_t bin = static_cast<std::size_t>((m % static_cast<int>(p_count) + static_cast<int>(p_count)) %
                                                       static_cast<int>(p_count));
      pm.matrix(pm.row_of(m), k) = sign * g[static_cast<std::size_t>(order)] * inverse_j_power(m) *
                                   column[bin] / static_cast<double>(p_count);
    }
  }
  return pm;
}

DelayAzimuthSpectrum delay_azimuth_spectrum(const PhaseModeResponse& pm, std::size_t pad_azimuth,
                                            std::size_t pad_delay) {
  if (pad_azimuth < 1 || pad_delay < 1) throw InvariantError("spectrum padding must be at least 1");
  const std::size_t modes = pm.matrix.rows();
  const std::size_t k_count = pm.matrix.cols();
  const std::size_t n_az = pad_azimuth * modes;
  const std::size_t n_tau = pad_delay * k_count;

  ComplexMatrix buf(n_az, n_tau);
  for (int m = -pm.max_mode; m <= pm.max_mode; ++m) {
    const auto dst_row = static_cast<std::size_t>((m % static_cast<int>(n_az) + static_cast<int>(n_az)) %
                                                  static_cast<int>(n_az));
    const auto src = pm.matrix.row(pm.row_of(m));
    std::copy(src.begin(), src.end(), buf.row(dst_row).begin());
  }
  detail::fft2(buf.values(), n_az, n_tau, detail::FftSign::backward);

  DelayAzimuthSpectrum spec{RealMatrix(n_az, n_tau), std::vector<double>(n_az), std::vector<double>(n_tau)};
  const double scale = 1.0 / (static_cast<double>(modes) * static_cast<double>(k_count));
  const auto in = buf.values();
  auto outv = spec.power.values();
  for (std::size_t i = 0; i < in.size(); ++i) outv[i] = std::norm(in[i] * scale);
  for (std::size_t a = 0; a < n_az; ++a)
    spec.azimuth_axis[a] = kTwoPi * static_cast<double>(a) / static_cast<double>(n_az);
  const double dt = 1.0 / (static_cast<double>(n_tau) * pm.grid.step());
  for (std::size_t t = 0; t < n_tau; ++t) spec.delay_axis[t] = static_cast<double>(t) * dt;
  return spec;
}

SpectrumPeak find_dominant_peak(const DelayAzimuthSpectrum& spec) {
  const std::size_t n_az = spec.power.rows();
  const std::size_t n_tau = spec.power.cols();
  if (n_az == 0 || n_tau == 0) throw InvariantError("empty spectrum");

  std::size_t best_a = 0, best_t = 0;
  double best = 0.0;
  for (std::size_t a = 0; a < n_az; ++a)
    for (std::size_t t = 0; t < n_tau; ++t)
      if (spec.power(a, t) > best) {
        best = spec.power(a, t);
        best_a = a;
        best_t = t;
      }
  if (!(best > 0.0)) return {};

  const double da = parabolic_offset(spec.power((best_a + n_az - 1) % n_az, best_t), best,
                                     spec.power((best_a + 1) % n_az, best_t));
  const double dt = parabolic_offset(spec.power(best_a, (best_t + n_tau - 1) % n_tau), best,
                                     spec.power(best_a, (best_t + 1) % n_tau));
  const double az_step = kTwoPi / static_cast<double>(n_az);
  const double tau_step = n_tau > 1 ? spec.delay_axis[1] - spec.delay_axis[0] : 0.0;
  const double period = tau_step * static_cast<double>(n_tau);

  SpectrumPeak peak;
  peak.azimuth = wrap_azimuth((static_cast<double>(best_a) + da) * az_step);
  peak.delay = spec.delay_axis[best_t] + dt * tau_step;
  if (peak.delay < 0.0) peak.delay += period;
  if (peak.delay >= period) peak.delay -= period;
  peak.power = best;
  peak.found = true;
  return peak;
}

}  // namespace uca
