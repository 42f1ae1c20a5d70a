#pragma once

#include <cstddef>
#include <vector>

#include "ucahrpe/channel_model.hpp"

namespace uca {

/// Mode-domain response: row (m + M) holds mode m = -M..M over the grid.
struct PhaseModeResponse {
  int max_mode = 0;
  FrequencyGrid grid;
  ComplexMatrix matrix;

  std::size_t row_of(int m) const { return static_cast<std::size_t>(m + max_mode); }
};

/// Delay-azimuth power on a zero-padded grid. Rows are azimuths, columns delays.
struct DelayAzimuthSpectrum {
  RealMatrix power;
  std::vector<double> azimuth_axis;  // rad, [0, 2*pi)
  std::vector<double> delay_axis;    // s, [0, 1/df)
};

struct SpectrumPeak {
  double delay = 0.0;
  double azimuth = 0.0;
  double power = 0.0;
  bool found = false;  // false for an all-zero spectrum
};

/// |1 / (J_m + J'_m)| is capped at this value near denominator zeros.
inline constexpr double kModeFilterFloor = 1e-3;

/// Envelope-compensating mode filter 2 / (J_m(x) + J'_m(x)), x = 2 pi f r / c.
/// Negative orders follow J_{-m} = (-1)^m J_m. Returned as a complex value
/// with zero imaginary part.
Complex mode_filter(int m, double frequency, const ArrayGeometry& geom);

/// Highest mode kept: min(floor(2 pi f_start r / c), (P - 1) / 2).
int max_mode(const ArrayGeometry& geom, const FrequencyGrid& grid);

/// Mode m, frequency k: G_m(f_k) * j^-m * (1/P) sum_p Y(p, f_k) exp(-j m phi_p).
///
/// The j^-m factor undoes the j^m carried by the plane-wave expansion
/// exp(j b cos g) = sum_n j^n J_n(b) exp(j n g); without it a path at azimuth
/// phi shows up at phi - 90 degrees.
PhaseModeResponse phase_mode_transform(const ArrayOutput& out, int max_mode);

/// power(phi, tau) = |sum_m sum_k Y(m, f_k) exp(j m phi) exp(j 2 pi f_k tau)|^2
/// on a (pad_azimuth * (2M+1)) x (pad_delay * K) grid, normalized by
/// ((2M+1) K)^2.
DelayAzimuthSpectrum delay_azimuth_spectrum(const PhaseModeResponse& pm, std::size_t pad_azimuth,
                                            std::size_t pad_delay);

/// Grid maximum refined by separable 3-point quadratic interpolation of the
/// log-power along each (circular) axis.
SpectrumPeak find_dominant_peak(const DelayAzimuthSpectrum& spec);

}  // namespace uca
