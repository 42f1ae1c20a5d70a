#include <doctest.h>
#include <mpfr.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "ucahrpe/bessel.hpp"
#include "ucahrpe/errors.hpp"
#include "ucahrpe/phase_mode.hpp"

using namespace uca;
using uca::test::single_path;

namespace {

double mpfr_j(long n, double x) {
  mpfr_t r, a;
  mpfr_inits2(256, r, a, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(a, x, MPFR_RNDN);
  mpfr_jn(r, n, a, MPFR_RNDN);
  const double v = mpfr_get_d(r, MPFR_RNDN);
  mpfr_clears(r, a, static_cast<mpfr_ptr>(nullptr));
  return v;
}

// j^-m for integer m.
Complex j_power_neg(int m) {
  static const Complex cycle[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return cycle[((m % 4) + 4) % 4];
}

// Mode transform by explicit summation over elements.
ComplexMatrix direct_transform(const ArrayOutput& out, int M) {
  const std::size_t P = out.geometry.num_elements, K = out.grid.num_points;
  ComplexMatrix r(static_cast<std::size_t>(2 * M + 1), K);
  for (int m = -M; m <= M; ++m)
    for (std::size_t k = 0; k < K; ++k) {
      Complex acc{};
      for (std::size_t p = 0; p < P; ++p)
        acc += out.matrix(p, k) * std::polar(1.0, -static_cast<double>(m) * out.geometry.element_azimuth(p));
      r(static_cast<std::size_t>(m + M), k) =
          mode_filter(m, out.grid.frequency(k), out.geometry) * j_power_neg(m) * acc / static_cast<double>(P);
    }
  return r;
}

std::size_t nearest_index(const std::vector<double>& axis, double v, bool circular) {
  std::size_t best = 0;
  double best_d = 1e300;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    double d = std::abs(axis[i] - v);
    if (circular) d = std::min(d, kTwoPi - d);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double azimuth_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

TEST_CASE("mode filter") {
  const ArrayGeometry point{0.0, 8};
  CHECK(mode_filter(0, 28e9, point) == Complex{2.0, 0.0});

  const ArrayGeometry g{0.5, 720};
  const double x = kTwoPi * 29e9 * 0.5 / kSpeedOfLight;
  const double den = mpfr_j(50, x) + 0.5 * (mpfr_j(49, x) - mpfr_j(51, x));
  CHECK(mode_filter(50, 29e9, g).real() == doctest::Approx(2.0 / den).epsilon(1e-9));
  CHECK(mode_filter(-50, 29e9, g) == mode_filter(50, 29e9, g));
  CHECK(mode_filter(-51, 29e9, g) == -mode_filter(51, 29e9, g));

  // J_0 - J_1 changes sign between 0.5 and 2; land the argument on that root.
  double lo = 0.5, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((bessel_j(0, mid) - bessel_j(1, mid)) > 0.0 ? lo : hi) = mid;
  }
  const double f = 1e9;
  const ArrayGeometry at_root{lo * kSpeedOfLight / (kTwoPi * f), 8};
  CHECK(std::abs(mode_filter(0, f, at_root)) == doctest::Approx(2.0 / kModeFilterFloor));
}

TEST_CASE("max mode") {
  CHECK(max_mode(test::full_geometry(), test::full_grid()) == 293);
  CHECK(max_mode(ArrayGeometry{0.0, 720}, test::full_grid()) == 0);
  CHECK(max_mode(ArrayGeometry{100.0, 9}, test::full_grid()) == 4);
}

TEST_CASE("transform of a constant input keeps only mode 0") {
  const ArrayGeometry g{0.05, 9};
  const FrequencyGrid f{28e9, 30e9, 6};
  ArrayOutput out{g, f, ComplexMatrix(9, 6)};
  for (auto& v : out.matrix.values()) v = {1.0, 0.0};
  const int M = 4;
  auto pm = phase_mode_transform(out, M);
  for (int m = -M; m <= M; ++m)
    for (std::size_t k = 0; k < 6; ++k) {
      const Complex v = pm.matrix(pm.row_of(m), k);
      if (m == 0)
        CHECK(std::abs(v - mode_filter(0, f.frequency(k), g)) < 1e-12 * std::abs(v));
      else
        CHECK(std::abs(v) < 1e-12);
    }
}

TEST_CASE("transform matches direct summation") {
  std::mt19937_64 rng(8);
  const ArrayOutput out{ArrayGeometry{0.3, 8}, FrequencyGrid{10e9, 11e9, 5}, test::random_matrix(8, 5, rng)};
  const auto pm = phase_mode_transform(out, 2);
  CHECK(test::relative_error(pm.matrix.values(), direct_transform(out, 2).values()) < 1e-12);
  CHECK_THROWS_AS(phase_mode_transform(out, 4), InvariantError);
}

TEST_CASE("property: linearity of the transform") {
  std::mt19937_64 rng(9);
  const ArrayGeometry g{0.2, 16};
  const FrequencyGrid f{20e9, 21e9, 12};
  ArrayOutput a{g, f, test::random_matrix(16, 12, rng)}, b{g, f, test::random_matrix(16, 12, rng)};
  const Complex ca{0.4, -1.1}, cb{2.0, 0.3};
  ArrayOutput mix{g, f, ComplexMatrix(16, 12)};
  for (std::size_t i = 0; i < mix.matrix.values().size(); ++i)
    mix.matrix.values()[i] = ca * a.matrix.values()[i] + cb * b.matrix.values()[i];
  const auto ta = phase_mode_transform(a, 7), tb = phase_mode_transform(b, 7), tm = phase_mode_transform(mix, 7);
  std::vector<Complex> expected(tm.matrix.values().size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    expected[i] = ca * ta.matrix.values()[i] + cb * tb.matrix.values()[i];
  CHECK(test::relative_error(tm.matrix.values(), expected) < 1e-12);
}

TEST_CASE("spectrum of zero input is zero") {
  const ArrayOutput out{ArrayGeometry{0.1, 8}, FrequencyGrid{1e9, 2e9, 8}, ComplexMatrix(8, 8)};
  const auto spec = delay_azimuth_spectrum(phase_mode_transform(out, 3), 2, 4);
  CHECK(spec.power.rows() == 14);
  CHECK(spec.power.cols() == 32);
  for (double v : spec.power.values()) CHECK(v == 0.0);
  CHECK_FALSE(find_dominant_peak(spec).found);
  CHECK_THROWS_AS(delay_azimuth_spectrum(phase_mode_transform(out, 3), 0, 4), InvariantError);
}

TEST_CASE("spectrum axes are increasing and power is non-negative") {
  std::mt19937_64 rng(10);
  const ArrayOutput out{ArrayGeometry{0.1, 12}, FrequencyGrid{3e9, 4e9, 10}, test::random_matrix(12, 10, rng)};
  const auto spec = delay_azimuth_spectrum(phase_mode_transform(out, 3), 3, 2);
  for (std::size_t i = 1; i < spec.azimuth_axis.size(); ++i) CHECK(spec.azimuth_axis[i] > spec.azimuth_axis[i - 1]);
  for (std::size_t i = 1; i < spec.delay_axis.size(); ++i) CHECK(spec.delay_axis[i] > spec.delay_axis[i - 1]);
  CHECK(spec.azimuth_axis.back() < kTwoPi);
  CHECK(spec.delay_axis.back() < out.grid.max_delay());
  for (double v : spec.power.values()) CHECK(v >= 0.0);
}

TEST_CASE("peak of a delta-like spectrum is its bin centre") {
  DelayAzimuthSpectrum spec;
  spec.power = RealMatrix(8, 10);
  for (std::size_t i = 0; i < 8; ++i) spec.azimuth_axis.push_back(kTwoPi * static_cast<double>(i) / 8.0);
  for (std::size_t i = 0; i < 10; ++i) spec.delay_axis.push_back(1e-9 * static_cast<double>(i));
  spec.power(3, 7) = 5.0;
  const auto peak = find_dominant_peak(spec);
  REQUIRE(peak.found);
  CHECK(peak.azimuth == doctest::Approx(spec.azimuth_axis[3]));
  CHECK(peak.delay == doctest::Approx(spec.delay_axis[7]));
  CHECK(peak.power == 5.0);
}

TEST_CASE("simulated near-field path peaks at its delay and azimuth") {
  const auto g = test::full_geometry();
  const auto f = test::full_grid();
  const auto out = single_path(g, f, {15e-9, std::numbers::pi, deg2rad(70.0), 5.0, 1.0});
  const auto spec = delay_azimuth_spectrum(phase_mode_transform(out, max_mode(g, f)), 2, 4);
  const auto peak = find_dominant_peak(spec);
  REQUIRE(peak.found);
  CHECK(std::abs(peak.delay - 15e-9) <= spec.delay_axis[1]);
  CHECK(azimuth_gap(peak.azimuth, std::numbers::pi) <= spec.azimuth_axis[1]);
}

TEST_CASE("plane waves at the cardinal azimuths") {
  const auto g = test::desk_geometry();
  const auto f = test::desk_grid();
  for (double az : {0.0, 90.0, 180.0, 270.0}) {
    const auto out = single_path(g, f, {40e-9, deg2rad(az), std::numbers::pi / 2, 1e6, 1.0});
    const auto spec = delay_azimuth_spectrum(phase_mode_transform(out, max_mode(g, f)), 2, 4);
    const auto peak = find_dominant_peak(spec);
    CHECK(std::abs(peak.delay - 40e-9) < spec.delay_axis[1]);
    CHECK(azimuth_gap(peak.azimuth, deg2rad(az)) < spec.azimuth_axis[1]);
  }
}

TEST_CASE("off-bin plane wave with padding 4") {
  const auto g = test::full_geometry();
  const auto f = test::full_grid();
  const double tau = 23.37e-9, az = deg2rad(123.45);
  const auto out = single_path(g, f, {tau, az, std::numbers::pi / 2, 1e6, 1.0});
  const auto peak = find_dominant_peak(delay_azimuth_spectrum(phase_mode_transform(out, max_mode(g, f)), 4, 4));
  CHECK(std::abs(peak.delay - tau) < 0.1 / f.bandwidth());
  CHECK(rad2deg(azimuth_gap(peak.azimuth, az)) < 0.5);
}

TEST_CASE("two separated plane waves give two local maxima") {
  const auto g = test::desk_geometry();
  const auto f = test::desk_grid();
  std::vector<PathParams> paths{{30e-9, deg2rad(60.0), std::numbers::pi / 2, 1e6, 1.0},
                                {80e-9, deg2rad(250.0), std::numbers::pi / 2, 1e6, {0.0, 0.8}}};
  std::vector<GainMask> masks(2, GainMask::all_visible(g.num_elements));
  const auto out = synthesize_channel(g, f, paths, masks, {0.0, 0});
  const auto spec = delay_azimuth_spectrum(phase_mode_transform(out, max_mode(g, f)), 2, 4);
  const std::size_t rows = spec.power.rows(), cols = spec.power.cols();
  for (const auto& p : paths) {
    const std::size_t a0 = nearest_index(spec.azimuth_axis, p.azimuth, true);
    const std::size_t t0 = nearest_index(spec.delay_axis, p.delay, false);
    // the local maximum must sit within one bin of the truth
    std::size_t best_a = a0, best_t = t0;
    for (int da = -1; da <= 1; ++da)
      for (int dt = -1; dt <= 1; ++dt) {
        const std::size_t a = (a0 + rows + static_cast<std::size_t>(da + static_cast<int>(rows))) % rows;
        const std::size_t t = (t0 + cols + static_cast<std::size_t>(dt + static_cast<int>(cols))) % cols;
        if (spec.power(a, t) > spec.power(best_a, best_t)) {
          best_a = a;
          best_t = t;
        }
      }
    bool local_max = true;
    for (int da = -1; da <= 1; ++da)
      for (int dt = -1; dt <= 1; ++dt) {
        const std::size_t a = (best_a + rows + static_cast<std::size_t>(da + static_cast<int>(rows))) % rows;
        const std::size_t t = (best_t + cols + static_cast<std::size_t>(dt + static_cast<int>(cols))) % cols;
        if (spec.power(a, t) > spec.power(best_a, best_t)) local_max = false;
      }
    CHECK(local_max);
  }
}

TEST_CASE("property: element rotation shifts the azimuth axis") {
  std::mt19937_64 rng(12);
  const ArrayGeometry g{0.5, 31};
  const FrequencyGrid f{28e9, 29e9, 16};
  const int M = 15;
  const std::size_t pad = 2;
  const std::vector<PathParams> paths{{12e-9, 1.0, 1.2, 4.0, 1.0}, {30e-9, 4.0, 1.4, 7.0, 0.5}};
  std::vector<GainMask> masks(2, GainMask::all_visible(31));
  const auto base = synthesize_channel(g, f, paths, masks, {0.0, 0});
  for (std::size_t q : {1u, 5u, 17u}) {
    auto rotated_paths = paths;
    for (auto& p : rotated_paths) p.azimuth = wrap_azimuth(p.azimuth + g.element_azimuth(q));
    const auto rotated = synthesize_channel(g, f, rotated_paths, masks, {0.0, 0});
    const auto s0 = delay_azimuth_spectrum(phase_mode_transform(base, M), pad, 2);
    const auto s1 = delay_azimuth_spectrum(phase_mode_transform(rotated, M), pad, 2);
    const std::size_t shift = q * pad, rows = s0.power.rows();
    double worst = 0.0, peak = 0.0;
    for (std::size_t a = 0; a < rows; ++a)
      for (std::size_t t = 0; t < s0.power.cols(); ++t) {
        worst = std::max(worst, std::abs(s1.power((a + shift) % rows, t) - s0.power(a, t)));
        peak = std::max(peak, s0.power(a, t));
      }
    CHECK(worst <= 1e-10 * peak);
    const auto p0 = find_dominant_peak(s0), p1 = find_dominant_peak(s1);
    CHECK(azimuth_gap(p1.azimuth, p0.azimuth + g.element_azimuth(q)) < 1e-9);
    CHECK(p1.delay == doctest::Approx(p0.delay).epsilon(1e-9));
  }
}
