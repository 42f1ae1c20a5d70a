#include "ucahrpe/delay_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "fft.hpp"
#include "ucahrpe/errors.hpp"

namespace uca {
namespace {

struct Correlation {
  Complex value;  // sum_k y_k exp(+j u_k tau), u_k = 2 pi k df
  Complex d1;     // first derivative in tau
  Complex d2;     // second derivative in tau
};

Correlation correlate(std::span<const Complex> y, double df, double tau) {
  Correlation c{};
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double u = kTwoPi * static_cast<double>(k) * df;
    const Complex t = y[k] * std::polar(1.0, u * tau);
    c.value += t;
    c.d1 += Complex(0.0, u) * t;
    c.d2 += -u * u * t;
  }
  return c;
}

double objective(std::span<const Complex> y, double df, double tau) {
  Complex s{};
  for (std::size_t k = 0; k < y.size(); ++k)
    s += y[k] * std::polar(1.0, kTwoPi * static_cast<double>(k) * df * tau);
  return std::norm(s);
}

// (1/K) sum_k y_k exp(+j 2 pi f_k tau): the least-squares amplitude at a fixed delay.
Complex amplitude_at(std::span<const Complex> y, const FrequencyGrid& grid, double tau) {
  Complex s{};
  for (std::size_t k = 0; k < y.size(); ++k) s += y[k] * std::polar(1.0, kTwoPi * grid.frequency(k) * tau);
  return s / static_cast<double>(y.size());
}

double wrap_delay(double tau, double period) {
  double w = std::fmod(tau, period);
  if (w < 0.0) w += period;
  return w >= period ? 0.0 : w;
}

void subtract(std::span<Complex> residual, const FrequencyGrid& grid, const ElementPathEstimate& e) {
  for (std::size_t k = 0; k < residual.size(); ++k)
    residual[k] -= e.amplitude * std::polar(1.0, -kTwoPi * grid.frequency(k) * e.delay);
}

void add(std::span<Complex> residual, const FrequencyGrid& grid, const ElementPathEstimate& e) {
  for (std::size_t k = 0; k < residual.size(); ++k)
    residual[k] += e.amplitude * std::polar(1.0, -kTwoPi * grid.frequency(k) * e.delay);
}

void check_input(std::span<const Complex> y, const FrequencyGrid& grid) {
  if (y.size() < 2) throw InvariantError("delay estimation needs at least two frequency points");
  if (y.size() != grid.num_points)
    throw InvariantError("response length " + std::to_string(y.size()) + " does not match grid of " +
                         std::to_string(grid.num_points) + " points");
}


using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Columns exp(-j 2 pi (f_k - f_c) tau_l); centering the frequencies keeps the
// delay derivatives well conditioned, the common phase goes into the amplitudes.
CMat centered_basis(const FrequencyGrid& grid, std::span<const double> delays) {
  const double fc = grid.frequency(grid.center_index());
  CMat a(static_cast<Eigen::Index>(grid.num_points), static_cast<Eigen::Index>(delays.size()));
  for (std::size_t l = 0; l < delays.size(); ++l)
    for (std::size_t k = 0; k < grid.num_points; ++k)
      a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
          std::polar(1.0, -kTwoPi * (grid.frequency(k) - fc) * delays[l]);
  return a;
}

struct JointFit {
  std::vector<double> delays;
  std::vector<Complex> amplitudes;  // referenced to absolute frequency
  double cost = 0.0;
};

JointFit solve_amplitudes(const CVec& y, const FrequencyGrid& grid, std::vector<double> delays) {
  const CMat a = centered_basis(grid, delays);
  const CVec centered = a.colPivHouseholderQr().solve(y);
  JointFit fit{std::move(delays), {}, (y - a * centered).squaredNorm()};
  const double fc = grid.frequency(grid.center_index());
  fit.amplitudes.resize(fit.delays.size());
  for (std::size_t l = 0; l < fit.delays.size(); ++l)
    fit.amplitudes[l] = centered(static_cast<Eigen::Index>(l)) * std::polar(1.0, kTwoPi * fc * fit.delays[l]);
  return fit;
}

// Variable-projection Levenberg-Marquardt on the delays, Kaufman Jacobian.
JointFit polish_jointly(const CVec& y, const FrequencyGrid& grid, std::vector<double> delays,
                        std::size_t iterations) {
  const double fc = grid.frequency(grid.center_index());
  const auto n = static_cast<Eigen::Index>(delays.size());
  JointFit best = solve_amplitudes(y, grid, delays);
  double lambda = 1e-3;

  for (std::size_t it = 0; it < iterations; ++it) {
    const CMat a = centered_basis(grid, best.delays);
    const auto qr = a.colPivHouseholderQr();
    const CVec alpha = qr.solve(y);
    const CVec r = y - a * alpha;

    CMat jac(a.rows(), n);
    for (Eigen::Index l = 0; l < n; ++l)
      for (Eigen::Index k = 0; k < a.rows(); ++k) {
        const double fk = grid.frequency(static_cast<std::size_t>(k)) - fc;
        jac(k, l) = Complex(0.0, -kTwoPi * fk) * a(k, l) * alpha(l);
      }
    const CMat projected = jac - a * qr.solve(jac);
    const Eigen::MatrixXd hess = (projected.adjoint() * projected).real();
    const Eigen::VectorXd grad = (projected.adjoint() * r).real();

    bool improved = false;
    for (int attempt = 0; attempt < 16 && !improved; ++attempt) {
      Eigen::MatrixXd damped = hess;
      damped.diagonal() += lambda * hess.diagonal().cwiseMax(1e-300);
      const Eigen::VectorXd step = damped.ldlt().solve(grad);
      if (!step.allFinite()) break;
      std::vector<double> trial = best.delays;
      for (Eigen::Index l = 0; l < n; ++l) trial[static_cast<std::size_t>(l)] += step(l);
      auto fit = solve_amplitudes(y, grid, std::move(trial));
      if (fit.cost < best.cost) {
        const bool converged = best.cost - fit.cost <= 1e-12 * best.cost;
        best = std::move(fit);
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (converged) return best;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace

void SageConfig::validate() const {
  if (max_paths < 1) throw InvariantError("max_paths must be at least 1");
  if (!(dynamic_range_db > 0.0)) throw InvariantError("dynamic_range_db must be positive");
  if (delay_oversample < 1) throw InvariantError("delay_oversample must be at least 1");
  if (!(noise_variance >= 0.0)) throw InvariantError("noise_variance must be non-negative");
}

SingleDelayFit delay_ml_single(std::span<const Complex> y, const FrequencyGrid& grid,
                               const SageConfig& cfg) {
  check_input(y, grid);
  if (std::all_of(y.begin(), y.end(), [](const Complex& v) { return v == Complex{}; }))
    return {{}, true};

  const std::size_t k_count = y.size();
  const std::size_t n = k_count * std::max<std::size_t>(cfg.delay_oversample, 1);
  const double df = grid.step();
  const double bin = 1.0 / (static_cast<double>(n) * df);

  std::vector<Complex> buf(n);
  std::copy(y.begin(), y.end(), buf.begin());
  detail::fft(buf, detail::FftSign::backward);

  std::size_t peak = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::abs(buf[i]);
    if (m > best) {  // strict: the lowest delay wins ties
      best = m;
      peak = i;
    }
  }

  double offset = 0.0;
  const double left = std::abs(buf[(peak + n - 1) % n]);
  const double right = std::abs(buf[(peak + 1) % n]);
  if (left > 0.0 && right > 0.0) {
    const double a = std::log(left), b = std::log(best), c = std::log(right);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
  const double tau_grid = static_cast<double>(peak) * bin;
  const double tau_interp = tau_grid + offset * bin;

  double tau = tau_interp;
  for (int it = 0; it < 10; ++it) {
    const auto c = correlate(y, df, tau);
    const double g1 = 2.0 * std::real(c.d1 * std::conj(c.value));
    const double g2 = 2.0 * (std::norm(c.d1) + std::real(c.d2 * std::conj(c.value)));
    if (!(g2 < 0.0)) break;
    const double step = -g1 / g2;
    if (std::abs(tau + step - tau_grid) > bin) break;
    tau += step;
    if (std::abs(step) < 1e-9 * bin) break;
  }
  if (objective(y, df, tau) < objective(y, df, tau_interp)) tau = tau_interp;

  tau = wrap_delay(tau, grid.max_delay());
  return {{tau, amplitude_at(y, grid, tau)}, false};
}

std::vector<Complex> reconstruct_element(std::span<const ElementPathEstimate> estimates,
                                         const FrequencyGrid& grid) {
  std::vector<Complex> out(grid.num_points);
  for (const auto& e : estimates) add(out, grid, e);
  return out;
}

std::vector<ElementPathEstimate> estimate_element(std::span<const Complex> y,
                                                  const FrequencyGrid& grid, const SageConfig& cfg) {
  cfg.validate();
  check_input(y, grid);

  const double gate = std::pow(10.0, -cfg.dynamic_range_db / 10.0);
  const double noise_floor =
      cfg.noise_variance * cfg.noise_gate / static_cast<double>(grid.num_points);
  const auto below_gate = [&](double power, double strongest) {
    return power < strongest * gate || (cfg.noise_variance > 0.0 && power < noise_floor);
  };

  std::vector<Complex> residual(y.begin(), y.end());
  std::vector<ElementPathEstimate> paths;
  double strongest = 0.0;
  while (paths.size() < cfg.max_paths) {
    const auto fit = delay_ml_single(residual, grid, cfg);
    if (fit.degenerate) break;
    const double power = fit.estimate.power();
    if (power == 0.0 || below_gate(power, strongest)) break;
    subtract(residual, grid, fit.estimate);
    paths.push_back(fit.estimate);
    strongest = std::max(strongest, power);
  }

  // SAGE passes: each path re-fitted against the data minus all other paths.
  const double df = grid.step();
  const double tiny_shift = 1e-6 / grid.bandwidth();
  for (std::size_t cycle = 0; cycle < cfg.refinement_cycles && paths.size() > 1; ++cycle) {
    double max_shift = 0.0;
    for (auto& path : paths) {
      add(residual, grid, path);
      auto fit = delay_ml_single(residual, grid, cfg);
      // Keep the old delay if the grid search missed a better local optimum,
      // so the residual power can only go down.
      if (objective(residual, df, fit.estimate.delay) < objective(residual, df, path.delay))
        fit.estimate = {path.delay, amplitude_at(residual, grid, path.delay)};
      max_shift = std::max(max_shift, std::abs(fit.estimate.delay - path.delay));
      path = fit.estimate;
      subtract(residual, grid, path);
    }
    if (max_shift < tiny_shift) break;
  }

  if (cfg.joint_polish && paths.size() > 1) {
    const CVec data = Eigen::Map<const CVec>(y.data(), static_cast<Eigen::Index>(y.size()));
    std::vector<double> delays;
    for (const auto& path : paths) delays.push_back(path.delay);
    auto fit = polish_jointly(data, grid, delays, cfg.polish_iterations);

    // A pair closer than 0.1/B is one path split in two: keep the stronger
    // half and re-fit until no such pair is left.
    const double min_gap = 0.1 / grid.bandwidth();
    bool merged = false;
    for (;;) {
      std::size_t drop = fit.delays.size();
      double closest = min_gap;
      for (std::size_t a = 0; a < fit.delays.size(); ++a)
        for (std::size_t b = a + 1; b < fit.delays.size(); ++b)
          if (const double gap = std::abs(fit.delays[a] - fit.delays[b]); gap < closest) {
            closest = gap;
            drop = std::norm(fit.amplitudes[a]) < std::norm(fit.amplitudes[b]) ? a : b;
          }
      if (drop == fit.delays.size()) break;
      std::vector<double> rest = fit.delays;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(drop));
      fit = polish_jointly(data, grid, std::move(rest), cfg.polish_iterations);
      merged = true;
    }

    // Drop paths the joint fit drove under the gates, then re-fit amplitudes.
    double top = 0.0;
    for (const auto& amp : fit.amplitudes) top = std::max(top, std::norm(amp));
    std::vector<double> kept;
    for (std::size_t l = 0; l < fit.delays.size(); ++l)
      if (!below_gate(std::norm(fit.amplitudes[l]), top)) kept.push_back(fit.delays[l]);
    if (kept.size() != fit.delays.size()) fit = solve_amplitudes(data, grid, std::move(kept));

    if (merged || fit.cost <= total_power(residual)) {
      paths.clear();
      for (std::size_t l = 0; l < fit.delays.size(); ++l) {
        // A whole-period shift changes the phase by exp(-j 2 pi f_start * shift).
        const double tau = wrap_delay(fit.delays[l], grid.max_delay());
        const double shift = fit.delays[l] - tau;
        paths.push_back({tau, fit.amplitudes[l] * std::polar(1.0, -kTwoPi * grid.f_start * shift)});
      }
    }
  }

  std::stable_sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
    if (a.power() != b.power()) return a.power() > b.power();
    return a.delay < b.delay;
  });
  return paths;
}

std::size_t ElementEstimateSet::total_count() const {
  std::size_t n = 0;
  for (const auto& v : per_element) n += v.size();
  return n;
}

ElementEstimateSet estimate_all(const ArrayOutput& out, const SageConfig& cfg) {
  out.validate();
  cfg.validate();
  ElementEstimateSet set{out.geometry, out.grid, {}};
  set.per_element.resize(out.geometry.num_elements);
  for (std::size_t p = 0; p < out.geometry.num_elements; ++p)
    set.per_element[p] = estimate_element(out.matrix.row(p), out.grid, cfg);
  return set;
}

ComplexMatrix reconstruct_array(const ElementEstimateSet& set) {
  ComplexMatrix out(set.geometry.num_elements, set.grid.num_points);
  for (std::size_t p = 0; p < set.per_element.size(); ++p) {
    auto row = out.row(p);
    for (const auto& e : set.per_element[p]) add(row, set.grid, e);
  }
  return out;
}

}  // namespace uca
