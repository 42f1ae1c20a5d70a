#include "ucahrpe/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uca {
namespace {

void check_domain(int order, double x) {
  if (order < 0 || order > kBesselMaxOrder)
    throw std::domain_error("Bessel order outside [0, 1000]");
  if (!(x >= 0.0 && x <= kBesselMaxArgument))
    throw std::domain_error("Bessel argument outside [0, 10000]");
}

// Start order for Miller's algorithm. Beyond the turning point J_n(x) decays
// like exp(-(2(n-x))^{3/2} / (3 sqrt(x))); the cube-root term puts the start
// where that is below ~1e-18, the square-root term covers small x.
int start_order(int max_order, double x) {
  const double base = std::max(static_cast<double>(max_order), x);
  const double extra = 20.0 + 13.0 * std::cbrt(base) + std::sqrt(40.0 * (max_order + 1.0));
  int start = static_cast<int>(std::ceil(base + extra));
  return start + (start & 1);  // even, so the normalization sum ends on J_0
}

std::vector<double> sequence_unchecked(int max_order, double x) {
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }

  constexpr double kBig = 1e250;
  const int start = start_order(max_order, x);
  const double two_over_x = 2.0 / x;

  // Downward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, seeded with J_{start+1}=0, J_start=tiny.
  double j_next = 0.0;
  double j_curr = 1e-300;
  double norm_sum = 0.0;  // J_0 + 2 * sum J_{2k}, all in the same running scale
  for (int n = start; n >= 1; --n) {
    const double j_prev = static_cast<double>(n) * two_over_x * j_curr - j_next;
    j_next = j_curr;
    j_curr = j_prev;  // now holds J_{n-1}
    const int order = n - 1;
    if (order <= max_order) out[static_cast<std::size_t>(order)] = j_curr;
    if (order > 0 && (order % 2 == 0)) norm_sum += 2.0 * j_curr;
    if (std::abs(j_curr) > kBig) {
      j_curr /= kBig;
      j_next /= kBig;
      norm_sum /= kBig;
      for (int m = order; m <= max_order; ++m) out[static_cast<std::size_t>(m)] /= kBig;
    }
  }
  norm_sum += j_curr;  // J_0

  for (double& v : out) v /= norm_sum;
  return out;
}

}  // namespace

std::vector<double> bessel_j_sequence(int max_order, double x) {
  check_domain(max_order, x);
  return sequence_unchecked(max_order, x);
}

double bessel_j(int order, double x) {
  check_domain(order, x);
  return bessel_j_sequence(order, x)[static_cast<std::size_t>(order)];
}

double bessel_j_prime(int order, double x) {
  check_domain(order, x);
  const auto seq = sequence_unchecked(order + 1, x);
  if (order == 0) return -seq[1];
  return 0.5 * (seq[static_cast<std::size_t>(order - 1)] - seq[static_cast<std::size_t>(order + 1)]);
}

}  // namespace uca
