#pragma once

#include <vector>

namespace uca {

inline constexpr int kBesselMaxOrder = 1000;
inline constexpr double kBesselMaxArgument = 10'000.0;

/// Bessel function of the first kind J_order(x) for 0 <= order <= 1000 and
/// 0 <= x <= 10000. Throws std::domain_error outside that envelope.
double bessel_j(int order, double x);

/// dJ_order/dx via (J_{m-1} - J_{m+1}) / 2, with J'_0 = -J_1.
double bessel_j_prime(int order, double x);

/// J_0(x) ... J_max_order(x) from a single normalized downward recurrence.
std::vector<double> bessel_j_sequence(int max_order, double x);

}  // namespace uca
