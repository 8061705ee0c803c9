#pragma once

#include <vector>

namespace combraman {

inline constexpr int kMaxBesselOrder = 512;
inline constexpr double kMaxBesselArgument = 64.0;

/// Bessel function of the first kind J_n(a) for |n| <= 512, 0 <= a <= 64.
/// Absolute error stays below 1e-12 over the supported range.
double bessel_j(int n, double a);

/// J_0(a) .. J_{n_max}(a) from a single backward recurrence.
std::vector<double> bessel_j_table(int n_max, double a);

/// Order cut for the Bessel series of the modulated field.
struct BesselTruncation {
  double threshold = 1e-12;
  int n_max = 0;
};

/// Smallest n_max with |J_m(a)| < threshold for every m > n_max.
/// Throws TruncationInsufficient if that needs an order beyond 512.
BesselTruncation make_truncation(double a, double threshold = 1e-12);

}  // namespace combraman
