#include "combraman/bessel.hpp"

#include <cmath>
#include <string>

#include "combraman/errors.hpp"

namespace combraman {
namespace {

void check_argument(double a) {
  if (!(a >= 0.0 && a <= kMaxBesselArgument)) {
    throw ArgumentOutOfRange("Bessel argument " + std::to_string(a) + " outside [0, 64]");
  }
}

void check_order(int n) {
  if (n < -kMaxBesselOrder || n > kMaxBesselOrder) {
    throw OrderOutOfRange("Bessel order " + std::to_string(n) + " outside [-512, 512]");
  }
}

// Leading terms of the ascending series; only used where a^2/4 is below
// double resolution relative to one, so two terms are exact to rounding.
std::vector<double> small_argument_table(int n_max, double a) {
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double half = 0.5 * a;
  double leading = 1.0;  // (a/2)^n / n!
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) leading *= half / n;
    if (leading == 0.0) break;
    out[static_cast<std::size_t>(n)] = leading * (1.0 - half * half / (n + 1));
  }
  return out;
}

}  // namespace

std::vector<double> bessel_j_table(int n_max, double a) {
  check_order(n_max);
  check_argument(a);
  if (n_max < 0) throw OrderOutOfRange("table order must be non-negative");

  if (a == 0.0) {
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    out[0] = 1.0;
    return out;
  }
  if (a < 1e-8) return small_argument_table(n_max, a);

  // Miller's backward recurrence J_{m-1} = (2m/a) J_m - J_{m+1}, started far
  // enough above max(n_max, a) that the seed error is below rounding, and
  // normalised with J_0 + 2 sum_k J_{2k} = 1.
  const double top = std::max(static_cast<double>(n_max), a);
  int start = static_cast<int>(top) + 50 + static_cast<int>(2.0 * std::sqrt(top));
  start += start % 2;

  constexpr double kBig = 1e200;
  constexpr double kScale = 1e-200;

  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  double next = 0.0;     // J_{m+1}
  double current = 1e-30;  // J_m, arbitrary seed
  double norm = 0.0;
  for (int m = start; m > 0; --m) {
    const double previous = (2.0 * m / a) * current - next;  // J_{m-1}
    next = current;
    current = previous;
    const int index = m - 1;
    if (index <= n_max) out[static_cast<std::size_t>(index)] = current;
    if (index > 0 && index % 2 == 0) norm += 2.0 * current;
    if (std::abs(current) > kBig) {
      current *= kScale;
      next *= kScale;
      norm *= kScale;
      for (int j = index; j <= n_max; ++j) out[static_cast<std::size_t>(j)] *= kScale;
    }
  }
  norm += current;  // J_0
  for (double& v : out) v /= norm;
  return out;
}

double bessel_j(int n, double a) {
  check_order(n);
  check_argument(a);
  const int m = n < 0 ? -n : n;
  const double value = bessel_j_table(m, a)[static_cast<std::size_t>(m)];
  return (n < 0 && (m % 2) == 1) ? -value : value;
}

BesselTruncation make_truncation(double a, double threshold) {
  check_argument(a);
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ArgumentOutOfRange("truncation threshold must lie in (0, 1)");
  }
  const auto table = bessel_j_table(kMaxBesselOrder, a);
  if (std::abs(table.back()) >= threshold) {
    throw TruncationInsufficient("|J_n(" + std::to_string(a) + ")| does not fall below " +
                                 std::to_string(threshold) + " within order 512");
  }
  int n_max = kMaxBesselOrder;
  while (n_max > 0 && std::abs(table[static_cast<std::size_t>(n_max)]) < threshold) --n_max;
  return {threshold, n_max};
}

}  // namespace combraman
