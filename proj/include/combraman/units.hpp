#pragma once

#include <numbers>

// Internal units: time in fs, angular frequency in rad/fs, rates in 1/fs.
namespace combraman::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kFsPerNs = 1.0e6;
inline constexpr double kFsPerSecond = 1.0e15;

/// Quoted "THz" value to rad/fs. Ordinary frequency (nu) unless `angular`.
constexpr double thz_to_rad_per_fs(double thz, bool angular) {
  return angular ? thz * 1.0e-3 : kTwoPi * thz * 1.0e-3;
}

constexpr double rad_per_fs_to_thz(double omega, bool angular) {
  return angular ? omega * 1.0e3 : omega * 1.0e3 / kTwoPi;
}

constexpr double per_second_to_per_fs(double rate) { return rate / kFsPerSecond; }
constexpr double per_fs_to_per_second(double rate) { return rate * kFsPerSecond; }

}  // namespace combraman::units
