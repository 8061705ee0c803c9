#include "combraman/pulse_train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "combraman/errors.hpp"

namespace combraman {
namespace {

constexpr cdouble kI{0.0, 1.0};
// exp(-x) is exactly zero in double precision for x above ~745.2.
constexpr double kUnderflowExponent = 746.0;

bool finite(double x) { return std::isfinite(x); }

struct PulseRange {
  long long first;
  long long last;
};

// Train replicas whose sub-pulse cluster can be non-zero at time t.
PulseRange nearby_pulses(double t, double reach, double period, int count) {
  const double lo = std::ceil((t - reach) / period);
  const double hi = std::floor((t + reach) / period);
  PulseRange r{0, static_cast<long long>(count) - 1};
  if (lo > static_cast<double>(r.first)) r.first = static_cast<long long>(lo);
  if (hi < static_cast<double>(r.last)) r.last = static_cast<long long>(hi);
  return r;
}

}  // namespace

void PulseTrainParams::validate() const {
  if (!finite(e0)) throw ValidationError("pulse.e0", "must be finite");
  if (!(finite(tau) && tau > 0.0)) throw ValidationError("pulse.tau", "must be > 0");
  if (!(finite(period) && period > 0.0)) throw ValidationError("pulse.period", "must be > 0");
  if (n_pulses < 1) throw ValidationError("pulse.n_pulses", "must be >= 1");
  if (!finite(omega0)) throw ValidationError("pulse.omega0", "must be finite");
  if (!(finite(mod_amplitude) && mod_amplitude >= 0.0)) {
    throw ValidationError("pulse.mod_amplitude", "must be >= 0");
  }
  if (mod_amplitude > kMaxBesselArgument) {
    throw ValidationError("pulse.mod_amplitude", "must be <= 64 (Bessel evaluation range)");
  }
  if (!(finite(mod_time) && mod_time > 0.0)) throw ValidationError("pulse.mod_time", "must be > 0");
  if (!finite(phi)) throw ValidationError("pulse.phi", "must be finite");
}

std::vector<std::string> PulseTrainParams::warnings() const {
  std::vector<std::string> out;
  if (period < 10.0 * tau) {
    out.emplace_back("pulse period is shorter than 10 tau; the windowed propagation assumes quiet gaps");
  }
  return out;
}

PulseTrain::PulseTrain(const PulseTrainParams& params, const BesselTruncation& truncation)
    : params_(params), truncation_(truncation) {
  init();
}

PulseTrain::PulseTrain(const PulseTrainParams& params, double threshold) : params_(params) {
  params_.validate();
  truncation_ = make_truncation(params_.mod_amplitude, threshold);
  init();
}

void PulseTrain::init() {
  params_.validate();
  if (truncation_.n_max < 0 || truncation_.n_max > kMaxBesselOrder) {
    throw TruncationInsufficient("truncation order outside [0, 512]");
  }
  const int n_max = truncation_.n_max;
  const auto table = bessel_j_table(n_max, params_.mod_amplitude);
  const std::size_t size = 2 * static_cast<std::size_t>(n_max) + 1;
  bessel_.resize(size);
  field_coeff_.resize(size);
  pump_coeff_.resize(size);
  stokes_coeff_.resize(size);
  abs_sum_ = 0.0;
  const double carrier_phase = params_.omega0 * params_.mod_time;
  for (int n = -n_max; n <= n_max; ++n) {
    const int m = std::abs(n);
    double j = table[static_cast<std::size_t>(m)];
    if (n < 0 && (m % 2) == 1) j = -j;
    const auto idx = static_cast<std::size_t>(n + n_max);
    bessel_[idx] = j;
    field_coeff_[idx] = j * std::exp(-kI * (n * params_.phi));
    pump_coeff_[idx] = field_coeff_[idx] * std::exp(-kI * (n * carrier_phase));
    stokes_coeff_[idx] = field_coeff_[idx] * std::exp(kI * (n * carrier_phase));
    abs_sum_ += std::abs(j);
  }
  cutoff_ = params_.tau * std::sqrt(2.0 * kUnderflowExponent);
}

cdouble PulseTrain::field_complex(double t) const {
  const int n_max = truncation_.n_max;
  const double t0 = params_.mod_time;
  const double inv_two_tau2 = 1.0 / (2.0 * params_.tau * params_.tau);
  const auto range = nearby_pulses(t, n_max * t0 + cutoff_, params_.period, params_.n_pulses);
  cdouble sum{0.0, 0.0};
  for (long long k = range.first; k <= range.last; ++k) {
    const double s = t - static_cast<double>(k) * params_.period;
    for (int n = -n_max; n <= n_max; ++n) {
      const double arg = s - n * t0;
      if (std::abs(arg) > cutoff_) continue;
      const double g = std::exp(-arg * arg * inv_two_tau2);
      sum += field_coeff_[static_cast<std::size_t>(n + n_max)] * (g * std::cos(params_.omega0 * arg));
    }
  }
  return params_.e0 * sum;
}

double PulseTrain::field(double t) const { return field_complex(t).real(); }

cdouble PulseTrain::envelope_local(double origin, double offset, EnvelopeBranch branch,
                                   TrainMode mode) const {
  const int n_max = truncation_.n_max;
  const double t0 = params_.mod_time;
  const double inv_two_tau2 = 1.0 / (2.0 * params_.tau * params_.tau);
  const auto& coeff = branch == EnvelopeBranch::Pump ? pump_coeff_ : stokes_coeff_;
  const auto range =
      nearby_pulses(origin + offset, n_max * t0 + cutoff_, params_.period, pulse_count(mode));
  cdouble sum{0.0, 0.0};
  for (long long k = range.first; k <= range.last; ++k) {
    const double s = (origin - static_cast<double>(k) * params_.period) + offset;
    for (int n = -n_max; n <= n_max; ++n) {
      const double arg = s - n * t0;
      if (std::abs(arg) > cutoff_) continue;
      sum += coeff[static_cast<std::size_t>(n + n_max)] * std::exp(-arg * arg * inv_two_tau2);
    }
  }
  return sum;
}

std::vector<TimeWindow> PulseTrain::active_windows(TrainMode mode) const {
  // Outside [kT - n_max T0 - w, kT + n_max T0 + w] every sub-pulse Gaussian is
  // below threshold / sum|J_n|, so the envelope modulus is below threshold.
  const double ratio = std::max(abs_sum_, 1.0) / truncation_.threshold;
  const double w = params_.tau * std::sqrt(2.0 * std::log(ratio));
  const double span = truncation_.n_max * params_.mod_time;
  std::vector<TimeWindow> out;
  const int count = pulse_count(mode);
  for (int k = 0; k < count; ++k) {
    const double center = static_cast<double>(k) * params_.period;
    TimeWindow win{center - span - w, center + span + w};
    if (!out.empty() && win.start <= out.back().end) {
      out.back().end = std::max(out.back().end, win.end);
    } else {
      out.push_back(win);
    }
  }
  return out;
}

cdouble spectral_modulation(double omega, const PulseTrainParams& p) {
  return std::exp(-kI * (p.mod_amplitude * std::sin(omega * p.mod_time + p.phi)));
}

cdouble field_spectrum(double omega, const PulseTrainParams& p) {
  const double tau2 = p.tau * p.tau;
  const double dm = omega - p.omega0;
  const double dp = omega + p.omega0;
  const double gauss = std::exp(-0.5 * dm * dm * tau2) + std::exp(-0.5 * dp * dp * tau2);
  cdouble comb{0.0, 0.0};
  for (int k = 0; k < p.n_pulses; ++k) comb += std::exp(kI * (omega * k * p.period));
  return std::sqrt(std::numbers::pi / 2.0) * p.e0 * p.tau * gauss * spectral_modulation(omega, p) * comb;
}

double field_time(double t, const PulseTrainParams& p, const BesselTruncation& trunc) {
  return PulseTrain(p, trunc).field(t);
}

cdouble field_time_complex(double t, const PulseTrainParams& p, const BesselTruncation& trunc) {
  return PulseTrain(p, trunc).field_complex(t);
}

cdouble rabi_envelope(double t, double peak_rabi, const PulseTrainParams& p,
                      const BesselTruncation& trunc, EnvelopeBranch branch, TrainMode mode) {
  return peak_rabi * PulseTrain(p, trunc).envelope(t, branch, mode);
}

std::vector<TimeWindow> active_windows(const PulseTrainParams& p, const BesselTruncation& trunc) {
  return PulseTrain(p, trunc).active_windows();
}

double window_sparsity(const std::vector<TimeWindow>& windows, const PulseTrainParams& p) {
  double covered = 0.0;
  for (const auto& w : windows) covered += w.length();
  return covered / (static_cast<double>(p.n_pulses) * p.period);
}

}  // namespace combraman
