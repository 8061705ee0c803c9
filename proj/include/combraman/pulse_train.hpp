#pragma once

#include <complex>
#include <string>
#include <vector>

#include "combraman/bessel.hpp"

namespace combraman {

using cdouble = std::complex<double>;

/// Spectrally sine/cosine-modulated phase-locked pulse train.
///
/// Times are in fs, angular frequencies in rad/fs. `n_pulses` is the number
/// of pulses in the train; the comb sum runs over k = 0 .. n_pulses - 1.
struct PulseTrainParams {
  double e0 = 1.0;             // peak field amplitude (arbitrary units)
  double tau = 3.0;            // single-pulse duration
  double period = 1.92e7;      // train period T
  int n_pulses = 1;            // pulse count
  double omega0 = 0.0;         // carrier
  double mod_amplitude = 0.0;  // A
  double mod_time = 1.0;       // T0
  double phi = 0.0;            // modulation phase; 0 = sine (odd chirp), pi/2 = cosine (even)

  /// Throws ValidationError naming the offending field.
  void validate() const;
  /// Non-fatal consistency warnings (e.g. period not much longer than tau).
  std::vector<std::string> warnings() const;

  bool operator==(const PulseTrainParams&) const = default;
};

struct SpectralSample {
  double omega;
  cdouble value;
};

struct RabiEnvelopeSample {
  double t;
  cdouble value;
};

struct TimeWindow {
  double start;
  double end;
  double length() const { return end - start; }
};

/// Which phase factor the envelope carries: the pump branch uses
/// exp(-i n omega0 T0), the Stokes (conjugate-phase) branch exp(+i n omega0 T0).
enum class EnvelopeBranch { Pump, Stokes };

/// Whether the train replicas k = 0 .. n_pulses-1 are included or only k = 0.
enum class TrainMode { FullTrain, SinglePulse };

/// Precomputed Bessel-weighted coefficients for fast repeated evaluation.
class PulseTrain {
 public:
  PulseTrain(const PulseTrainParams& params, const BesselTruncation& truncation);
  explicit PulseTrain(const PulseTrainParams& params, double threshold = 1e-12);

  const PulseTrainParams& params() const { return params_; }
  const BesselTruncation& truncation() const { return truncation_; }

  /// J_n(A) for n in [-n_max, n_max].
  double bessel(int n) const { return bessel_[static_cast<std::size_t>(n + truncation_.n_max)]; }

  /// Physical (real) field: real part of the complex Bessel series.
  double field(double t) const;
  /// The complex Bessel series before the real part is taken.
  cdouble field_complex(double t) const;

  /// Normalised complex envelope: 1 at t = 0 when A = 0.
  cdouble envelope(double t, EnvelopeBranch branch, TrainMode mode = TrainMode::FullTrain) const {
    return envelope_local(t, 0.0, branch, mode);
  }
  /// Same, evaluated at origin + offset. Pass a large origin (a window start)
  /// and a small offset to keep sub-femtosecond resolution far into the train.
  cdouble envelope_local(double origin, double offset, EnvelopeBranch branch,
                         TrainMode mode = TrainMode::FullTrain) const;

  /// Sum over the truncated series of |J_n(A)|; bounds |envelope|.
  double envelope_bound() const { return abs_sum_; }

  /// Sorted disjoint intervals outside which |envelope| < threshold.
  std::vector<TimeWindow> active_windows(TrainMode mode = TrainMode::FullTrain) const;

 private:
  void init();
  int pulse_count(TrainMode mode) const {
    return mode == TrainMode::SinglePulse ? 1 : params_.n_pulses;
  }

  PulseTrainParams params_;
  BesselTruncation truncation_;
  std::vector<double> bessel_;
  std::vector<cdouble> field_coeff_;   // J_n e^{-i n phi}
  std::vector<cdouble> pump_coeff_;    // J_n e^{-i n phi} e^{-i n omega0 T0}
  std::vector<cdouble> stokes_coeff_;  // J_n e^{-i n phi} e^{+i n omega0 T0}
  double abs_sum_ = 0.0;
  double cutoff_ = 0.0;  // |s| beyond which the Gaussian underflows to zero
};

/// exp(-i A sin(omega T0 + phi)).
cdouble spectral_modulation(double omega, const PulseTrainParams& p);

/// Field spectrum: two Gaussians around +/-omega0, times the modulation and
/// the comb factor sum_k exp(i omega k T).
cdouble field_spectrum(double omega, const PulseTrainParams& p);

double field_time(double t, const PulseTrainParams& p, const BesselTruncation& trunc);
cdouble field_time_complex(double t, const PulseTrainParams& p, const BesselTruncation& trunc);

/// peak_rabi times the normalised envelope (pump branch by default).
cdouble rabi_envelope(double t, double peak_rabi, const PulseTrainParams& p,
                      const BesselTruncation& trunc,
                      EnvelopeBranch branch = EnvelopeBranch::Pump,
                      TrainMode mode = TrainMode::FullTrain);

std::vector<TimeWindow> active_windows(const PulseTrainParams& p, const BesselTruncation& trunc);

/// Fraction of the train duration n_pulses * T covered by the active windows.
double window_sparsity(const std::vector<TimeWindow>& windows, const PulseTrainParams& p);

}  // namespace combraman
