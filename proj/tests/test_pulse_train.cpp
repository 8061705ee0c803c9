#include <cmath>
#include <numbers>
#include <random>

#include "combraman/errors.hpp"
#include "combraman/pulse_train.hpp"
#include "combraman/units.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace combraman;

namespace {

PulseTrainParams sh08_params(double phi, int n_pulses = 1) {
  PulseTrainParams p;
  p.tau = 3.0;
  p.period = 1.92e7;
  p.n_pulses = n_pulses;
  p.omega0 = units::thz_to_rad_per_fs(410.7, false);
  p.mod_amplitude = 4.0;
  p.mod_time = 1000.0 / 340.7;
  p.phi = phi;
  return p;
}

// Relative L2 distance between trapezoid Fourier integrals of the complex
// time series and the closed-form spectrum, E(w) = int E(t) e^{-iwt} dt.
double fourier_mismatch(const PulseTrainParams& p) {
  const PulseTrain train(p);
  const auto win = train.active_windows(TrainMode::SinglePulse).front();
  const double h = 0.02;
  const int n = static_cast<int>(std::ceil(win.length() / h));
  std::vector<cdouble> samples(n + 1);
  for (int i = 0; i <= n; ++i) samples[i] = train.field_complex(win.start + i * h);

  double num = 0.0;
  double den = 0.0;
  for (double centre : {p.omega0, -p.omega0}) {
    for (int j = -200; j <= 200; ++j) {
      const double w = centre + j * (6.0 / p.tau) / 200.0;
      cdouble ft = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double t = win.start + i * h;
        const double weight = (i == 0 || i == n) ? 0.5 : 1.0;
        ft += weight * samples[i] * std::exp(cdouble(0.0, -w * t));
      }
      ft *= h;
      const cdouble ref = field_spectrum(w, p);
      num += std::norm(ft - ref);
      den += std::norm(ref);
    }
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("spectral modulation is a unit-modulus phase") {
  const auto p = sh08_params(0.3);
  for (double w = -5.0; w <= 5.0; w += 0.01) {
    const cdouble m = spectral_modulation(w, p);
    CHECK(std::abs(m) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::arg(m * std::exp(cdouble(0.0, 4.0 * std::sin(w * p.mod_time + 0.3)))) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("Fourier transform of the time series reproduces the spectrum") {
  const double half_pi = std::numbers::pi / 2.0;
  CHECK(fourier_mismatch(sh08_params(0.0)) <= 1e-6);
  CHECK(fourier_mismatch(sh08_params(half_pi)) <= 1e-6);
  CHECK(fourier_mismatch(sh08_params(1.0)) <= 1e-6);
}

TEST_CASE("spectrum parity: sine modulation") {
  const auto p = sh08_params(0.0);
  for (double w = 0.01; w < 5.0; w += 0.0137) {
    const cdouble a = field_spectrum(w, p);
    const cdouble b = field_spectrum(-w, p);
    const double scale = std::abs(a) + 1e-300;
    CHECK(std::abs(a.real() - b.real()) <= 1e-12 * scale);  // Re even
    CHECK(std::abs(a.imag() + b.imag()) <= 1e-12 * scale);  // Im odd
  }
}

TEST_CASE("spectrum parity: cosine modulation") {
  const auto p = sh08_params(std::numbers::pi / 2.0);
  for (double w = 0.01; w < 5.0; w += 0.0137) {
    const cdouble a = field_spectrum(w, p);
    const cdouble b = field_spectrum(-w, p);
    const double scale = std::abs(a) + 1e-300;
    CHECK(std::abs(a.real() - b.real()) <= 1e-10 * scale);
    CHECK(std::abs(a.imag() - b.imag()) <= 1e-10 * scale);
  }
}

TEST_CASE("comb factor of a multi-pulse spectrum") {
  auto p = sh08_params(0.0, 3);
  p.period = 50.0;
  auto single = p;
  single.n_pulses = 1;
  for (double w : {2.0, 2.5, 2.6, 3.1}) {
    const cdouble comb = 1.0 + std::exp(cdouble(0.0, w * 50.0)) + std::exp(cdouble(0.0, w * 100.0));
    const cdouble ref = field_spectrum(w, single) * comb;
    CHECK(std::abs(field_spectrum(w, p) - ref) <= 1e-12 * std::abs(ref) + 1e-300);
  }
}

TEST_CASE("time series matches the explicit Bessel sum") {
  const auto p = sh08_params(0.7);
  const PulseTrain train(p);
  const int n_max = train.truncation().n_max;
  for (double t = -60.0; t <= 60.0; t += 0.37) {
    const cdouble ref = oracle::field_series(t, p.e0, p.tau, p.omega0, p.mod_amplitude, p.mod_time, p.phi, n_max);
    CHECK(std::abs(train.field_complex(t) - ref) <= 1e-12);
    CHECK(train.field(t) == doctest::Approx(ref.real()).epsilon(1e-12));
    CHECK(field_time(t, p, train.truncation()) == doctest::Approx(ref.real()).epsilon(1e-12));
  }
}

TEST_CASE("unmodulated envelope is a unit Gaussian") {
  auto p = sh08_params(0.0);
  p.mod_amplitude = 0.0;
  const PulseTrain train(p);
  for (double t = -10.0; t <= 10.0; t += 0.5) {
    const double g = std::exp(-t * t / (2.0 * p.tau * p.tau));
    CHECK(std::abs(train.envelope(t, EnvelopeBranch::Pump) - g) <= 1e-15);
    CHECK(std::abs(train.envelope(t, EnvelopeBranch::Stokes) - g) <= 1e-15);
  }
}

TEST_CASE("pump and Stokes envelopes carry opposite carrier phases") {
  const auto p = sh08_params(0.4);
  const PulseTrain train(p);
  const int n_max = train.truncation().n_max;
  for (double t = -40.0; t <= 40.0; t += 0.9) {
    cdouble pump = 0.0;
    cdouble stokes = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
      const double s = t - n * p.mod_time;
      const double g = oracle::bessel_series(n, p.mod_amplitude) * std::exp(-s * s / (2.0 * p.tau * p.tau));
      pump += g * std::exp(cdouble(0.0, -n * (p.phi + p.omega0 * p.mod_time)));
      stokes += g * std::exp(cdouble(0.0, -n * (p.phi - p.omega0 * p.mod_time)));
    }
    CHECK(std::abs(train.envelope(t, EnvelopeBranch::Pump) - pump) <= 1e-12);
    CHECK(std::abs(train.envelope(t, EnvelopeBranch::Stokes) - stokes) <= 1e-12);
    CHECK(std::abs(train.envelope(t, EnvelopeBranch::Pump)) <= train.envelope_bound() + 1e-15);
  }
}

TEST_CASE("rabi_envelope scales the normalised envelope") {
  const auto p = sh08_params(0.0);
  const auto trunc = make_truncation(p.mod_amplitude);
  const PulseTrain train(p, trunc);
  for (double t : {-3.0, 0.0, 1.5, 9.0}) {
    CHECK(std::abs(rabi_envelope(t, 0.44, p, trunc) - 0.44 * train.envelope(t, EnvelopeBranch::Pump)) <= 1e-15);
  }
}

TEST_CASE("train replicas repeat with the period, evaluated far into the train") {
  const auto p = sh08_params(0.0, 32);
  const PulseTrain train(p);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> offset(-30.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const double s = offset(rng);
    const cdouble first = train.envelope(s, EnvelopeBranch::Pump);
    const cdouble last = train.envelope_local(31.0 * p.period, s, EnvelopeBranch::Pump);
    CHECK(std::abs(first - last) <= 1e-12);
    CHECK(std::abs(train.envelope_local(32.0 * p.period, s, EnvelopeBranch::Pump)) == 0.0);
    CHECK(std::abs(train.envelope_local(31.0 * p.period, s, EnvelopeBranch::Pump, TrainMode::SinglePulse)) == 0.0);
  }
}

TEST_CASE("active windows bound the envelope") {
  auto p = sh08_params(0.0, 4);
  p.period = 400.0;
  const PulseTrain train(p);
  const auto windows = train.active_windows();
  REQUIRE(windows.size() == 4);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    CHECK(windows[i].start < i * p.period);
    CHECK(windows[i].end > i * p.period);
    if (i > 0) CHECK(windows[i].start > windows[i - 1].end);
  }
  for (double t = -200.0; t < 4.0 * p.period; t += 0.25) {
    bool inside = false;
    for (const auto& w : windows) inside = inside || (t >= w.start && t <= w.end);
    if (!inside) CHECK(std::abs(train.envelope(t, EnvelopeBranch::Pump)) < 1e-12);
  }
  CHECK(window_sparsity(windows, p) < 1.0);
}

TEST_CASE("overlapping windows merge") {
  auto p = sh08_params(0.0, 5);
  p.period = 20.0;
  const auto windows = PulseTrain(p).active_windows();
  CHECK(windows.size() == 1);
  CHECK(PulseTrain(p).active_windows(TrainMode::SinglePulse).size() == 1);
  CHECK_FALSE(p.warnings().empty());
}

TEST_CASE("parameter validation names the field") {
  auto p = sh08_params(0.0);
  p.tau = 0.0;
  try {
    p.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "pulse.tau");
  }
  p = sh08_params(0.0);
  p.n_pulses = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = sh08_params(0.0);
  p.mod_amplitude = 65.0;
  CHECK_THROWS_AS(PulseTrain{p}, ValidationError);
  p = sh08_params(0.0);
  p.period = std::nan("");
  CHECK_THROWS_AS(p.validate(), ValidationError);
}
