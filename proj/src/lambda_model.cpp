#include "combraman/lambda_model.hpp"

#include <cmath>

#include "combraman/errors.hpp"
#include "combraman/units.hpp"

namespace combraman {
namespace {

constexpr cdouble kI{0.0, 1.0};

bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

struct QuotedLevels {
  const char* name;
  double nu21;
  double nu32;
  double nu31;
};

// Transition frequencies as quoted, in THz; spacing is 0.1 omega31 for both.
constexpr QuotedLevels kLevelPresets[] = {
    {"krb-sh08", 340.7, 410.7, 70.0},
    {"krb-ni08", 309.3, 434.8, 125.5},
};

}  // namespace

void LevelSystem::validate() const {
  if (!std::isfinite(omega21)) throw ValidationError("levels.omega21", "must be finite");
  if (!std::isfinite(omega32)) throw ValidationError("levels.omega32", "must be finite");
  if (!std::isfinite(omega31)) throw ValidationError("levels.omega31", "must be finite");
  if (!non_negative(delta_omega)) throw ValidationError("levels.delta_omega", "must be >= 0");
  if (n_excited < 1) throw ValidationError("levels.n_excited", "must be >= 1");
}

std::vector<std::string> LevelSystem::warnings() const {
  std::vector<std::string> out;
  if (std::abs(omega32 - omega21 - omega31) > 1e-9 * std::abs(omega31)) {
    out.emplace_back("omega32 - omega21 differs from omega31");
  }
  return out;
}

void DecoherenceRates::validate() const {
  if (!non_negative(gamma1)) throw ValidationError("rates.gamma1", "must be >= 0");
  if (!non_negative(gamma2)) throw ValidationError("rates.gamma2", "must be >= 0");
  if (!non_negative(gamma3)) throw ValidationError("rates.gamma3", "must be >= 0");
  if (!non_negative(dephasing1)) throw ValidationError("rates.dephasing1", "must be >= 0");
  if (!non_negative(dephasing2)) throw ValidationError("rates.dephasing2", "must be >= 0");
  if (!non_negative(dephasing3)) throw ValidationError("rates.dephasing3", "must be >= 0");
}

LevelSystem level_preset(const std::string& name, bool frequencies_are_angular) {
  for (const auto& p : kLevelPresets) {
    if (name != p.name) continue;
    LevelSystem s;
    s.omega21 = units::thz_to_rad_per_fs(p.nu21, frequencies_are_angular);
    s.omega32 = units::thz_to_rad_per_fs(p.nu32, frequencies_are_angular);
    s.omega31 = units::thz_to_rad_per_fs(p.nu31, frequencies_are_angular);
    s.delta_omega = 0.1 * s.omega31;
    s.n_excited = 5;
    return s;
  }
  throw UnknownPreset(name);
}

std::vector<std::string> level_preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kLevelPresets) out.emplace_back(p.name);
  return out;
}

RwaHamiltonian::RwaHamiltonian(const LevelSystem& levels, const PulseTrainParams& pulse,
                               double peak_rabi, double threshold, TrainMode mode)
    : levels_(levels),
      train_(std::make_shared<const PulseTrain>(pulse, threshold)),
      peak_rabi_(peak_rabi),
      mode_(mode) {
  levels_.validate();
  if (!std::isfinite(peak_rabi)) throw ValidationError("peak_rabi", "must be finite");
  for (int q = 1; q <= levels_.n_excited; ++q) {
    const double shift = (q - 1) * levels_.delta_omega;
    pump_detuning_.push_back((pulse.omega0 - levels_.omega21) - shift);
    stokes_detuning_.push_back((pulse.omega0 - levels_.omega32) - shift);
  }
}

RwaHamiltonian::Frame RwaHamiltonian::frame(double origin) const {
  Frame f;
  f.owner_ = this;
  f.origin_ = origin;
  f.pump_origin_phase_.reserve(pump_detuning_.size());
  f.stokes_origin_phase_.reserve(stokes_detuning_.size());
  for (std::size_t q = 0; q < pump_detuning_.size(); ++q) {
    f.pump_origin_phase_.push_back(std::exp(kI * (pump_detuning_[q] * origin)));
    f.stokes_origin_phase_.push_back(std::exp(kI * (stokes_detuning_[q] * origin)));
  }
  return f;
}

void RwaHamiltonian::Frame::evaluate(double offset, Matrix& out) const {
  const auto& h = *owner_;
  const int dim = h.dim();
  out.setZero(dim, dim);
  if (h.field_free()) return;
  const cdouble pump = h.peak_rabi_ * h.train_->envelope_local(origin_, offset, EnvelopeBranch::Pump, h.mode_);
  const cdouble stokes =
      h.peak_rabi_ * h.train_->envelope_local(origin_, offset, EnvelopeBranch::Stokes, h.mode_);
  const int last = dim - 1;
  for (int q = 1; q < last; ++q) {
    const auto i = static_cast<std::size_t>(q - 1);
    const cdouble h12 = pump * pump_origin_phase_[i] * std::exp(kI * (h.pump_detuning_[i] * offset));
    const cdouble h23 =
        stokes * stokes_origin_phase_[i] * std::exp(kI * (h.stokes_detuning_[i] * offset));
    out(0, q) = h12;
    out(q, 0) = std::conj(h12);
    out(q, last) = h23;
    out(last, q) = std::conj(h23);
  }
}

Matrix RwaHamiltonian::operator()(double t) const {
  Matrix out;
  evaluate(t, out);
  return out;
}

RwaHamiltonian RwaHamiltonian::block(int q) const {
  if (q < 1 || q > n_excited()) throw ShapeMismatch("block index out of range");
  RwaHamiltonian b = *this;
  b.levels_.n_excited = 1;
  const auto i = static_cast<std::size_t>(q - 1);
  b.pump_detuning_ = {pump_detuning_[i]};
  b.stokes_detuning_ = {stokes_detuning_[i]};
  return b;
}

RwaHamiltonian build_hamiltonian(const LevelSystem& levels, const PulseTrainParams& pulse,
                                 double peak_rabi) {
  return RwaHamiltonian(levels, pulse, peak_rabi);
}

void add_relaxation(const Matrix& rho, const DecoherenceRates& r, const LevelIndex& index,
                    Matrix& out) {
  const int dim = index.dim();
  if (rho.rows() != dim || rho.cols() != dim || out.rows() != dim || out.cols() != dim) {
    throw ShapeMismatch("density matrix is " + std::to_string(rho.rows()) + "x" +
                        std::to_string(rho.cols()) + ", level system needs " + std::to_string(dim));
  }
  const int g = LevelIndex::initial();
  const int f = index.final_state();
  const double excited_decay = r.gamma1 + r.gamma2;

  double excited_population = 0.0;
  for (int q = 1; q <= index.n_excited; ++q) excited_population += rho(q, q).real();

  const double p11 = rho(g, g).real();
  out(g, g) += r.gamma1 * excited_population - r.gamma3 * p11;
  out(f, f) += r.gamma2 * excited_population + r.gamma3 * p11;

  const double initial_excited = 0.5 * excited_decay + r.dephasing1 + 0.5 * r.gamma3;
  const double excited_final = 0.5 * excited_decay + r.dephasing2;
  const double initial_final = r.dephasing3 + 0.5 * r.gamma3;

  for (int q = 1; q <= index.n_excited; ++q) {
    for (int p = 1; p <= index.n_excited; ++p) out(q, p) -= excited_decay * rho(q, p);
    out(g, q) -= initial_excited * rho(g, q);
    out(q, g) -= initial_excited * rho(q, g);
    out(q, f) -= excited_final * rho(q, f);
    out(f, q) -= excited_final * rho(f, q);
  }
  out(g, f) -= initial_final * rho(g, f);
  out(f, g) -= initial_final * rho(f, g);
}

Matrix relaxation_rhs(const Matrix& rho, const DecoherenceRates& rates, const LevelIndex& index) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  add_relaxation(rho, rates, index, out);
  return out;
}

}  // namespace combraman
