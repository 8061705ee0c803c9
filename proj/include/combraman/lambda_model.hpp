#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "combraman/pulse_train.hpp"

namespace combraman {

using Matrix = Eigen::MatrixXcd;

/// Lambda system: initial |1>, excited manifold |2_1> .. |2_M>, final |3>.
/// Frequencies in rad/fs.
struct LevelSystem {
  double omega21 = 0.0;
  double omega32 = 0.0;
  double omega31 = 0.0;
  double delta_omega = 0.0;  // excited-manifold spacing
  int n_excited = 5;

  int dim() const { return n_excited + 2; }
  void validate() const;
  /// Reports omega32 - omega21 != omega31 (not enforced).
  std::vector<std::string> warnings() const;

  bool operator==(const LevelSystem&) const = default;
};

/// Population decay and collisional dephasing rates, all in 1/fs.
struct DecoherenceRates {
  double gamma1 = 0.0;      // excited -> initial
  double gamma2 = 0.0;      // excited -> final
  double gamma3 = 0.0;      // initial -> final
  double dephasing1 = 0.0;  // excited / initial coherences
  double dephasing2 = 0.0;  // excited / final coherences
  double dephasing3 = 0.0;  // initial / final coherence

  void validate() const;
  bool any() const {
    return gamma1 > 0 || gamma2 > 0 || gamma3 > 0 || dephasing1 > 0 || dephasing2 > 0 || dephasing3 > 0;
  }

  bool operator==(const DecoherenceRates&) const = default;
};

/// Index map of the (M+2)-dimensional basis.
struct LevelIndex {
  int n_excited = 1;

  int dim() const { return n_excited + 2; }
  static constexpr int initial() { return 0; }
  /// q is 1-based, as in |2_q>.
  static constexpr int excited(int q) { return q; }
  int final_state() const { return n_excited + 1; }
};

/// Named Lambda-system frequency sets, converted with the given convention.
LevelSystem level_preset(const std::string& name, bool frequencies_are_angular = false);
std::vector<std::string> level_preset_names();

/// Time-dependent RWA interaction Hamiltonian (rad/fs, hbar absorbed).
///
/// <1|H|2_q> = Omega(t) exp(i((omega0 - omega21) - (q-1) d_omega) t) and
/// <2_q|H|3> = Omega'(t) exp(i((omega0 - omega32) - (q-1) d_omega) t), where
/// Omega uses the pump envelope and Omega' the conjugate-phase (Stokes) one.
/// The diagonal is identically zero.
class RwaHamiltonian {
 public:
  RwaHamiltonian(const LevelSystem& levels, const PulseTrainParams& pulse, double peak_rabi,
                 double threshold = 1e-12, TrainMode mode = TrainMode::FullTrain);

  /// Evaluation context anchored at a (possibly large) origin time.
  class Frame {
   public:
    double origin() const { return origin_; }
    void evaluate(double offset, Matrix& out) const;

   private:
    friend class RwaHamiltonian;
    const RwaHamiltonian* owner_ = nullptr;
    double origin_ = 0.0;
    std::vector<cdouble> pump_origin_phase_;
    std::vector<cdouble> stokes_origin_phase_;
  };

  Frame frame(double origin) const;
  void evaluate(double t, Matrix& out) const { frame(t).evaluate(0.0, out); }
  Matrix operator()(double t) const;

  int dim() const { return static_cast<int>(pump_detuning_.size()) + 2; }
  int n_excited() const { return static_cast<int>(pump_detuning_.size()); }
  LevelIndex index() const { return {n_excited()}; }
  double peak_rabi() const { return peak_rabi_; }
  bool field_free() const { return peak_rabi_ == 0.0; }
  TrainMode mode() const { return mode_; }
  const LevelSystem& levels() const { return levels_; }
  const PulseTrain& train() const { return *train_; }
  const std::vector<double>& pump_detunings() const { return pump_detuning_; }
  const std::vector<double>& stokes_detunings() const { return stokes_detuning_; }

  /// Active windows of the underlying pulse train.
  std::vector<TimeWindow> active_windows() const { return train_->active_windows(mode_); }

  /// Three-level Hamiltonian of the q-th Lambda block alone (1-based q).
  RwaHamiltonian block(int q) const;

 private:
  LevelSystem levels_;
  std::shared_ptr<const PulseTrain> train_;
  double peak_rabi_;
  TrainMode mode_;
  std::vector<double> pump_detuning_;
  std::vector<double> stokes_detuning_;
};

RwaHamiltonian build_hamiltonian(const LevelSystem& levels, const PulseTrainParams& pulse,
                                 double peak_rabi);

/// Spontaneous-decay and dephasing contribution to d(rho)/dt.
Matrix relaxation_rhs(const Matrix& rho, const DecoherenceRates& rates, const LevelIndex& index);

/// out += relaxation_rhs(rho); no allocation.
void add_relaxation(const Matrix& rho, const DecoherenceRates& rates, const LevelIndex& index,
                    Matrix& out);

}  // namespace combraman
