#pragma once

#include <optional>
#include <span>
#include <vector>

#include "combraman/integrator.hpp"
#include "combraman/lambda_model.hpp"

namespace combraman {

/// Invariant measurements of a single state.
struct StateDiagnostics {
  double trace_error = 0.0;        // |tr rho - 1|
  double hermiticity_error = 0.0;  // max |rho - rho^dagger|
  double min_population = 0.0;
  double max_population = 0.0;
  double purity = 0.0;  // tr rho^2
};

StateDiagnostics diagnose(const Matrix& rho);

/// Complex Hermitian trace-one state of the N-level system.
class DensityMatrix {
 public:
  /// Validates: Hermitian within 1e-10, trace within 1e-9 of one, diagonal
  /// real and inside [-1e-9, 1 + 1e-9]. Throws ValidationError.
  explicit DensityMatrix(Matrix entries);

  /// |level><level|.
  static DensityMatrix pure(int dim, int level);
  /// No invariant check; propagation results are checked by the caller.
  static DensityMatrix unchecked(Matrix entries);

  const Matrix& matrix() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  double population(int level) const { return entries_(level, level).real(); }
  StateDiagnostics diagnostics() const { return diagnose(entries_); }

 private:
  struct NoCheck {};
  DensityMatrix(Matrix entries, NoCheck) : entries_(std::move(entries)) {}
  Matrix entries_;
};

/// Worst-case invariant values seen over a run.
struct InvariantReport {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_population = 1.0;
  double max_population = 0.0;
  long long states_checked = 0;

  void record(const StateDiagnostics& d);
  void merge(const InvariantReport& other);

  static constexpr double kTraceTolerance = 1e-8;
  static constexpr double kHermiticityTolerance = 1e-9;
  static constexpr double kPopulationSlack = 1e-6;
  bool passed() const;
};

/// Time-stamped populations and coherence magnitudes.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> populations;  // [level][sample]
  std::vector<double> abs_rho13;
  std::vector<double> sum_abs_rho12;
  std::vector<double> sum_abs_rho23;
  std::vector<char> boundary;  // sample sits on a window or gap boundary
  std::optional<DensityMatrix> final_state;
  StepStats step_stats;
  InvariantReport invariants;
  double window_sparsity = 0.0;

  std::size_t size() const { return times.size(); }
  int n_levels() const { return static_cast<int>(populations.size()); }
  void append(double t, const Matrix& rho, bool on_boundary);
  void append_samples(const Trajectory& other);
  /// Thins non-boundary samples uniformly so that size() <= max_samples
  /// where the boundary samples allow it.
  void decimate(std::size_t max_samples);
  /// Max over samples of the summed excited-manifold population.
  double max_excited_population() const;
};

/// -i [H(t), rho] + relaxation.
Matrix rhs(double t, const Matrix& rho, const RwaHamiltonian& h, const DecoherenceRates& rates);

struct WindowResult {
  DensityMatrix state;
  Trajectory samples;
};

/// Adaptive 5(4) propagation across [t0, t1], re-Hermitising after every
/// accepted step. Samples every `sample_stride`-th accepted step plus the
/// endpoint, or, if `sample_times` is non-empty, exactly at those times via
/// the dense output.
WindowResult propagate_window(const DensityMatrix& rho0, const RwaHamiltonian& h,
                              const DecoherenceRates& rates, double t0, double t1,
                              const IntegratorConfig& cfg, std::span<const double> sample_times = {});

/// Closed-form field-free relaxation over dt.
DensityMatrix propagate_gap(const DensityMatrix& rho0, const DecoherenceRates& rates, double dt);

/// Padded, merged propagation windows for a Hamiltonian.
std::vector<TimeWindow> propagation_windows(const RwaHamiltonian& h, const IntegratorConfig& cfg);

/// Alternates window and gap propagation over the whole train. `t_end`
/// defaults to the first window start plus n_pulses periods.
Trajectory run_train(const DensityMatrix& rho0, const RwaHamiltonian& h, const DecoherenceRates& rates,
                     const IntegratorConfig& cfg, std::optional<double> t_end = std::nullopt);

Trajectory run_train(const DensityMatrix& rho0, const LevelSystem& levels, const PulseTrainParams& pulse,
                     double peak_rabi, const DecoherenceRates& rates, const IntegratorConfig& cfg);

/// Result of running each excited level as its own three-level system.
struct BlockRun {
  std::vector<Trajectory> blocks;  // one per q, each started in |1><1|
  /// Sum over blocks of the final-state |3> population.
  double incoherent_final_population() const;
  /// |sum_q rho^(q)_31 / sqrt(rho^(q)_11)|^2: the |3> population of the
  /// superposed block amplitudes. Exact to second order in the field when
  /// the blocks start in |1> and carry no relaxation.
  double superposed_final_population() const;
};

BlockRun run_blocks(const RwaHamiltonian& h, const DecoherenceRates& rates, const IntegratorConfig& cfg,
                    std::optional<double> t_end = std::nullopt);

}  // namespace combraman
