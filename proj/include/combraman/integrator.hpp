#pragma once

#include <Eigen/Dense>
#include <functional>

namespace combraman {

using Matrix = Eigen::MatrixXcd;

/// Step control for the windowed propagation.
struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = 0.15;       // fs; tau / 20 for the 3 fs pulses
  int sample_stride = 1;        // keep every n-th accepted step
  double window_padding = 8.0;  // multiples of tau added on each side of a window
  int max_samples = 20000;      // trajectory decimation cap

  void validate() const;
  bool operator==(const IntegratorConfig&) const = default;
};

struct StepStats {
  long long accepted = 0;
  long long rejected = 0;
  long long rhs_evaluations = 0;
  int windows = 0;
  int gaps = 0;

  StepStats& operator+=(const StepStats& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    rhs_evaluations += o.rhs_evaluations;
    windows += o.windows;
    gaps += o.gaps;
    return *this;
  }
};

/// One accepted step with its fourth-order continuous extension.
class DenseStep {
 public:
  double start() const { return start_; }
  double end() const { return end_; }
  double step() const { return step_; }
  /// Interpolated state at s in [start, end].
  Matrix at(double s) const;

 private:
  friend class DormandPrince54;
  double start_ = 0.0;
  double step_ = 0.0;
  double end_ = 0.0;
  Matrix r1_, r2_, r3_, r4_, r5_;
};

/// Embedded Runge-Kutta 5(4) pair of Dormand and Prince with error control
/// in the max norm: |err_ij| <= abs_tol + rel_tol * max(|y_ij|, |y'_ij|).
class DormandPrince54 {
 public:
  using Rhs = std::function<void(double s, const Matrix& y, Matrix& dy)>;
  /// Called after each accepted step with the state before `project` runs.
  using Observer = std::function<void(const DenseStep& step, const Matrix& y)>;
  /// Optional projection applied to the state after each accepted step.
  using Projection = std::function<void(Matrix& y)>;

  DormandPrince54(double rel_tol, double abs_tol, double max_step);

  /// Advances y from s0 to s1 (s1 > s0). Throws StepSizeUnderflow.
  void integrate(const Rhs& f, double s0, double s1, Matrix& y, StepStats& stats,
                 const Observer& observer = {}, const Projection& project = {});

 private:
  double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1) const;
  double initial_step(const Rhs& f, double s0, const Matrix& y0, const Matrix& f0, double span,
                      StepStats& stats);

  double rel_tol_;
  double abs_tol_;
  double max_step_;
};

}  // namespace combraman
