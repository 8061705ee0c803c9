#include "combraman/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "combraman/errors.hpp"

namespace combraman {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// Fifth minus fourth order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner, dopri5 dense output).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw ValidationError("integrator.rel_tol", "must lie in (0, 1e-2]");
  if (!(abs_tol > 0.0 && abs_tol <= 1e-2)) throw ValidationError("integrator.abs_tol", "must lie in (0, 1e-2]");
  if (!(max_step > 0.0 && std::isfinite(max_step))) throw ValidationError("integrator.max_step", "must be > 0");
  if (sample_stride < 1) throw ValidationError("integrator.sample_stride", "must be >= 1");
  if (!(window_padding >= 0.0 && std::isfinite(window_padding))) {
    throw ValidationError("integrator.window_padding", "must be >= 0");
  }
  if (max_samples < 2) throw ValidationError("integrator.max_samples", "must be >= 2");
}

Matrix DenseStep::at(double s) const {
  const double theta = (s - start_) / step_;
  const double theta1 = 1.0 - theta;
  return r1_ + theta * (r2_ + theta1 * (r3_ + theta * (r4_ + theta1 * r5_)));
}

DormandPrince54::DormandPrince54(double rel_tol, double abs_tol, double max_step)
    : rel_tol_(rel_tol), abs_tol_(abs_tol), max_step_(max_step) {}

double DormandPrince54::error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1) const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < err.cols(); ++j) {
    for (Eigen::Index i = 0; i < err.rows(); ++i) {
      const double scale = abs_tol_ + rel_tol_ * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
      worst = std::max(worst, std::abs(err(i, j)) / scale);
    }
  }
  return worst;
}

double DormandPrince54::initial_step(const Rhs& f, double s0, const Matrix& y0, const Matrix& f0,
                                     double span, StepStats& stats) {
  const Matrix zero = Matrix::Zero(y0.rows(), y0.cols());
  const double d0 = error_norm(y0, zero, y0);
  const double d1 = error_norm(f0, zero, y0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min({h0, max_step_, span});
  const Matrix y1 = y0 + h0 * f0;
  Matrix f1(y0.rows(), y0.cols());
  f(s0 + h0, y1, f1);
  ++stats.rhs_evaluations;
  const double d2 = error_norm(f1 - f0, zero, y0) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, max_step_, span});
}

void DormandPrince54::integrate(const Rhs& f, double s0, double s1, Matrix& y, StepStats& stats,
                                const Observer& observer, const Projection& project) {
  if (!(s1 > s0)) return;
  const auto rows = y.rows();
  const auto cols = y.cols();
  Matrix k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols), k5(rows, cols),
      k6(rows, cols), k7(rows, cols), tmp(rows, cols), y_new(rows, cols), err(rows, cols);

  f(s0, y, k1);
  ++stats.rhs_evaluations;
  double h = initial_step(f, s0, y, k1, s1 - s0, stats);
  double s = s0;
  bool last_rejected = false;
  DenseStep dense;

  while (s < s1) {
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(s), std::abs(s1));
    if (h < min_step) {
      throw StepSizeUnderflow("step size underflow at s = " + std::to_string(s) +
                                  " (stiff problem or tolerances too tight)",
                              s, h);
    }
    bool final_step = false;
    if (s + h >= s1) {
      h = s1 - s;
      final_step = true;
    }

    tmp = y + h * a21 * k1;
    f(s + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(s + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(s + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(s + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(s + h, tmp, k6);
    y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double s_new = final_step ? s1 : s + h;
    f(s_new, y_new, k7);
    stats.rhs_evaluations += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double norm = error_norm(err, y, y_new);

    if (norm <= 1.0) {
      ++stats.accepted;
      if (observer) {
        dense.start_ = s;
        dense.step_ = h;
        dense.end_ = s_new;
        dense.r1_ = y;
        dense.r2_ = y_new - y;
        dense.r3_ = h * k1 - dense.r2_;
        dense.r4_ = dense.r2_ - h * k7 - dense.r3_;
        dense.r5_ = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      }
      y.swap(y_new);
      if (observer) observer(dense, y);
      if (project) project(y);
      k1.swap(k7);
      s = s_new;
      double factor = norm == 0.0 ? kMaxFactor : kSafety * std::pow(norm, -0.2);
      factor = std::clamp(factor, kMinFactor, last_rejected ? 1.0 : kMaxFactor);
      h = std::min(h * factor, max_step_);
      last_rejected = false;
    } else {
      ++stats.rejected;
      h *= std::max(kMinFactor, kSafety * std::pow(norm, -0.2));
      last_rejected = true;
    }
  }
}

}  // namespace combraman
