#include <cmath>
#include <vector>

#include "combraman/errors.hpp"
#include "combraman/integrator.hpp"
#include "combraman/pulse_train.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace combraman;

namespace {

// -i [H, rho] for a constant 2x2 drive H = (Omega / 2) sigma_x.
DormandPrince54::Rhs two_level(double omega) {
  Matrix h(2, 2);
  h << 0.0, 0.5 * omega, 0.5 * omega, 0.0;
  return [h](double, const Matrix& y, Matrix& dy) { dy = cdouble(0.0, -1.0) * (h * y - y * h); };
}

Matrix ground() {
  Matrix y = Matrix::Zero(2, 2);
  y(0, 0) = 1.0;
  return y;
}

}  // namespace

TEST_CASE("resonant Rabi oscillation over ten periods") {
  const double omega = 0.7;
  const double period = 2.0 * M_PI / omega;
  DormandPrince54 dp(1e-10, 1e-12, 0.25);
  Matrix y = ground();
  StepStats stats;
  double worst = 0.0;
  auto observer = [&](const DenseStep& step, const Matrix&) {
    for (int k = 0; k < 8; ++k) {
      const double s = step.start() + step.step() * (k + 0.5) / 8.0;
      worst = std::max(worst, std::abs(step.at(s)(1, 1).real() - oracle::rabi_excited(omega, s)));
    }
  };
  dp.integrate(two_level(omega), 0.0, 10.0 * period, y, stats, observer);
  worst = std::max(worst, std::abs(y(1, 1).real() - oracle::rabi_excited(omega, 10.0 * period)));
  CHECK(worst <= 1e-6);
  CHECK(stats.accepted > 0);
  CHECK(stats.rhs_evaluations <= 6 * (stats.accepted + stats.rejected) + 8);
}

TEST_CASE("dense output endpoints match the step") {
  DormandPrince54 dp(1e-9, 1e-12, 1.0);
  Matrix y = ground();
  StepStats stats;
  double last_end = 0.0;
  auto observer = [&](const DenseStep& step, const Matrix& state) {
    CHECK(step.start() == doctest::Approx(last_end));
    CHECK((step.at(step.end()) - state).cwiseAbs().maxCoeff() <= 1e-12);
    last_end = step.end();
  };
  dp.integrate(two_level(1.3), 0.0, 20.0, y, stats, observer);
  CHECK(last_end == 20.0);
}

TEST_CASE("exponential decay to tolerance") {
  DormandPrince54 dp(1e-11, 1e-14, 10.0);
  Matrix y = Matrix::Constant(1, 1, cdouble(1.0, 0.0));
  StepStats stats;
  auto f = [](double, const Matrix& x, Matrix& dx) { dx = -0.37 * x; };
  dp.integrate(f, 0.0, 30.0, y, stats);
  CHECK(y(0, 0).real() == doctest::Approx(std::exp(-0.37 * 30.0)).epsilon(1e-8));
}

TEST_CASE("projection runs after the observer") {
  DormandPrince54 dp(1e-8, 1e-10, 0.5);
  Matrix y = ground();
  StepStats stats;
  int observed = 0;
  int projected = 0;
  auto observer = [&](const DenseStep&, const Matrix&) {
    CHECK(observed == projected);
    ++observed;
  };
  auto project = [&](Matrix&) { ++projected; };
  dp.integrate(two_level(1.0), 0.0, 5.0, y, stats, observer, project);
  CHECK(observed == projected);
  CHECK(observed == stats.accepted);
}

TEST_CASE("step size underflow is reported") {
  DormandPrince54 dp(1e-10, 1e-12, 0.1);
  Matrix y = Matrix::Constant(1, 1, cdouble(1.0, 0.0));
  StepStats stats;
  auto blowup = [](double, const Matrix& x, Matrix& dx) { dx = x.cwiseProduct(x).cwiseProduct(x); };
  CHECK_THROWS_AS(dp.integrate(blowup, 0.0, 1.0, y, stats), StepSizeUnderflow);
}

TEST_CASE("integrator configuration validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.max_step = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.sample_stride = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.max_samples = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
