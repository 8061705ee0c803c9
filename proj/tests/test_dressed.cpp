#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "combraman/dressed.hpp"
#include "combraman/errors.hpp"
#include "combraman/units.hpp"
#include "doctest.h"

using namespace combraman;

namespace {

Matrix3 random_hermitian(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix3 a;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a(i, j) = cdouble(g(rng), g(rng));
  }
  return 0.5 * (a + a.adjoint());
}

struct Fig4 {
  LevelSystem levels = level_preset("krb-ni08");
  PulseTrainParams pulse;
  double peak;

  explicit Fig4(double phi) {
    levels.n_excited = 1;
    pulse.tau = 3.0;
    pulse.period = 1.92e7;
    pulse.n_pulses = 1;
    pulse.omega0 = levels.omega32;
    pulse.mod_amplitude = 4.0;
    pulse.mod_time = 1000.0 / 309.3;
    pulse.phi = phi;
    peak = units::thz_to_rad_per_fs(125.5, false);
  }
};

}  // namespace

TEST_CASE("eigh3 agrees with Eigen's self-adjoint solver") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const Matrix3 h = random_hermitian(rng, std::pow(10.0, (trial % 7) - 3));
    const auto ours = eigh3(h);
    const Eigen::SelfAdjointEigenSolver<Matrix3> ref(h);
    const double scale = std::max(h.norm(), 1e-300);
    CHECK((ours.values - ref.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    CHECK(ours.residual <= 1e-12 * scale);
    CHECK((ours.vectors.adjoint() * ours.vectors - Matrix3::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(ours.values(0) <= ours.values(1));
    CHECK(ours.values(1) <= ours.values(2));
  }
}

TEST_CASE("eigh3 on degenerate and trivial matrices") {
  const auto zero = eigh3(Matrix3::Zero());
  CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK((zero.vectors - Matrix3::Identity()).cwiseAbs().maxCoeff() == 0.0);

  Matrix3 d = Matrix3::Zero();
  d(0, 0) = 1.0;
  d(1, 1) = 1.0;
  d(2, 2) = 2.0;
  const auto e = eigh3(d);
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
  CHECK(e.values(2) == doctest::Approx(2.0));
  CHECK(e.residual <= 1e-12);

  // Lambda-type matrix: eigenvalues {0, +-s}.
  Matrix3 l = Matrix3::Zero();
  l(0, 1) = cdouble(0.3, -0.4);
  l(1, 0) = std::conj(l(0, 1));
  l(1, 2) = cdouble(-1.2, 0.5);
  l(2, 1) = std::conj(l(1, 2));
  const double s = std::sqrt(0.25 + 1.69);
  const auto le = eigh3(l);
  CHECK(le.values(0) == doctest::Approx(-s).epsilon(1e-14));
  CHECK(std::abs(le.values(1)) <= 1e-14);
  CHECK(le.values(2) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("dressed Hamiltonian layout") {
  const Fig4 f(0.0);
  const DressedModel model(f.levels, f.pulse, f.peak);
  const PulseTrain train(f.pulse);
  for (double t : {-7.0, -1.0, 0.0, 2.0, 5.5}) {
    const Matrix3 h = model.at(t);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(h(0, 2) == cdouble(0.0, 0.0));
    for (int k = 0; k < 3; ++k) CHECK(h(k, k) == cdouble(0.0, 0.0));
    const cdouble r = f.peak * train.envelope(t, EnvelopeBranch::Pump) * std::exp(cdouble(0.0, f.levels.omega31 * t));
    CHECK(std::abs(h(0, 1) - r) <= 1e-14);
    CHECK(std::abs(h(1, 2) - f.peak * train.envelope(t, EnvelopeBranch::Stokes)) <= 1e-14);
    CHECK((dressed_hamiltonian(t, f.levels, f.pulse, f.peak) - h).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("dressed spectrum is {0, +-s} across the window") {
  for (double phi : {0.0, std::numbers::pi / 2.0}) {
    const Fig4 f(phi);
    const DressedModel model(f.levels, f.pulse, f.peak);
    const auto w = model.window();
    std::mt19937_64 rng(1000);
    std::uniform_real_distribution<double> when(w.start, w.end);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Matrix3 h = model.at(when(rng));
      const double s = std::sqrt(std::norm(h(0, 1)) + std::norm(h(1, 2)));
      const auto e = eigh3(h);
      if (s == 0.0) continue;
      worst = std::max(worst, std::abs(e.values(0) + s) / s);
      worst = std::max(worst, std::abs(e.values(1)) / s);
      worst = std::max(worst, std::abs(e.values(2) - s) / s);
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("dark and bright state overlaps") {
  const Fig4 f(0.0);
  const auto grid = dressed_grid(f.levels, f.pulse, 1024);
  const auto trace = eigen_traces(f.levels, f.pulse, f.peak, 0.0, grid);
  REQUIRE(trace.size() == 1024);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    double col_sum[3] = {0, 0, 0};
    for (int b = 0; b < 3; ++b) {
      double row = 0.0;
      for (int j = 0; j < 3; ++j) {
        row += trace.overlaps[i][b][j];
        col_sum[j] += trace.overlaps[i][b][j];
      }
      CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (double c : col_sum) CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
    // Where the field is on, one branch has no weight on the excited state
    // and the other two have exactly one half.
    const Matrix3 h = DressedModel(f.levels, f.pulse, f.peak).at(trace.times[i]);
    const double s = std::sqrt(std::norm(h(0, 1)) + std::norm(h(1, 2)));
    if (s > 1e-3 * f.peak) {
      std::array<double, 3> ex = trace.overlaps[i][1];
      std::sort(ex.begin(), ex.end());
      CHECK(ex[0] <= 1e-12);
      CHECK(ex[1] == doctest::Approx(0.5).epsilon(1e-10));
      CHECK(ex[2] == doctest::Approx(0.5).epsilon(1e-10));
    }
  }
}

TEST_CASE("tracking is stable under grid refinement") {
  for (double phi : {0.0, std::numbers::pi / 2.0}) {
    const Fig4 f(phi);
    const auto coarse_grid = dressed_grid(f.levels, f.pulse, 2049);
    const auto fine_grid = dressed_grid(f.levels, f.pulse, 4097);
    const auto coarse = eigen_traces(f.levels, f.pulse, f.peak, phi, coarse_grid);
    const auto fine = eigen_traces(f.levels, f.pulse, f.peak, phi, fine_grid);
    int mismatched = 0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      CHECK(fine.times[2 * i] == doctest::Approx(coarse.times[i]));
      for (int j = 0; j < 3; ++j) {
        if (std::abs(coarse.energies[i][j] - fine.energies[2 * i][j]) > 1e-9 * f.peak) ++mismatched;
      }
    }
    CHECK(mismatched == 0);
  }
}

TEST_CASE("first-point assignment maximises the bare-state weight") {
  const Fig4 f(0.0);
  const auto grid = dressed_grid(f.levels, f.pulse, 256);
  const auto trace = eigen_traces(f.levels, f.pulse, f.peak, 0.0, grid);
  const auto& o = trace.overlaps[0];
  const double chosen = o[0][0] + o[1][1] + o[2][2];
  std::array<int, 3> perm{0, 1, 2};
  do {
    double alt = 0.0;
    for (int j = 0; j < 3; ++j) alt += o[perm[j]][j];
    CHECK(alt <= chosen + 1e-12);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("tracking input validation") {
  const Fig4 f(0.0);
  const std::vector<double> bad{0.0, 0.0};
  CHECK_THROWS_AS(eigen_traces(f.levels, f.pulse, f.peak, 0.0, bad), ValidationError);
  CHECK_THROWS_AS(eigen_traces(f.levels, f.pulse, f.peak, 0.0, std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(dressed_grid(f.levels, f.pulse, 1), ValidationError);
}

TEST_CASE("ambiguity is reported when refinement is disallowed") {
  // A 0.99 ambiguity gap with no bisection cannot be met on a coarse grid.
  const Fig4 f(0.0);
  const auto grid = dressed_grid(f.levels, f.pulse, 64);
  TrackingOptions strict;
  strict.max_refine_depth = 0;
  strict.ambiguity = 0.99;
  CHECK_THROWS_AS(eigen_traces(f.levels, f.pulse, f.peak, 0.0, grid, strict), TrackingAmbiguous);
}
