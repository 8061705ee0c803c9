#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "combraman/lambda_model.hpp"
#include "combraman/pulse_train.hpp"

namespace combraman {

using Matrix3 = Eigen::Matrix3cd;

/// Eigen-decomposition of a 3x3 Hermitian matrix, eigenvalues ascending.
struct HermitianEigen3 {
  Eigen::Vector3d values;
  Matrix3 vectors;  // columns
  double residual = 0.0;  // max_k ||H v_k - lambda_k v_k||
  bool used_jacobi = false;
};

/// Closed-form eigenvalues with cross-product eigenvectors; falls back to
/// Jacobi sweeps when the residual exceeds 1e-12 ||H|| (e.g. degeneracy).
HermitianEigen3 eigh3(const Matrix3& h);

/// Single-pulse three-level dressed Hamiltonian.
/// <1|H|2> = R e^{i(omega31 t + M)}, <2|H|3> = R' e^{i M'}, zero diagonal,
/// where R e^{iM} and R' e^{iM'} are the pump and Stokes envelopes (k = 0).
class DressedModel {
 public:
  DressedModel(const LevelSystem& levels, const PulseTrainParams& pulse, double peak_rabi,
               double threshold = 1e-12);

  Matrix3 at(double t) const;
  /// Active window of the single pulse cluster.
  TimeWindow window() const { return train_.active_windows(TrainMode::SinglePulse).front(); }
  const PulseTrain& train() const { return train_; }

 private:
  PulseTrain train_;
  double omega31_;
  double peak_rabi_;
};

Matrix3 dressed_hamiltonian(double t, const LevelSystem& levels, const PulseTrainParams& pulse,
                            double peak_rabi);

/// Continuity-tracked eigen-branches. Branch j is the one assigned to bare
/// state j at the first grid point.
struct DressedTrace {
  std::vector<double> times;
  std::vector<std::array<double, 3>> energies;                   // [sample][branch]
  std::vector<std::array<std::array<double, 3>, 3>> overlaps;    // [sample][bare][branch]
  std::vector<std::array<int, 3>> assignment;                    // branch -> ascending eigen index
  int refinements = 0;  // extra points inserted to resolve tracking

  std::size_t size() const { return times.size(); }
  /// Max over time of |<bare|branch>|^2.
  double max_overlap(int bare, int branch) const;
  /// Bare state with the largest weight in a branch at a sample.
  int dominant_bare(std::size_t sample, int branch) const;
};

struct TrackingOptions {
  double ambiguity = 1e-3;   // best and runner-up overlaps closer than this are ambiguous
  int max_refine_depth = 12; // bisection levels tried before giving up
};

/// Uniform grid over the single-pulse active window.
std::vector<double> dressed_grid(const LevelSystem& levels, const PulseTrainParams& pulse, int points = 4096,
                                 double threshold = 1e-12);

/// Eigen-decomposes H_d on the grid (with phi overriding pulse.phi) and
/// orders the eigenvectors by continuity. Throws TrackingAmbiguous.
DressedTrace eigen_traces(const LevelSystem& levels, const PulseTrainParams& pulse, double peak_rabi,
                          double phi, std::span<const double> grid, const TrackingOptions& options = {});

}  // namespace combraman
