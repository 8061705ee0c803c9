#include "combraman/dressed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "combraman/errors.hpp"

namespace combraman {
namespace {

constexpr cdouble kI{0.0, 1.0};

using Vector3 = Eigen::Vector3cd;

constexpr std::array<std::array<int, 3>, 6> kPermutations{{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
}};

double residual_of(const Matrix3& h, const Eigen::Vector3d& values, const Matrix3& vectors) {
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    worst = std::max(worst, (h * vectors.col(k) - values(k) * vectors.col(k)).norm());
  }
  return worst;
}

// Cyclic Jacobi sweeps; each rotation first removes the phase of the pivot.
HermitianEigen3 jacobi(const Matrix3& h) {
  Matrix3 a = h;
  Matrix3 v = Matrix3::Identity();
  const double scale = std::max(h.norm(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = std::sqrt(std::norm(a(0, 1)) + std::norm(a(0, 2)) + std::norm(a(1, 2)));
    if (off <= 1e-17 * scale) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        const cdouble phase = a(p, q) / mag;
        const double zeta = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        Matrix3 rot = Matrix3::Identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s * phase;
        rot(q, p) = -s * std::conj(phase);
        a = rot.adjoint() * a * rot;
        v = v * rot;
      }
    }
  }
  HermitianEigen3 out;
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&a](int x, int y) { return a(x, x).real() < a(y, y).real(); });
  for (int k = 0; k < 3; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  out.residual = residual_of(h, out.values, out.vectors);
  out.used_jacobi = true;
  return out;
}

// Null vector of A = h - lambda I from the largest cross product of its
// columns. Eigen conjugates complex cross products, and for Hermitian A the
// conjugated columns are the rows, so the result is annihilated by A.
bool null_vector(const Matrix3& h, double lambda, Vector3& out) {
  Matrix3 a = h;
  for (int i = 0; i < 3; ++i) a(i, i) -= lambda;
  const Vector3 c0 = a.col(0);
  const Vector3 c1 = a.col(1);
  const Vector3 c2 = a.col(2);
  const std::array<Vector3, 3> candidates{c0.cross(c1), c0.cross(c2), c1.cross(c2)};
  double best = 0.0;
  for (const auto& c : candidates) {
    const double n = c.norm();
    if (n > best) {
      best = n;
      out = c / n;
    }
  }
  return best > 0.0;
}

}  // namespace

HermitianEigen3 eigh3(const Matrix3& h) {
  const double norm = h.norm();
  if (norm == 0.0) {
    HermitianEigen3 out;
    out.values.setZero();
    out.vectors = Matrix3::Identity();
    return out;
  }

  // Trigonometric solution of the characteristic cubic of B = (H - m I) / p.
  const double m = h.trace().real() / 3.0;
  Matrix3 b = h;
  for (int i = 0; i < 3; ++i) b(i, i) -= m;
  const double p = std::sqrt((b * b).trace().real() / 6.0);
  HermitianEigen3 out;
  if (p > 0.0) {
    const double r = std::clamp((b / p).determinant().real() / 2.0, -1.0, 1.0);
    const double angle = std::acos(r) / 3.0;
    const double hi = m + 2.0 * p * std::cos(angle);
    const double lo = m + 2.0 * p * std::cos(angle + 2.0 * std::numbers::pi / 3.0);
    out.values << lo, 3.0 * m - hi - lo, hi;
  } else {
    out.values.setConstant(m);
  }

  bool ok = true;
  for (int k = 0; k < 3 && ok; ++k) {
    Vector3 v;
    ok = null_vector(h, out.values(k), v);
    if (ok) out.vectors.col(k) = v;
  }
  if (ok) {
    // Orthonormalise against rounding in nearly degenerate cases.
    for (int k = 0; k < 3; ++k) {
      Vector3 v = out.vectors.col(k);
      for (int j = 0; j < k; ++j) v -= out.vectors.col(j).dot(v) * out.vectors.col(j);
      const double n = v.norm();
      if (n < 0.5) {
        ok = false;
        break;
      }
      out.vectors.col(k) = v / n;
    }
  }
  if (ok) {
    for (int k = 0; k < 3; ++k) out.values(k) = (out.vectors.col(k).adjoint() * h * out.vectors.col(k))(0, 0).real();
    out.residual = residual_of(h, out.values, out.vectors);
    if (out.residual <= 1e-12 * norm) return out;
  }
  return jacobi(h);
}

DressedModel::DressedModel(const LevelSystem& levels, const PulseTrainParams& pulse, double peak_rabi,
                           double threshold)
    : train_(pulse, threshold), omega31_(levels.omega31), peak_rabi_(peak_rabi) {
  levels.validate();
}

Matrix3 DressedModel::at(double t) const {
  const cdouble pump = peak_rabi_ * train_.envelope(t, EnvelopeBranch::Pump, TrainMode::SinglePulse);
  const cdouble stokes = peak_rabi_ * train_.envelope(t, EnvelopeBranch::Stokes, TrainMode::SinglePulse);
  Matrix3 h = Matrix3::Zero();
  h(0, 1) = pump * std::exp(kI * (omega31_ * t));
  h(1, 0) = std::conj(h(0, 1));
  h(1, 2) = stokes;
  h(2, 1) = std::conj(stokes);
  return h;
}

Matrix3 dressed_hamiltonian(double t, const LevelSystem& levels, const PulseTrainParams& pulse,
                            double peak_rabi) {
  return DressedModel(levels, pulse, peak_rabi).at(t);
}

double DressedTrace::max_overlap(int bare, int branch) const {
  double best = 0.0;
  for (const auto& o : overlaps) {
    best = std::max(best, o[static_cast<std::size_t>(bare)][static_cast<std::size_t>(branch)]);
  }
  return best;
}

int DressedTrace::dominant_bare(std::size_t sample, int branch) const {
  const auto& o = overlaps.at(sample);
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (o[static_cast<std::size_t>(i)][static_cast<std::size_t>(branch)] >
        o[static_cast<std::size_t>(best)][static_cast<std::size_t>(branch)]) {
      best = i;
    }
  }
  return best;
}

std::vector<double> dressed_grid(const LevelSystem& levels, const PulseTrainParams& pulse, int points,
                                 double threshold) {
  if (points < 2) throw ValidationError("dressed.grid_points", "must be >= 2");
  const auto window = DressedModel(levels, pulse, 1.0, threshold).window();
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = window.length() / (points - 1);
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = window.start + i * step;
  grid.back() = window.end;
  return grid;
}

namespace {

struct Tracker {
  const DressedModel& model;
  const TrackingOptions& options;
  Matrix3 tracked;  // columns: branch vectors at the last accepted point
  int refinements = 0;

  // Assignment of branches to the eigenvectors of `next`, or false if the
  // best and runner-up overlaps of some branch are within the ambiguity gap.
  bool match(const HermitianEigen3& next, std::array<int, 3>& perm) const {
    std::array<std::array<double, 3>, 3> o{};
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        o[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            std::norm(tracked.col(j).dot(next.vectors.col(k)));
      }
    }
    std::array<bool, 3> taken{false, false, false};
    for (int j = 0; j < 3; ++j) {
      const auto& row = o[static_cast<std::size_t>(j)];
      const int best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      double runner = 0.0;
      for (int k = 0; k < 3; ++k) {
        if (k != best) runner = std::max(runner, row[static_cast<std::size_t>(k)]);
      }
      if (row[static_cast<std::size_t>(best)] - runner < options.ambiguity) return false;
      if (taken[static_cast<std::size_t>(best)]) return false;
      taken[static_cast<std::size_t>(best)] = true;
      perm[static_cast<std::size_t>(j)] = best;
    }
    return true;
  }

  void accept(const HermitianEigen3& e, const std::array<int, 3>& perm) {
    for (int j = 0; j < 3; ++j) tracked.col(j) = e.vectors.col(perm[static_cast<std::size_t>(j)]);
  }

  // Advances the tracked vectors to time t, bisecting from t_prev if needed.
  std::array<int, 3> advance(double t_prev, double t, const HermitianEigen3& at_t, int depth) {
    std::array<int, 3> perm{};
    if (match(at_t, perm)) {
      accept(at_t, perm);
      return perm;
    }
    if (depth >= options.max_refine_depth) {
      throw TrackingAmbiguous("dressed-state tracking ambiguous near t = " + std::to_string(t) +
                                  " fs; refine the time grid",
                              t);
    }
    const double mid = 0.5 * (t_prev + t);
    ++refinements;
    advance(t_prev, mid, eigh3(model.at(mid)), depth + 1);
    return advance(mid, t, at_t, depth + 1);
  }
};

}  // namespace

DressedTrace eigen_traces(const LevelSystem& levels, const PulseTrainParams& pulse, double peak_rabi, double phi,
                          std::span<const double> grid, const TrackingOptions& options) {
  if (grid.empty()) throw ValidationError("dressed.grid", "must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ValidationError("dressed.grid", "must be strictly increasing");
  }
  PulseTrainParams p = pulse;
  p.phi = phi;
  const DressedModel model(levels, p, peak_rabi);

  DressedTrace trace;
  Tracker tracker{model, options, Matrix3::Identity()};

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto e = eigh3(model.at(grid[i]));
    std::array<int, 3> perm{};
    if (i == 0) {
      // Branch j starts as the eigenvector with the largest weight on bare j.
      double best = -1.0;
      for (const auto& cand : kPermutations) {
        double score = 0.0;
        for (int j = 0; j < 3; ++j) score += std::norm(e.vectors(j, cand[static_cast<std::size_t>(j)]));
        if (score > best + 1e-12) {
          best = score;
          perm = cand;
        }
      }
      tracker.accept(e, perm);
    } else {
      perm = tracker.advance(grid[i - 1], grid[i], e, 0);
    }

    trace.times.push_back(grid[i]);
    std::array<double, 3> energy{};
    std::array<std::array<double, 3>, 3> overlap{};
    for (int j = 0; j < 3; ++j) {
      const int k = perm[static_cast<std::size_t>(j)];
      energy[static_cast<std::size_t>(j)] = e.values(k);
      for (int b = 0; b < 3; ++b) {
        overlap[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)] = std::norm(e.vectors(b, k));
      }
    }
    trace.energies.push_back(energy);
    trace.overlaps.push_back(overlap);
    trace.assignment.push_back(perm);
  }
  trace.refinements = tracker.refinements;
  return trace;
}

}  // namespace combraman
