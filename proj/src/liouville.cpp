#include "combraman/liouville.hpp"

#include <algorithm>
#include <cmath>

#include "combraman/errors.hpp"

namespace combraman {
namespace {

constexpr cdouble kMinusI{0.0, -1.0};

// (exp(-b t) - exp(-a t)) / (a - b), continuous at a == b.
double decay_difference(double a, double b, double t) {
  const double d = a - b;
  if (d == 0.0) return t * std::exp(-b * t);
  return std::exp(-b * t) * (-std::expm1(-d * t)) / d;
}

LevelIndex index_for(int dim) {
  if (dim < 3) throw ShapeMismatch("density matrix needs at least three levels");
  return {dim - 2};
}

void hermitize(Matrix& y) {
  const Matrix adj = y.adjoint();
  y = 0.5 * (y + adj);
}

}  // namespace

StateDiagnostics diagnose(const Matrix& rho) {
  StateDiagnostics d;
  d.trace_error = std::abs(rho.trace() - cdouble(1.0, 0.0));
  d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  const Eigen::VectorXd diag = rho.diagonal().real();
  d.min_population = diag.minCoeff();
  d.max_population = diag.maxCoeff();
  d.purity = (rho * rho).trace().real();
  return d;
}

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw ShapeMismatch("density matrix must be square and non-empty");
  }
  const auto d = diagnose(entries_);
  if (d.hermiticity_error > 1e-10) throw ValidationError("density_matrix", "not Hermitian within 1e-10");
  if (d.trace_error > 1e-9) throw ValidationError("density_matrix", "trace differs from 1 by more than 1e-9");
  if (d.min_population < -1e-9 || d.max_population > 1.0 + 1e-9) {
    throw ValidationError("density_matrix", "diagonal entry outside [0, 1]");
  }
}

DensityMatrix DensityMatrix::pure(int dim, int level) {
  if (level < 0 || level >= dim) throw ShapeMismatch("level index outside the basis");
  Matrix m = Matrix::Zero(dim, dim);
  m(level, level) = 1.0;
  return DensityMatrix(std::move(m), NoCheck{});
}

DensityMatrix DensityMatrix::unchecked(Matrix entries) { return DensityMatrix(std::move(entries), NoCheck{}); }

void InvariantReport::record(const StateDiagnostics& d) {
  max_trace_error = std::max(max_trace_error, d.trace_error);
  max_hermiticity_error = std::max(max_hermiticity_error, d.hermiticity_error);
  min_population = std::min(min_population, d.min_population);
  max_population = std::max(max_population, d.max_population);
  ++states_checked;
}

void InvariantReport::merge(const InvariantReport& o) {
  if (o.states_checked == 0) return;
  max_trace_error = std::max(max_trace_error, o.max_trace_error);
  max_hermiticity_error = std::max(max_hermiticity_error, o.max_hermiticity_error);
  min_population = std::min(min_population, o.min_population);
  max_population = std::max(max_population, o.max_population);
  states_checked += o.states_checked;
}

bool InvariantReport::passed() const {
  return max_trace_error <= kTraceTolerance && max_hermiticity_error <= kHermiticityTolerance &&
         min_population >= -kPopulationSlack && max_population <= 1.0 + kPopulationSlack;
}

void Trajectory::append(double t, const Matrix& rho, bool on_boundary) {
  const int dim = static_cast<int>(rho.rows());
  if (populations.empty()) populations.resize(static_cast<std::size_t>(dim));
  const int last = dim - 1;
  times.push_back(t);
  for (int i = 0; i < dim; ++i) populations[static_cast<std::size_t>(i)].push_back(rho(i, i).real());
  double s12 = 0.0;
  double s23 = 0.0;
  for (int q = 1; q < last; ++q) {
    s12 += std::abs(rho(0, q));
    s23 += std::abs(rho(q, last));
  }
  abs_rho13.push_back(std::abs(rho(0, last)));
  sum_abs_rho12.push_back(s12);
  sum_abs_rho23.push_back(s23);
  boundary.push_back(on_boundary ? 1 : 0);
}

void Trajectory::append_samples(const Trajectory& o) {
  if (populations.empty()) populations.resize(o.populations.size());
  times.insert(times.end(), o.times.begin(), o.times.end());
  for (std::size_t i = 0; i < o.populations.size(); ++i) {
    populations[i].insert(populations[i].end(), o.populations[i].begin(), o.populations[i].end());
  }
  abs_rho13.insert(abs_rho13.end(), o.abs_rho13.begin(), o.abs_rho13.end());
  sum_abs_rho12.insert(sum_abs_rho12.end(), o.sum_abs_rho12.begin(), o.sum_abs_rho12.end());
  sum_abs_rho23.insert(sum_abs_rho23.end(), o.sum_abs_rho23.begin(), o.sum_abs_rho23.end());
  boundary.insert(boundary.end(), o.boundary.begin(), o.boundary.end());
}

void Trajectory::decimate(std::size_t max_samples) {
  if (size() <= max_samples) return;
  const auto n_boundary = static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), 1));
  const std::size_t interior = size() - n_boundary;
  const std::size_t budget = max_samples > n_boundary ? max_samples - n_boundary : 0;
  const std::size_t stride = budget == 0 ? 0 : (interior + budget - 1) / budget;

  std::vector<std::size_t> keep;
  std::size_t ordinal = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (boundary[i]) {
      keep.push_back(i);
    } else {
      if (stride != 0 && ordinal % stride == 0) keep.push_back(i);
      ++ordinal;
    }
  }
  auto select = [&keep](auto& v) {
    std::remove_reference_t<decltype(v)> out;
    out.reserve(keep.size());
    for (auto i : keep) out.push_back(v[i]);
    v.swap(out);
  };
  select(times);
  for (auto& p : populations) select(p);
  select(abs_rho13);
  select(sum_abs_rho12);
  select(sum_abs_rho23);
  select(boundary);
}

double Trajectory::max_excited_population() const {
  double best = 0.0;
  if (populations.size() < 3) return best;
  const std::size_t last = populations.size() - 1;
  for (std::size_t i = 0; i < size(); ++i) {
    double s = 0.0;
    for (std::size_t q = 1; q < last; ++q) s += populations[q][i];
    best = std::max(best, s);
  }
  return best;
}

Matrix rhs(double t, const Matrix& rho, const RwaHamiltonian& h, const DecoherenceRates& rates) {
  if (rho.rows() != h.dim() || rho.cols() != h.dim()) {
    throw ShapeMismatch("density matrix dimension does not match the Hamiltonian");
  }
  const Matrix hm = h(t);
  Matrix out = kMinusI * (hm * rho - rho * hm);
  add_relaxation(rho, rates, h.index(), out);
  return out;
}

WindowResult propagate_window(const DensityMatrix& rho0, const RwaHamiltonian& h,
                              const DecoherenceRates& rates, double t0, double t1,
                              const IntegratorConfig& cfg, std::span<const double> sample_times) {
  cfg.validate();
  if (!(t1 > t0)) throw ValidationError("window", "t1 must exceed t0");
  const int dim = h.dim();
  if (rho0.dim() != dim) throw ShapeMismatch("density matrix dimension does not match the Hamiltonian");

  const auto frame = h.frame(t0);
  const LevelIndex index = h.index();
  const bool relax = rates.any();
  const bool coherent = !h.field_free();
  Matrix hm = Matrix::Zero(dim, dim);

  auto f = [&](double s, const Matrix& y, Matrix& dy) {
    if (coherent) {
      frame.evaluate(s, hm);
      dy.noalias() = hm * y;
      dy.noalias() -= y * hm;
      dy *= kMinusI;
    } else {
      dy.setZero(dim, dim);
    }
    if (relax) add_relaxation(y, rates, index, dy);
  };

  Trajectory samples;
  const double span = t1 - t0;
  const bool dense = !sample_times.empty();
  std::size_t next_time = 0;
  long long accepted = 0;
  if (dense) {
    while (next_time < sample_times.size() && sample_times[next_time] <= t0) {
      samples.append(sample_times[next_time], rho0.matrix(), false);
      ++next_time;
    }
  }

  auto observer = [&](const DenseStep& step, const Matrix& y) {
    samples.invariants.record(diagnose(y));
    ++accepted;
    if (dense) {
      while (next_time < sample_times.size() && sample_times[next_time] - t0 <= step.end()) {
        const double local = sample_times[next_time] - t0;
        samples.append(sample_times[next_time], step.at(local), false);
        ++next_time;
      }
      return;
    }
    const bool last = step.end() >= span;
    if (last || accepted % cfg.sample_stride == 0) {
      Matrix shown = y;
      hermitize(shown);
      samples.append(t0 + step.end(), shown, last);
    }
  };

  Matrix y = rho0.matrix();
  DormandPrince54 stepper(cfg.rel_tol, cfg.abs_tol, cfg.max_step);
  stepper.integrate(f, 0.0, span, y, samples.step_stats, observer, hermitize);
  samples.step_stats.windows = 1;
  samples.final_state = DensityMatrix::unchecked(y);
  return {DensityMatrix::unchecked(std::move(y)), std::move(samples)};
}

DensityMatrix propagate_gap(const DensityMatrix& rho0, const DecoherenceRates& rates, double dt) {
  if (!(dt >= 0.0)) throw ValidationError("gap", "dt must be >= 0");
  const LevelIndex index = index_for(rho0.dim());
  Matrix rho = rho0.matrix();
  if (dt == 0.0 || !rates.any()) return DensityMatrix::unchecked(std::move(rho));

  const int g = LevelIndex::initial();
  const int f = index.final_state();
  const double gamma = rates.gamma1 + rates.gamma2;
  const double excited_factor = std::exp(-gamma * dt);

  double excited0 = 0.0;
  for (int q = 1; q <= index.n_excited; ++q) excited0 += rho(q, q).real();
  const double p11 = rho(g, g).real();
  const double p33 = rho(f, f).real();
  const double feed = rates.gamma1 * excited0 * decay_difference(gamma, rates.gamma3, dt);
  const double initial_loss = -std::expm1(-rates.gamma3 * dt);
  const double excited_loss = -std::expm1(-gamma * dt);

  rho(g, g) = p11 * std::exp(-rates.gamma3 * dt) + feed;
  rho(f, f) = p33 + p11 * initial_loss + excited0 * excited_loss - feed;

  const double initial_excited = std::exp(-(0.5 * gamma + rates.dephasing1 + 0.5 * rates.gamma3) * dt);
  const double excited_final = std::exp(-(0.5 * gamma + rates.dephasing2) * dt);
  const double initial_final = std::exp(-(rates.dephasing3 + 0.5 * rates.gamma3) * dt);
  for (int q = 1; q <= index.n_excited; ++q) {
    for (int p = 1; p <= index.n_excited; ++p) rho(q, p) *= excited_factor;
    rho(g, q) *= initial_excited;
    rho(q, g) *= initial_excited;
    rho(q, f) *= excited_final;
    rho(f, q) *= excited_final;
  }
  rho(g, f) *= initial_final;
  rho(f, g) *= initial_final;
  return DensityMatrix::unchecked(std::move(rho));
}

std::vector<TimeWindow> propagation_windows(const RwaHamiltonian& h, const IntegratorConfig& cfg) {
  const double pad = cfg.window_padding * h.train().params().tau;
  std::vector<TimeWindow> out;
  for (const auto& w : h.active_windows()) {
    TimeWindow padded{w.start - pad, w.end + pad};
    if (!out.empty() && padded.start <= out.back().end) {
      out.back().end = std::max(out.back().end, padded.end);
    } else {
      out.push_back(padded);
    }
  }
  return out;
}

Trajectory run_train(const DensityMatrix& rho0, const RwaHamiltonian& h, const DecoherenceRates& rates,
                     const IntegratorConfig& cfg, std::optional<double> t_end) {
  cfg.validate();
  rates.validate();
  if (rho0.dim() != h.dim()) throw ShapeMismatch("initial state dimension does not match the Hamiltonian");

  const auto windows = propagation_windows(h, cfg);
  const auto& pulse = h.train().params();
  const double t_start = windows.front().start;
  const double default_end = h.mode() == TrainMode::SinglePulse
                                 ? windows.back().end
                                 : t_start + static_cast<double>(pulse.n_pulses) * pulse.period;
  const double t_stop = t_end.value_or(default_end);
  if (!(t_stop > t_start)) throw ValidationError("run.total_time", "end time must follow the first window start");

  Trajectory traj;
  traj.append(t_start, rho0.matrix(), true);
  traj.invariants.record(rho0.diagnostics());

  DensityMatrix state = rho0;
  double cursor = t_start;
  double covered = 0.0;
  for (std::size_t i = 0; i < windows.size() && cursor < t_stop; ++i) {
    const double a = std::max(windows[i].start, cursor);
    const double b = std::min(windows[i].end, t_stop);
    if (b > a) {
      auto result = propagate_window(state, h, rates, a, b, cfg);
      traj.append_samples(result.samples);
      traj.step_stats += result.samples.step_stats;
      traj.invariants.merge(result.samples.invariants);
      state = std::move(result.state);
      covered += b - a;
      cursor = b;
    }
    const double next = i + 1 < windows.size() ? std::min(windows[i + 1].start, t_stop) : t_stop;
    if (next > cursor) {
      state = propagate_gap(state, rates, next - cursor);
      cursor = next;
      traj.append(cursor, state.matrix(), true);
      traj.invariants.record(state.diagnostics());
      ++traj.step_stats.gaps;
    }
  }

  traj.final_state = state;
  traj.window_sparsity = covered / (t_stop - t_start);
  traj.decimate(static_cast<std::size_t>(cfg.max_samples));
  return traj;
}

Trajectory run_train(const DensityMatrix& rho0, const LevelSystem& levels, const PulseTrainParams& pulse,
                     double peak_rabi, const DecoherenceRates& rates, const IntegratorConfig& cfg) {
  return run_train(rho0, RwaHamiltonian(levels, pulse, peak_rabi), rates, cfg);
}

double BlockRun::incoherent_final_population() const {
  double sum = 0.0;
  for (const auto& b : blocks) sum += b.final_state->population(2);
  return sum;
}

double BlockRun::superposed_final_population() const {
  cdouble amplitude{0.0, 0.0};
  for (const auto& b : blocks) {
    const Matrix& rho = b.final_state->matrix();
    amplitude += rho(2, 0) / std::sqrt(rho(0, 0).real());
  }
  return std::norm(amplitude);
}

BlockRun run_blocks(const RwaHamiltonian& h, const DecoherenceRates& rates, const IntegratorConfig& cfg,
                    std::optional<double> t_end) {
  BlockRun out;
  const auto rho0 = DensityMatrix::pure(3, 0);
  for (int q = 1; q <= h.n_excited(); ++q) {
    out.blocks.push_back(run_train(rho0, h.block(q), rates, cfg, t_end));
  }
  return out;
}

}  // namespace combraman
