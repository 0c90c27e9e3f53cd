#include "echolock/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "echolock/errors.hpp"

namespace echolock {

long DetuningGrid::index_of(double delta) const {
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (std::abs(offsets[i] - delta) <= 1e-9) return static_cast<long>(i);
  }
  return -1;
}

DetuningGrid build_grid(double fwhm, double spacing, int count) {
  if (count <= 0 || count % 2 == 0) {
    throw ConfigError("grid count must be a positive odd integer, got " +
                      std::to_string(count));
  }
  if (!(fwhm > 0.0) || !(spacing > 0.0)) {
    throw ConfigError("grid fwhm and spacing must be > 0");
  }
  DetuningGrid grid;
  grid.offsets.resize(count);
  grid.weights.resize(count);
  const int half = (count - 1) / 2;
  const double k = 4.0 * std::numbers::ln2 / (fwhm * fwhm);
  for (int i = 0; i < count; ++i) {
    grid.offsets[i] = (i - half) * spacing;
    grid.weights[i] = std::exp(-k * grid.offsets[i] * grid.offsets[i]);
  }
  // Pair symmetric terms from the outside in so the sum is order-stable.
  double total = grid.weights[half];
  for (int j = half; j >= 1; --j) {
    total += grid.weights[half - j] + grid.weights[half + j];
  }
  for (double& w : grid.weights) w /= total;
  return grid;
}

cplx macroscopic_signal(std::span<const Matrix3c> states,
                        const DetuningGrid& grid) {
  if (states.size() != grid.size()) {
    throw ConfigError("macroscopic_signal: " + std::to_string(states.size()) +
                      " states for " + std::to_string(grid.size()) +
                      " groups");
  }
  cplx s = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    s += grid.weights[i] * states[i](2, 0);
  }
  return s;
}

const Snapshot& EnsembleTrajectory::snapshot_at(double t) const {
  for (const Snapshot& s : snapshots) {
    if (std::abs(s.t - t) <= 1e-9) return s;
  }
  throw std::out_of_range("no snapshot at t = " + std::to_string(t));
}

namespace {

constexpr double kMergeTol = 1e-9;

struct Breakpoint {
  double t = 0.0;
  long sample = -1;    // index into sample arrays
  long snapshot = -1;  // index into snapshots
};

struct Segment {
  double t_a = 0.0;
  double t_b = 0.0;
  std::vector<DriveField> drives;
  int steps = 0;
};

struct GroupRecord {
  std::vector<cplx> rho31;
  std::vector<std::array<double, 3>> pops;
  std::vector<Matrix3c> snapshots;
  Trajectory trajectory;
  IntegrityReport integrity;
  std::exception_ptr error;
  double error_time = 0.0;
};

std::vector<Breakpoint> build_timeline(const PulseSequence& seq,
                                       const EnsembleOptions& opt,
                                       std::size_t& n_samples) {
  const double end = seq.window_end;
  std::vector<Breakpoint> pts;

  long k = 0;
  for (;; ++k) {
    const double t = k * opt.sample_period;
    if (t > end + kMergeTol) break;
    pts.push_back({std::min(t, end), k, -1});
  }
  if (std::abs(pts.back().t - end) > kMergeTol) pts.push_back({end, k++, -1});
  n_samples = static_cast<std::size_t>(k);

  for (const PulseEvent& p : seq.events) {
    pts.push_back({p.t_on, -1, -1});
    pts.push_back({p.t_off(), -1, -1});
  }
  for (std::size_t i = 0; i < opt.snapshot_times.size(); ++i) {
    const double t = opt.snapshot_times[i];
    if (t < 0.0 || t > end + kMergeTol) {
      throw ConfigError("snapshot time " + std::to_string(t) +
                        " outside the run window");
    }
    pts.push_back({t, -1, static_cast<long>(i)});
  }

  std::stable_sort(pts.begin(), pts.end(),
                   [](const Breakpoint& a, const Breakpoint& b) {
                     return a.t < b.t;
                   });
  // Merge near-coincident points; sample times keep their exact value.
  std::vector<Breakpoint> merged;
  for (const Breakpoint& p : pts) {
    if (!merged.empty() && p.t - merged.back().t <= kMergeTol) {
      Breakpoint& m = merged.back();
      if (p.sample >= 0) {
        m.sample = p.sample;
        m.t = p.t;
      }
      if (p.snapshot >= 0) m.snapshot = p.snapshot;
      continue;
    }
    merged.push_back(p);
  }
  return merged;
}

unsigned resolve_threads(unsigned requested, std::size_t work) {
  unsigned n = requested != 0 ? requested : std::thread::hardware_concurrency();
  n = std::max(1u, n);
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

}  // namespace

EnsembleTrajectory run_ensemble(const PulseSequence& sequence,
                                const DetuningGrid& grid,
                                const SystemParams& params,
                                const IntegratorConfig& cfg,
                                const EnsembleOptions& options) {
  params.validate();
  cfg.validate();
  if (!(options.sample_period > 0.0)) {
    throw ConfigError("sample period must be > 0");
  }
  if (grid.size() == 0) throw ConfigError("empty detuning grid");
  for (std::size_t g : options.tracked_groups) {
    if (g >= grid.size()) throw ConfigError("tracked group index out of range");
  }

  std::size_t n_samples = 0;
  const std::vector<Breakpoint> timeline =
      build_timeline(sequence, options, n_samples);

  std::vector<Segment> segments;
  segments.reserve(timeline.size());
  for (std::size_t i = 1; i < timeline.size(); ++i) {
    Segment s;
    s.t_a = timeline[i - 1].t;
    s.t_b = timeline[i].t;
    s.drives = sequence.drives_at(0.5 * (s.t_a + s.t_b));
    cfg.check_resolves(s.drives);
    s.steps = step_count(s.t_b - s.t_a, cfg.max_step(s.drives));
    segments.push_back(std::move(s));
  }

  std::vector<bool> is_tracked(grid.size(), false);
  for (std::size_t g : options.tracked_groups) is_tracked[g] = true;

  std::vector<GroupRecord> records(grid.size());

  auto run_group = [&](std::size_t g) {
    GroupRecord& rec = records[g];
    rec.rho31.resize(n_samples);
    rec.pops.resize(n_samples);
    rec.snapshots.resize(options.snapshot_times.size());
    const AtomDetuning delta{grid.offsets[g]};

    auto record = [&](const Breakpoint& bp, const Matrix3c& rho) {
      if (bp.sample >= 0) {
        rec.rho31[bp.sample] = rho(2, 0);
        rec.pops[bp.sample] = {rho(0, 0).real(), rho(1, 1).real(),
                               rho(2, 2).real()};
        if (options.check_integrity) {
          const StateDiagnostics d = validate_state(rho);
          rec.integrity.max_trace_error =
              std::max(rec.integrity.max_trace_error, d.trace_error);
          rec.integrity.max_hermiticity_error =
              std::max(rec.integrity.max_hermiticity_error, d.hermiticity_error);
          rec.integrity.min_eigenvalue =
              std::min(rec.integrity.min_eigenvalue, d.min_eigenvalue);
        }
        if (is_tracked[g]) {
          rec.trajectory.times.push_back(bp.t);
          rec.trajectory.states.push_back(rho);
        }
      }
      if (bp.snapshot >= 0) rec.snapshots[bp.snapshot] = rho;
    };

    Matrix3c rho = ground_state();
    std::size_t i = 0;
    try {
      record(timeline[0], rho);
      for (i = 0; i < segments.size(); ++i) {
        const Segment& s = segments[i];
        const Matrix3c H = hamiltonian(delta, s.drives, params.detuning_sign);
        rho = advance(rho, H, params, s.t_b - s.t_a, s.steps);
        record(timeline[i + 1], rho);
      }
    } catch (...) {
      rec.error = std::current_exception();
      rec.error_time = i < segments.size() ? segments[i].t_a : sequence.window_end;
    }
  };

  const unsigned n_threads = resolve_threads(options.threads, grid.size());
  if (n_threads == 1) {
    for (std::size_t g = 0; g < grid.size(); ++g) run_group(g);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t g = next++; g < grid.size(); g = next++) run_group(g);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!records[g].error) continue;
    std::ostringstream msg;
    msg << "group delta = " << grid.offsets[g] << " kHz failed near t = "
        << records[g].error_time << " us: ";
    try {
      std::rethrow_exception(records[g].error);
    } catch (const ConfigError& e) {
      throw ConfigError(msg.str() + e.what());
    } catch (const std::exception& e) {
      throw NumericalError(msg.str() + e.what());
    }
  }

  EnsembleTrajectory out;
  out.times.resize(n_samples);
  for (const Breakpoint& bp : timeline) {
    if (bp.sample >= 0) out.times[bp.sample] = bp.t;
  }
  out.signal.assign(n_samples, cplx(0.0, 0.0));
  out.populations.assign(n_samples, {0.0, 0.0, 0.0});
  // Fixed ascending-detuning reduction.
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double w = grid.weights[g];
    const GroupRecord& rec = records[g];
    for (std::size_t k = 0; k < n_samples; ++k) {
      out.signal[k] += w * rec.rho31[k];
      for (int l = 0; l < 3; ++l) out.populations[k][l] += w * rec.pops[k][l];
    }
    out.integrity.max_trace_error =
        std::max(out.integrity.max_trace_error, rec.integrity.max_trace_error);
    out.integrity.max_hermiticity_error = std::max(
        out.integrity.max_hermiticity_error, rec.integrity.max_hermiticity_error);
    out.integrity.min_eigenvalue =
        std::min(out.integrity.min_eigenvalue, rec.integrity.min_eigenvalue);
  }

  for (std::size_t g : options.tracked_groups) {
    out.tracked.push_back({grid.offsets[g], std::move(records[g].trajectory)});
  }
  out.snapshots.resize(options.snapshot_times.size());
  for (std::size_t i = 0; i < options.snapshot_times.size(); ++i) {
    out.snapshots[i].t = options.snapshot_times[i];
    out.snapshots[i].states.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out.snapshots[i].states.push_back(records[g].snapshots[i]);
    }
  }
  return out;
}

}  // namespace echolock
