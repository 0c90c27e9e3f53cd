#pragma once

#include <array>
#include <span>
#include <vector>

#include "echolock/integrator.hpp"
#include "echolock/protocol.hpp"

namespace echolock {

/// Discretized Gaussian inhomogeneous profile. Offsets are symmetric about
/// zero and ascending; weights sum to one.
struct DetuningGrid {
  std::vector<double> offsets;  // kHz
  std::vector<double> weights;

  std::size_t size() const { return offsets.size(); }
  /// Index of the group at `delta` kHz, or -1 if none lies within 1e-9 kHz.
  long index_of(double delta) const;
};

/// `count` groups spaced by `spacing` kHz, weighted by a Gaussian of the
/// given FWHM (kHz). Throws ConfigError for an even count or non-positive
/// widths.
DetuningGrid build_grid(double fwhm, double spacing, int count);

struct EnsembleOptions {
  double sample_period = 0.01;  // us
  unsigned threads = 0;         // 0: hardware concurrency
  // Groups (by index) whose full state history is kept.
  std::vector<std::size_t> tracked_groups;
  // Times (us) at which every group's state is captured.
  std::vector<double> snapshot_times;
  // Run validate_state on every sample of every group.
  bool check_integrity = true;
};

struct GroupTrace {
  double delta = 0.0;  // kHz
  Trajectory trajectory;
};

struct Snapshot {
  double t = 0.0;
  std::vector<Matrix3c> states;  // one per group, grid order
};

struct IntegrityReport {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
};

struct EnsembleTrajectory {
  std::vector<double> times;
  std::vector<cplx> signal;                      // S(t) = sum_d w(d) rho31(d, t)
  std::vector<std::array<double, 3>> populations;  // weighted rho_ii
  std::vector<GroupTrace> tracked;
  std::vector<Snapshot> snapshots;
  IntegrityReport integrity;

  /// Snapshot nearest to `t`; throws std::out_of_range if none within 1e-9.
  const Snapshot& snapshot_at(double t) const;
};

/// Evolves every grid group from the ground state through `sequence`, on a
/// timeline split at every pulse edge, sample time and snapshot time. The
/// signal is reduced in ascending-detuning order, so results do not depend on
/// the thread count. Integrator failures are rethrown tagged with the
/// offending detuning.
EnsembleTrajectory run_ensemble(const PulseSequence& sequence,
                                const DetuningGrid& grid,
                                const SystemParams& params,
                                const IntegratorConfig& cfg,
                                const EnsembleOptions& options = {});

/// sum_d w(d) rho31(d). Throws ConfigError on a size mismatch.
cplx macroscopic_signal(std::span<const Matrix3c> states,
                        const DetuningGrid& grid);

}  // namespace echolock
