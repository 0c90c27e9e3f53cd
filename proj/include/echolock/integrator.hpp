#pragma once

#include <span>
#include <vector>

#include "echolock/bloch.hpp"

namespace echolock {

enum class Method { RK4 };

struct IntegratorConfig {
  double dt_pulse = 0.0005;  // us, max step while any drive is on
  double dt_free = 0.01;     // us, max step during free evolution
  Method method = Method::RK4;

  /// Throws ConfigError unless 0 < dt_pulse <= dt_free.
  void validate() const;
  /// Throws ConfigError if dt_pulse exceeds 1/50 of the Rabi period of the
  /// fastest drive.
  void check_resolves(std::span<const DriveField> drives) const;
  double max_step(std::span<const DriveField> drives) const {
    return drives.empty() ? dt_free : dt_pulse;
  }
};

struct Trajectory {
  std::vector<double> times;  // us, strictly increasing
  std::vector<Matrix3c> states;

  std::size_t size() const { return times.size(); }
  const Matrix3c& back() const { return states.back(); }
};

/// One classical Runge-Kutta step with H held constant, followed by
/// re-symmetrization. Throws NumericalError if the trace drifts by more than
/// 1e-6 or the state becomes non-finite.
Matrix3c step_rk4(const Matrix3c& rho, const Matrix3c& H,
                  const SystemParams& params, double dt);

/// Advances `rho` by `steps` equal RK4 steps covering `duration`.
Matrix3c advance(const Matrix3c& rho, const Matrix3c& H,
                 const SystemParams& params, double duration, int steps);

/// Number of equal steps needed to cover `duration` with steps <= max_step.
int step_count(double duration, double max_step);

/// Evolves `rho` for `duration` us under constant drives, starting at
/// `t_start`. Samples are taken every `sample_period` (<= 0 means only the
/// endpoints); the final sample is always at exactly t_start + duration.
Trajectory evolve_interval(const Matrix3c& rho,
                           std::span<const DriveField> drives,
                           AtomDetuning delta, const SystemParams& params,
                           double duration, const IntegratorConfig& cfg,
                           double sample_period = 0.0, double t_start = 0.0);

/// Decay-free reference propagation rho -> U rho U^dagger with
/// U = exp(-i H t), from the eigendecomposition of H.
Matrix3c exact_unitary(const Matrix3c& rho, const Matrix3c& H,
                       double duration);

}  // namespace echolock
