#include "echolock/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "echolock/errors.hpp"

namespace echolock {

void IntegratorConfig::validate() const {
  if (!(dt_pulse > 0.0) || !(dt_free > 0.0) || dt_pulse > dt_free) {
    std::ostringstream msg;
    msg << "integrator requires 0 < dt_pulse <= dt_free (got dt_pulse="
        << dt_pulse << ", dt_free=" << dt_free << ")";
    throw ConfigError(msg.str());
  }
}

void IntegratorConfig::check_resolves(
    std::span<const DriveField> drives) const {
  for (const DriveField& d : drives) {
    if (d.rabi > 0.0 && dt_pulse > 1.0 / (50.0 * d.rabi)) {
      std::ostringstream msg;
      msg << "dt_pulse=" << dt_pulse << " us does not resolve a " << d.rabi
          << " MHz drive (need <= " << 1.0 / (50.0 * d.rabi) << " us)";
      throw ConfigError(msg.str());
    }
  }
}

Matrix3c step_rk4(const Matrix3c& rho, const Matrix3c& H,
                  const SystemParams& params, double dt) {
  const Matrix3c k1 = liouville_rhs(rho, H, params);
  const Matrix3c k2 = liouville_rhs(rho + (0.5 * dt) * k1, H, params);
  const Matrix3c k3 = liouville_rhs(rho + (0.5 * dt) * k2, H, params);
  const Matrix3c k4 = liouville_rhs(rho + dt * k3, H, params);
  Matrix3c next = hermitize(rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));

  const double drift = std::abs(next.trace() - rho.trace());
  if (!(drift <= 1e-6) || !next.allFinite()) {
    std::ostringstream msg;
    msg << "RK4 step of " << dt << " us changed the trace by " << drift;
    throw NumericalError(msg.str());
  }
  return next;
}

int step_count(double duration, double max_step) {
  if (duration <= 0.0) return 0;
  // Tolerate round-off so an exact multiple does not gain a sliver step.
  return std::max(1, static_cast<int>(std::ceil(duration / max_step - 1e-9)));
}

Matrix3c advance(const Matrix3c& rho, const Matrix3c& H,
                 const SystemParams& params, double duration, int steps) {
  Matrix3c state = rho;
  if (steps <= 0) return state;
  const double h = duration / steps;
  for (int i = 0; i < steps; ++i) state = step_rk4(state, H, params, h);
  return state;
}

Trajectory evolve_interval(const Matrix3c& rho,
                           std::span<const DriveField> drives,
                           AtomDetuning delta, const SystemParams& params,
                           double duration, const IntegratorConfig& cfg,
                           double sample_period, double t_start) {
  if (!(duration >= 0.0)) throw ConfigError("duration must be >= 0");
  cfg.validate();
  cfg.check_resolves(drives);
  const Matrix3c H = hamiltonian(delta, drives, params.detuning_sign);
  const double max_step = cfg.max_step(drives);

  Trajectory traj;
  traj.times.push_back(t_start);
  traj.states.push_back(rho);
  if (duration == 0.0) return traj;

  const int chunks =
      sample_period > 0.0 ? step_count(duration, sample_period) : 1;
  Matrix3c state = rho;
  for (int c = 1; c <= chunks; ++c) {
    // Chunk boundaries come from the index, not accumulated sums, so the
    // last one lands exactly on t_start + duration.
    const double a = duration * (c - 1) / chunks;
    const double b = c == chunks ? duration : duration * c / chunks;
    state = advance(state, H, params, b - a, step_count(b - a, max_step));
    traj.times.push_back(t_start + b);
    traj.states.push_back(state);
  }
  return traj;
}

Matrix3c exact_unitary(const Matrix3c& rho, const Matrix3c& H,
                       double duration) {
  Eigen::SelfAdjointEigenSolver<Matrix3c> solver(hermitize(H));
  const Matrix3c& V = solver.eigenvectors();
  Eigen::Vector3cd phases;
  for (int i = 0; i < 3; ++i) {
    phases(i) = std::polar(1.0, -solver.eigenvalues()(i) * duration);
  }
  const Matrix3c U = V * phases.asDiagonal() * V.adjoint();
  return U * rho * U.adjoint();
}

}  // namespace echolock
