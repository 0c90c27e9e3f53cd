#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "echolock/ensemble.hpp"

namespace echolock {

struct EchoPeak {
  double t_peak = 0.0;  // us
  cplx amplitude;       // S at the peak
  double magnitude = 0.0;
};

/// Peaks below this magnitude count as no echo.
inline constexpr double kEchoNoiseFloor = 1e-9;

/// Maximum of |S| over samples in [t_lo, t_hi], refined by a parabola through
/// the neighbouring samples. Returns nullopt when the peak is below the noise
/// floor. Throws ConfigError if the window holds no sample.
std::optional<EchoPeak> detect_echo(const EnsembleTrajectory& traj,
                                    double t_lo, double t_hi);

/// Search window [t_e - half_width, t_e + half_width] shrunk to the pulse-free
/// gap that contains t_e.
std::pair<double, double> echo_window(const PulseSequence& sequence,
                                      double t_e, double half_width = 2.0);

/// Phase-projected amplitude ratio in percent: an inverted echo reads -100.
/// Throws ConfigError on a zero reference.
double signed_efficiency(const EchoPeak& echo, const EchoPeak& reference);

struct DecayFit {
  double A0 = 0.0;
  double T2 = 0.0;        // us
  double residual = 0.0;  // RMS of the log-amplitude fit
};

/// Least-squares line through (t, ln A). Throws ConfigError on fewer than two
/// points, a non-positive amplitude, identical times or a non-decaying fit.
DecayFit fit_exponential(std::span<const std::pair<double, double>> points);

/// (u, v) = (2 Re rho13, 2 Im rho13) for every stored state.
std::vector<std::pair<double, double>> bloch_uv(const Trajectory& traj);

/// Circular variance 1 - |sum w e^{i arg rho31}| / sum w over groups with
/// |rho31| > 1e-12. Empty weights mean equal weights. Throws ConfigError
/// when fewer than two groups qualify.
double phase_spread(std::span<const Matrix3c> states,
                    std::span<const double> weights = {});

}  // namespace echolock
