#include "echolock/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "echolock/errors.hpp"

namespace echolock {

std::optional<EchoPeak> detect_echo(const EnsembleTrajectory& traj,
                                    double t_lo, double t_hi) {
  const auto& t = traj.times;
  const auto first = std::lower_bound(t.begin(), t.end(), t_lo - 1e-9);
  const auto last = std::upper_bound(t.begin(), t.end(), t_hi + 1e-9);
  if (first >= last) {
    throw ConfigError("echo window [" + std::to_string(t_lo) + ", " +
                      std::to_string(t_hi) + "] holds no samples");
  }
  const std::size_t lo = first - t.begin();
  const std::size_t hi = last - t.begin();  // exclusive

  std::size_t best = lo;
  for (std::size_t k = lo; k < hi; ++k) {
    if (std::abs(traj.signal[k]) > std::abs(traj.signal[best])) best = k;
  }

  EchoPeak peak{t[best], traj.signal[best], std::abs(traj.signal[best])};
  if (peak.magnitude < kEchoNoiseFloor) return std::nullopt;

  // Sub-sample refinement on |S|, only for an interior maximum on a uniform
  // stencil; the complex amplitude follows the same parabola.
  if (best > lo && best + 1 < hi) {
    const double h0 = t[best] - t[best - 1];
    const double h1 = t[best + 1] - t[best];
    const double ym = std::abs(traj.signal[best - 1]);
    const double y0 = peak.magnitude;
    const double yp = std::abs(traj.signal[best + 1]);
    const double curv = ym - 2.0 * y0 + yp;
    if (std::abs(h0 - h1) <= 1e-9 * h0 && curv < 0.0) {
      const double x = 0.5 * (ym - yp) / curv;  // in [-1/2, 1/2]
      const cplx sm = traj.signal[best - 1];
      const cplx s0 = traj.signal[best];
      const cplx sp = traj.signal[best + 1];
      peak.t_peak = t[best] + x * h0;
      peak.amplitude = s0 + 0.5 * x * (sp - sm) + 0.5 * x * x * (sp - 2.0 * s0 + sm);
      peak.magnitude = std::abs(peak.amplitude);
    }
  }
  return peak;
}

std::pair<double, double> echo_window(const PulseSequence& sequence,
                                      double t_e, double half_width) {
  double lo = t_e - half_width;
  double hi = t_e + half_width;
  for (const PulseEvent& p : sequence.events) {
    if (p.t_off() <= t_e) lo = std::max(lo, p.t_off());
    if (p.t_on >= t_e) hi = std::min(hi, p.t_on);
  }
  lo = std::max(lo, 0.0);
  hi = std::min(hi, sequence.window_end);
  return {lo, hi};
}

double signed_efficiency(const EchoPeak& echo, const EchoPeak& reference) {
  const double norm = std::norm(reference.amplitude);
  if (!(norm > 0.0)) throw ConfigError("reference echo has zero amplitude");
  return 100.0 * (echo.amplitude * std::conj(reference.amplitude)).real() / norm;
}

DecayFit fit_exponential(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw ConfigError("decay fit needs >= 2 points");
  const double n = static_cast<double>(points.size());
  double mean_t = 0.0;
  double mean_y = 0.0;
  for (const auto& [t, a] : points) {
    if (!(a > 0.0)) throw ConfigError("decay fit needs positive amplitudes");
    mean_t += t;
    mean_y += std::log(a);
  }
  mean_t /= n;
  mean_y /= n;
  double stt = 0.0;
  double sty = 0.0;
  for (const auto& [t, a] : points) {
    stt += (t - mean_t) * (t - mean_t);
    sty += (t - mean_t) * (std::log(a) - mean_y);
  }
  if (!(stt > 0.0)) throw ConfigError("decay fit needs distinct times");
  const double slope = sty / stt;
  if (!(slope < 0.0)) throw ConfigError("amplitudes do not decay");
  const double intercept = mean_y - slope * mean_t;

  double ss = 0.0;
  for (const auto& [t, a] : points) {
    const double r = std::log(a) - (intercept + slope * t);
    ss += r * r;
  }
  return {std::exp(intercept), -1.0 / slope, std::sqrt(ss / n)};
}

std::vector<std::pair<double, double>> bloch_uv(const Trajectory& traj) {
  std::vector<std::pair<double, double>> uv;
  uv.reserve(traj.size());
  for (const Matrix3c& rho : traj.states) {
    uv.emplace_back(2.0 * rho(0, 2).real(), 2.0 * rho(0, 2).imag());
  }
  return uv;
}

double phase_spread(std::span<const Matrix3c> states,
                    std::span<const double> weights) {
  if (!weights.empty() && weights.size() != states.size()) {
    throw ConfigError("phase_spread: weight count does not match states");
  }
  cplx sum = 0.0;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const cplx c = states[i](2, 0);
    const double w = weights.empty() ? 1.0 : weights[i];
    if (std::abs(c) <= 1e-12 || w <= 0.0) continue;
    sum += w * c / std::abs(c);
    total += w;
    ++used;
  }
  if (used < 2) throw ConfigError("phase_spread needs >= 2 coherent groups");
  return 1.0 - std::abs(sum) / total;
}

}  // namespace echolock
