#pragma once

// Three-level Lambda system in the rotating frame.
//
// Levels |1> and |2> are the ground/spin pair, |3> the shared excited state.
// Units at the API boundary: times in us, Rabi frequencies as Omega/2pi in
// MHz, decay rates and detunings in kHz. Internally everything is angular,
// rad/us.

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <span>

namespace echolock {

using cplx = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// kHz (ordinary frequency) -> rad/us.
constexpr double khz_to_angular(double khz) { return kTwoPi * khz * 1e-3; }
/// MHz (ordinary frequency) -> rad/us.
constexpr double mhz_to_angular(double mhz) { return kTwoPi * mhz; }

/// Relaxation rates, all in kHz (ordinary frequency).
struct SystemParams {
  double gamma13 = 0.0;  // coherence decay |1>-|3>
  double gamma23 = 0.0;  // coherence decay |2>-|3>
  double gamma12 = 0.0;  // spin coherence decay |1>-|2>
  double Gamma31 = 0.0;  // population decay |3> -> |1>
  double Gamma32 = 0.0;  // population decay |3> -> |2>
  double Gamma12 = 0.0;  // symmetric spin population exchange |1> <-> |2>
  // Sign with which the optical detuning enters the |3><3| diagonal. The
  // physics is invariant under flipping it (complex-conjugate evolution).
  int detuning_sign = -1;

  /// Throws ConfigError on a negative rate or a sign other than +-1.
  void validate() const;
  bool decay_free() const;
};

enum class Transition { Opt13, Opt23 };

const char* to_string(Transition t);

struct DriveField {
  Transition transition = Transition::Opt13;
  double rabi = 0.0;   // Omega/2pi, MHz
  double phase = 0.0;  // carrier phase, rad
};

/// Optical detuning of one atom group, applied to both optical transitions,
/// so the two-photon (spin) detuning is identically zero.
struct AtomDetuning {
  double delta = 0.0;  // kHz
};

/// Rotating-frame Hamiltonian H/hbar in rad/us. Each drive couples its
/// transition with -(Omega_ang/2) e^{i phase}, so a pulse of area
/// theta = integral of Omega_ang dt transfers sin^2(theta/2) of the population.
/// Throws ConfigError on two drives sharing a transition or a negative Rabi
/// frequency.
Matrix3c hamiltonian(AtomDetuning delta, std::span<const DriveField> drives,
                     int detuning_sign = -1);

/// d rho / dt = -i[H, rho] + relaxation, in 1/us.
Matrix3c liouville_rhs(const Matrix3c& rho, const Matrix3c& H,
                       const SystemParams& params);

/// Ground state rho_11 = 1.
Matrix3c ground_state();

struct StateDiagnostics {
  double trace_error = 0.0;        // |tr rho - 1|
  double hermiticity_error = 0.0;  // max |rho_ij - conj(rho_ji)|
  double min_eigenvalue = 0.0;     // of the Hermitian part

  // Thresholds of the DensityMatrix invariants.
  static constexpr double kTraceTol = 1e-9;
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kEigenTol = -1e-8;

  bool ok() const {
    return trace_error <= kTraceTol && hermiticity_error <= kHermitianTol &&
           min_eigenvalue >= kEigenTol;
  }
};

StateDiagnostics validate_state(const Matrix3c& rho);

/// Hermitian projection (rho + rho^dagger)/2.
inline Matrix3c hermitize(const Matrix3c& m) {
  return 0.5 * (m + m.adjoint());
}

}  // namespace echolock
