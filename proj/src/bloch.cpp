#include "echolock/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "echolock/errors.hpp"

namespace echolock {

void SystemParams::validate() const {
  const std::pair<const char*, double> rates[] = {
      {"gamma13", gamma13}, {"gamma23", gamma23}, {"gamma12", gamma12},
      {"Gamma31", Gamma31}, {"Gamma32", Gamma32}, {"Gamma12", Gamma12}};
  for (const auto& [name, value] : rates) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ConfigError(std::string("decay rate ") + name +
                        " must be finite and >= 0, got " +
                        std::to_string(value));
    }
  }
  if (detuning_sign != 1 && detuning_sign != -1) {
    throw ConfigError("detuning_sign must be +1 or -1");
  }
}

bool SystemParams::decay_free() const {
  return gamma13 == 0.0 && gamma23 == 0.0 && gamma12 == 0.0 &&
         Gamma31 == 0.0 && Gamma32 == 0.0 && Gamma12 == 0.0;
}

const char* to_string(Transition t) {
  return t == Transition::Opt13 ? "opt13" : "opt23";
}

Matrix3c hamiltonian(AtomDetuning delta, std::span<const DriveField> drives,
                     int detuning_sign) {
  Matrix3c H = Matrix3c::Zero();
  H(2, 2) = detuning_sign * khz_to_angular(delta.delta);

  bool seen13 = false;
  bool seen23 = false;
  for (const DriveField& d : drives) {
    if (!(d.rabi >= 0.0)) {
      throw ConfigError("Rabi frequency must be >= 0");
    }
    bool& seen = d.transition == Transition::Opt13 ? seen13 : seen23;
    if (seen) {
      throw ConfigError(std::string("two simultaneous drives on ") +
                        to_string(d.transition));
    }
    seen = true;
    const int row = d.transition == Transition::Opt13 ? 0 : 1;
    const cplx coupling =
        -0.5 * mhz_to_angular(d.rabi) * std::polar(1.0, d.phase);
    H(row, 2) = coupling;
    H(2, row) = std::conj(coupling);
  }
  return H;
}

Matrix3c liouville_rhs(const Matrix3c& rho, const Matrix3c& H,
                       const SystemParams& p) {
  static const cplx I(0.0, 1.0);
  Matrix3c d = -I * (H * rho - rho * H);

  const double G31 = khz_to_angular(p.Gamma31);
  const double G32 = khz_to_angular(p.Gamma32);
  const double G12 = khz_to_angular(p.Gamma12);
  const double g13 = khz_to_angular(p.gamma13);
  const double g23 = khz_to_angular(p.gamma23);
  const double g12 = khz_to_angular(p.gamma12);

  // Population channels; the three flows sum to zero.
  const cplx r11 = rho(0, 0);
  const cplx r22 = rho(1, 1);
  const cplx r33 = rho(2, 2);
  d(0, 0) += G31 * r33 - G12 * (r11 - r22);
  d(1, 1) += G32 * r33 + G12 * (r11 - r22);
  d(2, 2) -= (G31 + G32) * r33;

  d(0, 2) -= g13 * rho(0, 2);
  d(2, 0) -= g13 * rho(2, 0);
  d(1, 2) -= g23 * rho(1, 2);
  d(2, 1) -= g23 * rho(2, 1);
  d(0, 1) -= g12 * rho(0, 1);
  d(1, 0) -= g12 * rho(1, 0);
  return d;
}

Matrix3c ground_state() {
  Matrix3c rho = Matrix3c::Zero();
  rho(0, 0) = 1.0;
  return rho;
}

StateDiagnostics validate_state(const Matrix3c& rho) {
  StateDiagnostics diag;
  diag.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      diag.hermiticity_error = std::max(
          diag.hermiticity_error, std::abs(rho(i, j) - std::conj(rho(j, i))));
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix3c> solver(hermitize(rho),
                                                 Eigen::EigenvaluesOnly);
  diag.min_eigenvalue = solver.eigenvalues().minCoeff();
  return diag;
}

}  // namespace echolock
