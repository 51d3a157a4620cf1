#pragma once

#include <cmath>

#include "gcflow/errors.hpp"
#include "gcflow/fluid.hpp"

namespace gcflow::gasref {

/// Closed-form steady gas relations used as cross-checks for the geometric
/// formulation; no PDE is solved here.

template <typename Scalar>
Scalar cavitation_speed(Scalar gamma) {
  return std::sqrt(Scalar(2) / (gamma - Scalar(1)));
}

template <typename Scalar>
Scalar critical_speed(Scalar gamma) {
  return std::sqrt(Scalar(2) / (gamma + Scalar(1)));
}

struct CriticalSpeeds {
  double q_cav;
  double q_cr;
};

inline CriticalSpeeds critical_speeds(double gamma) {
  return {cavitation_speed(gamma), critical_speed(gamma)};
}

/// Isothermal (gamma = 1) flows are sonic exactly at the sound speed.
inline double isothermal_critical_speed(double c) { return c; }

template <typename Scalar>
Scalar sound_speed_sq(Scalar q, Scalar gamma) {
  return Scalar(1) - (gamma - Scalar(1)) / Scalar(2) * q * q;
}

/// rho = (1 - (gamma-1) q^2 / 2)^(1/(gamma-1)) on [0, q_cav].
template <typename Scalar>
Scalar isentropic_density(Scalar q, Scalar gamma) {
  const Scalar base = sound_speed_sq(q, gamma);
  if (base < Scalar(0)) {
    if (base > Scalar(-1e-12)) return Scalar(0);  // rounding at the cavitation point
    throw Error(ErrorCode::BeyondCavitation,
                "q = " + format_double(static_cast<double>(q)) +
                    " exceeds q_cav = " + format_double(cavitation_speed<double>(gamma)));
  }
  return std::pow(base, Scalar(1) / (gamma - Scalar(1)));
}

/// q^2 - q_cr^2 - (2/(gamma+1)) (q^2 - c^2); identically zero on the Bernoulli branch.
template <typename Scalar>
Scalar classification_identity_residual(Scalar q, Scalar gamma) {
  const Scalar c2 = sound_speed_sq(q, gamma);
  const Scalar qcr = critical_speed(gamma);
  return q * q - qcr * qcr - Scalar(2) / (gamma + Scalar(1)) * (q * q - c2);
}

template <typename Scalar>
Scalar isothermal_density(Scalar q, Scalar c, Scalar rho0) {
  return rho0 * std::exp(-q * q / (Scalar(2) * c * c));
}

inline FlowType classify_speed(double q, double q_cr, double tol = 1e-12) {
  if (q < q_cr - tol) return FlowType::Subsonic;
  if (q > q_cr + tol) return FlowType::Supersonic;
  return FlowType::Sonic;
}

}  // namespace gcflow::gasref
