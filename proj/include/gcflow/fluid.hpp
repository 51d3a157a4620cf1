#pragma once

#include <cmath>
#include <utility>

#include "gcflow/csv.hpp"
#include "gcflow/errors.hpp"

namespace gcflow {

enum class FlowType { Subsonic, Supersonic, Sonic };

inline constexpr double kSonicTol = 1e-10;     // q^2 + kappa at or below this blows up the density
inline constexpr double kClassifyTol = 1e-12;  // width of the sonic band in kappa

/// Normalized second fundamental form: h11 = sqrt|g| L, h12 = sqrt|g| M, h22 = sqrt|g| N.
template <typename Scalar = double>
struct SecondFF {
  Scalar L{}, M{}, N{};
};

/// Chaplygin state: p = -1/rho is enforced at construction.
template <typename Scalar = double>
struct FluidState {
  Scalar rho{1}, u{}, v{}, p{-1};

  static FluidState from_velocity(Scalar rho, Scalar u, Scalar v) {
    return FluidState{rho, u, v, Scalar(-1) / rho};
  }

  Scalar q2() const { return u * u + v * v; }
};

/// L = rho v^2 + p, M = -rho u v, N = rho u^2 + p.
template <typename Scalar>
SecondFF<Scalar> fluid_to_lmn(const FluidState<Scalar>& s) {
  return SecondFF<Scalar>{s.rho * s.v * s.v + s.p, -s.rho * s.u * s.v, s.rho * s.u * s.u + s.p};
}

/// rho = 1/sqrt(q^2 + kappa), p = -1/rho. Throws SonicDegeneracy when
/// q^2 + kappa <= kSonicTol.
template <typename Scalar>
std::pair<Scalar, Scalar> bernoulli_density(Scalar q2, Scalar kappa) {
  const Scalar s = q2 + kappa;
  if (!(s > Scalar(kSonicTol)))
    throw Error(ErrorCode::SonicDegeneracy,
                "q^2 + kappa = " + format_double(static_cast<double>(s)));
  const Scalar root = std::sqrt(s);
  return {Scalar(1) / root, -root};
}

template <typename Scalar>
Scalar sound_speed(Scalar rho) {
  return Scalar(1) / rho;
}

inline FlowType classify(double kappa, double tol = kClassifyTol) {
  if (kappa > tol) return FlowType::Subsonic;
  if (kappa < -tol) return FlowType::Supersonic;
  return FlowType::Sonic;
}

inline const char* to_string(FlowType t) {
  switch (t) {
    case FlowType::Subsonic: return "subsonic";
    case FlowType::Supersonic: return "supersonic";
    case FlowType::Sonic: return "sonic";
  }
  return "?";
}

/// rho p q^2 + p^2 - kappa; zero for Bernoulli-consistent states.
template <typename Scalar>
Scalar gauss_residual(const FluidState<Scalar>& s, Scalar kappa) {
  return s.rho * s.p * s.q2() + s.p * s.p - kappa;
}

/// Inverts (L, M, N) to the Chaplygin state with the negative pressure root
///   p = ((L+N) - sqrt((L-N)^2 + 4 M^2)) / 2,
/// the gauge u >= 0, and sign(v) = sign(-M) (v >= 0 when M = 0).
///
/// The root distances N - p and L - p are computed in cancellation-free form:
/// the larger via ((N-L) + sqrt(D))/2 whose addends share a sign, the smaller
/// via M^2 / larger, so velocities stay accurate near stagnation where
/// N - p ~ rho u^2 underflows the naive subtraction.
template <typename Scalar>
FluidState<Scalar> lmn_to_fluid(const SecondFF<Scalar>& f, Scalar kappa,
                                Scalar constraint_tol = Scalar(1e-8)) {
  const Scalar L = f.L, M = f.M, N = f.N;
  const Scalar violation = L * N - M * M - kappa;
  if (!(std::fabs(static_cast<double>(violation)) <=
        static_cast<double>(constraint_tol) *
            std::max(1.0, std::fabs(static_cast<double>(kappa)))))
    throw Error(ErrorCode::ConstraintViolation,
                "LN - M^2 - kappa = " + format_double(static_cast<double>(violation)));

  const Scalar diff = L - N;
  const Scalar sqrt_d = std::sqrt(diff * diff + Scalar(4) * M * M);
  const Scalar trace = L + N;
  Scalar p;
  if (trace <= Scalar(0)) {
    p = (trace - sqrt_d) / Scalar(2);
  } else {
    const Scalar p_plus = (trace + sqrt_d) / Scalar(2);
    p = kappa / p_plus;
  }
  if (!(p < Scalar(0)))
    throw Error(ErrorCode::NoNegativeRoot, "p = " + format_double(static_cast<double>(p)));

  Scalar n_minus_p, l_minus_p;
  if (N >= L) {
    n_minus_p = ((N - L) + sqrt_d) / Scalar(2);
    l_minus_p = (M != Scalar(0)) ? (M * M) / n_minus_p : ((L - N) + sqrt_d) / Scalar(2);
  } else {
    l_minus_p = ((L - N) + sqrt_d) / Scalar(2);
    n_minus_p = (M != Scalar(0)) ? (M * M) / l_minus_p : ((N - L) + sqrt_d) / Scalar(2);
  }

  FluidState<Scalar> s;
  s.p = p;
  s.rho = Scalar(-1) / p;
  s.u = std::sqrt(-p * n_minus_p);
  const Scalar vmag = std::sqrt(-p * l_minus_p);
  s.v = (M == Scalar(0)) ? vmag : (M < Scalar(0) ? vmag : -vmag);
  return s;
}

}  // namespace gcflow
