#pragma once

#include "wecs/control/state_space.hpp"
#include "wecs/params.hpp"

namespace wecs {

/// Equilibrium (v̄, ω̄r, β̄, δ̄, T̄g) about which the plant is linearized.
struct OperatingPoint {
  double wind = 0.0;              // m/s
  double rotor_speed = 0.0;       // rad/s
  double pitch = 0.0;             // deg
  double twist = 0.0;             // rad
  double generator_torque = 0.0;  // N m

  /// Equilibrium at rated rotor speed for the given wind and pitch.
  static OperatingPoint at(double wind, double pitch_deg, const TurbineParams& p);

  PlantState state(const TurbineParams& p) const;
  ControlCommand command(const TurbineParams& p) const;

  /// Largest derivative magnitude, each scaled by a characteristic rate.
  double equilibrium_residual(const TurbineParams& p) const;
};

/// Aerodynamic power the full-load controller regulates to:
/// aero_power(wind_min, ωr0, pitch_min).
double rated_aero_power(const TurbineParams& p);

/// Pitch giving rated_aero_power at ωr0, by bisection on [pitch_min,
/// pitch_max]. Returns pitch_max when even full pitch leaves excess power.
/// Throws NoRootError when the wind is too weak to reach rated power.
double trim_pitch(double wind, const TurbineParams& p);

/// How the pitch of a polytope vertex is chosen.
enum class VertexPitchPolicy {
  /// (wind_min, pitch_min) and (wind_max, pitch_max).
  paired_bounds,
  /// trim_pitch(wind).
  computed_trim,
};

OperatingPoint vertex_operating_point(double wind, VertexPitchPolicy policy,
                                      const TurbineParams& p);

/// Partial derivatives of the aerodynamic torque.
struct LinearCoefficients {
  double k_omega = 0.0;  // ∂Tr/∂ωr, N m s/rad
  double k_wind = 0.0;   // ∂Tr/∂v, N m s/m
  double k_pitch = 0.0;  // ∂Tr/∂β, N m/deg
};

/// Central differences with one Richardson extrapolation, using the
/// unclamped Cp surface so the zero-pitch vertex can be straddled.
LinearCoefficients linearize_coefficients(const OperatingPoint& op, const TurbineParams& p);

/// Linear model about an operating point. State [Δδ, Δωr, Δωg, Δβ, ΔTg],
/// controls [Δβr, ΔTg,r], disturbance Δv, outputs [Δωg, ΔTg].
struct LinearModel {
  OperatingPoint op;
  LinearCoefficients coefficients;
  control::Matrix A, B1, B2, C;

  /// Controls → outputs.
  control::StateSpace plant() const;
  /// Inputs [Δv; Δβr; ΔTg,r] → outputs.
  control::StateSpace with_disturbance() const;
};

LinearModel build_linear_model(const OperatingPoint& op, const TurbineParams& p);
LinearModel build_linear_model(const OperatingPoint& op, const LinearCoefficients& k,
                               const TurbineParams& p);

/// C (sI − A)⁻¹ B + D.
control::CMatrix transfer_function(const control::StateSpace& sys, control::Complex s);

}  // namespace wecs
