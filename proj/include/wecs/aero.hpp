#pragma once

#include "wecs/params.hpp"

namespace wecs {

/// How the power-coefficient surface treats its non-physical regions.
enum class CpMode {
  /// Pitch must be >= 0 and negative Cp is clamped to 0.
  physical,
  /// Raw formula, no clamp, any pitch; used for finite differencing at the
  /// zero-pitch vertex.
  analytic,
};

/// Cp(λ, β) = 0.22 (116/λi − 0.6β − 5) exp(−12.5/λi) with
/// 1/λi = 1/(λ + 0.12β) − 0.035/((1.5β)² + 1). Pitch in degrees.
/// Throws DomainError when λ <= 0 or λi is undefined or non-positive.
double power_coefficient(double tip_speed_ratio, double pitch_deg,
                         CpMode mode = CpMode::physical);

/// ½ ρ π R² v³ Cp(ωr R / v, β).
double aero_power(double wind, double rotor_speed, double pitch_deg,
                  const TurbineParams& p, CpMode mode = CpMode::physical);

/// aero_power / ωr.
double aero_torque(double wind, double rotor_speed, double pitch_deg,
                   const TurbineParams& p, CpMode mode = CpMode::physical);

}  // namespace wecs
