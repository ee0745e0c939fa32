#include "wecs/aero.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "wecs/error.hpp"

namespace wecs {
namespace {

constexpr double kTol = 64.0 * std::numeric_limits<double>::epsilon();

}  // namespace

double power_coefficient(double lambda, double beta, CpMode mode) {
  if (!std::isfinite(lambda) || !std::isfinite(beta))
    throw DomainError("power_coefficient: non-finite argument");
  if (!(lambda > 0.0)) throw DomainError("power_coefficient: tip-speed ratio must be > 0");
  if (mode == CpMode::physical && beta < 0.0)
    throw DomainError("power_coefficient: pitch must be >= 0");

  const double shifted = lambda + 0.12 * beta;
  if (std::abs(shifted) <= kTol) throw DomainError("power_coefficient: λ + 0.12β is zero");
  const double inv_lambda_i = 1.0 / shifted - 0.035 / ((1.5 * beta) * (1.5 * beta) + 1.0);
  if (std::abs(inv_lambda_i) <= kTol)
    throw DomainError("power_coefficient: λi denominator vanishes");
  if (inv_lambda_i < 0.0) throw DomainError("power_coefficient: λi <= 0");

  const double cp = 0.22 * (116.0 * inv_lambda_i - 0.6 * beta - 5.0) *
                    std::exp(-12.5 * inv_lambda_i);
  if (mode == CpMode::physical && cp < 0.0) return 0.0;
  return cp;
}

double aero_power(double wind, double rotor_speed, double pitch, const TurbineParams& p,
                  CpMode mode) {
  if (!(wind > 0.0)) throw DomainError("aero_power: wind speed must be > 0");
  if (!(rotor_speed > 0.0)) throw DomainError("aero_power: rotor speed must be > 0");
  const double lambda = rotor_speed * p.blade_radius / wind;
  const double area = std::numbers::pi * p.blade_radius * p.blade_radius;
  return 0.5 * p.air_density * area * wind * wind * wind *
         power_coefficient(lambda, pitch, mode);
}

double aero_torque(double wind, double rotor_speed, double pitch, const TurbineParams& p,
                   CpMode mode) {
  if (!(rotor_speed > 0.0)) throw DomainError("aero_torque: rotor speed must be > 0");
  return aero_power(wind, rotor_speed, pitch, p, mode) / rotor_speed;
}

}  // namespace wecs
