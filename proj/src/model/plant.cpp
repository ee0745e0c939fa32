#include "wecs/plant.hpp"

#include <algorithm>

#include "wecs/aero.hpp"
#include "wecs/error.hpp"

namespace wecs {

PlantState::Vector derivatives(const PlantState& x, const ControlCommand& u, double wind,
                               const TurbineParams& p) {
  // RK4 stages may overshoot the actuator stops slightly.
  const double rotor_torque =
      aero_torque(wind, x.rotor_speed, std::clamp(x.pitch, p.pitch_min, p.pitch_max), p);
  const double twist_rate = x.rotor_speed - x.generator_speed / p.gearbox_ratio;
  const double low_speed_torque = p.shaft_damping * twist_rate + p.shaft_stiffness * x.twist;
  const double high_speed_torque = low_speed_torque / p.gearbox_ratio;
  const double pitch_rate = std::clamp((u.pitch_ref - x.pitch) / p.pitch_time_constant,
                                       -p.pitch_rate_limit, p.pitch_rate_limit);

  PlantState::Vector dx;
  dx << twist_rate,
      (rotor_torque - low_speed_torque) / p.rotor_inertia,
      (high_speed_torque - x.generator_torque) / p.generator_inertia,
      pitch_rate,
      (u.torque_ref - x.generator_torque) / p.generator_time_constant;
  return dx;
}

PlantState step(const PlantState& x, const ControlCommand& u, double wind, double dt,
                const TurbineParams& p) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be > 0");
  const PlantState::Vector x0 = x.to_vector();
  const auto f = [&](const PlantState::Vector& xv) {
    if (!xv.allFinite()) throw NumericError("step: plant state became non-finite");
    return derivatives(PlantState::from_vector(xv), u, wind, p);
  };
  const PlantState::Vector k1 = f(x0);
  const PlantState::Vector k2 = f(x0 + 0.5 * dt * k1);
  const PlantState::Vector k3 = f(x0 + 0.5 * dt * k2);
  const PlantState::Vector k4 = f(x0 + dt * k3);
  PlantState next = PlantState::from_vector(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  next.pitch = std::clamp(next.pitch, p.pitch_min, p.pitch_max);
  if (!next.is_finite()) throw NumericError("step: plant state became non-finite");
  return next;
}

PlantState equilibrium_state(double wind, double pitch, const TurbineParams& p) {
  const double rotor_torque = aero_torque(wind, p.rated_rotor_speed, pitch, p);
  PlantState x;
  x.twist = rotor_torque / p.shaft_stiffness;
  x.rotor_speed = p.rated_rotor_speed;
  x.generator_speed = p.gearbox_ratio * p.rated_rotor_speed;
  x.pitch = pitch;
  x.generator_torque = rotor_torque / p.gearbox_ratio;
  return x;
}

ControlCommand equilibrium_command(double wind, double pitch, const TurbineParams& p) {
  const PlantState x = equilibrium_state(wind, pitch, p);
  return {pitch, p.shaft_stiffness * x.twist / p.gearbox_ratio};
}

}  // namespace wecs
