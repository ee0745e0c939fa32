#pragma once

#include "wecs/params.hpp"

namespace wecs {

/// Right-hand side of the nonlinear two-mass model. The pitch rate is
/// clamped to ±pitch_rate_limit inside the derivative (dynamic rate
/// saturation), so the ODE stays well defined.
PlantState::Vector derivatives(const PlantState& x, const ControlCommand& u, double wind,
                               const TurbineParams& p);

/// One fixed-step RK4 step with the command and wind held constant over
/// `dt`. Pitch is clamped to [pitch_min, pitch_max] afterwards.
/// Throws NumericError if the new state is not finite.
PlantState step(const PlantState& x, const ControlCommand& u, double wind, double dt,
                const TurbineParams& p);

/// Equilibrium state at rated rotor speed for the given wind and pitch:
/// twist = Tr/Ks, generator speed = Ng ωr, torque = Tr/Ng.
PlantState equilibrium_state(double wind, double pitch_deg, const TurbineParams& p);

/// Command that holds `equilibrium_state(wind, pitch)` at rest.
ControlCommand equilibrium_command(double wind, double pitch_deg, const TurbineParams& p);

}  // namespace wecs
