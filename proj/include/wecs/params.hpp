#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

namespace wecs {

namespace io {
class KeyValueFile;
}

/// Physical constants of the two-mass turbine plus its operating envelope.
/// Defaults are the Vestas V29-225 kW values. Pitch quantities are in
/// degrees, shaft quantities in radians.
struct TurbineParams {
  double rated_power = 225.0e3;             // W
  double rated_rotor_speed = 4.3;           // rad/s
  double rated_generator_speed = 105.78;    // rad/s
  double trim_twist = 0.00655;              // rad
  double generator_inertia = 10.0;          // kg m^2
  double rotor_inertia = 90000.0;           // kg m^2
  double gearbox_ratio = 24.6;
  double blade_radius = 14.3;               // m
  double shaft_damping = 80000.0;           // N m s/rad
  double shaft_stiffness = 8.0e6;           // N m/rad
  double pitch_time_constant = 0.15;        // s
  double generator_time_constant = 0.1;     // s
  double air_density = 1.225;               // kg/m^3
  double pitch_min = 0.0;                   // deg
  double pitch_max = 24.0;                  // deg
  double pitch_rate_limit = 12.0;           // deg/s
  double wind_min = 11.0;                   // m/s
  double wind_max = 24.0;                   // m/s

  /// Throws DomainError naming the first violated invariant.
  void validate() const;

  /// Read `key = value` overrides on top of the defaults. Unknown keys
  /// outside the `piflc.` / `sim.` namespaces are rejected.
  static TurbineParams from_file(const std::filesystem::path& path);
  static TurbineParams from_keyvalues(const io::KeyValueFile& kv);

  /// Key-value text that round-trips through from_file.
  std::string to_text() const;
};

/// Plant state (twist, rotor speed, generator speed, pitch, generator torque).
struct PlantState {
  double twist = 0.0;            // rad
  double rotor_speed = 0.0;      // rad/s
  double generator_speed = 0.0;  // rad/s
  double pitch = 0.0;            // deg
  double generator_torque = 0.0; // N m

  using Vector = Eigen::Matrix<double, 5, 1>;

  Vector to_vector() const {
    return (Vector() << twist, rotor_speed, generator_speed, pitch,
            generator_torque)
        .finished();
  }

  static PlantState from_vector(const Vector& x) {
    return {x(0), x(1), x(2), x(3), x(4)};
  }

  bool is_finite() const { return to_vector().allFinite(); }
};

/// Actuator references: pitch (deg) and generator torque (N m).
struct ControlCommand {
  double pitch_ref = 0.0;
  double torque_ref = 0.0;

  /// Pitch reference clamped to the actuator range.
  ControlCommand saturated(const TurbineParams& p) const;
};

}  // namespace wecs
