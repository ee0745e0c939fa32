#include "wecs/params.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "wecs/error.hpp"
#include "wecs/io/keyvalue.hpp"
#include "wecs/io/number.hpp"

namespace wecs {
namespace {

struct Field {
  const char* key;
  double TurbineParams::*member;
};

constexpr std::array<Field, 18> kFields{{
    {"rated_power", &TurbineParams::rated_power},
    {"rated_rotor_speed", &TurbineParams::rated_rotor_speed},
    {"rated_generator_speed", &TurbineParams::rated_generator_speed},
    {"trim_twist", &TurbineParams::trim_twist},
    {"generator_inertia", &TurbineParams::generator_inertia},
    {"rotor_inertia", &TurbineParams::rotor_inertia},
    {"gearbox_ratio", &TurbineParams::gearbox_ratio},
    {"blade_radius", &TurbineParams::blade_radius},
    {"shaft_damping", &TurbineParams::shaft_damping},
    {"shaft_stiffness", &TurbineParams::shaft_stiffness},
    {"pitch_time_constant", &TurbineParams::pitch_time_constant},
    {"generator_time_constant", &TurbineParams::generator_time_constant},
    {"air_density", &TurbineParams::air_density},
    {"pitch_min", &TurbineParams::pitch_min},
    {"pitch_max", &TurbineParams::pitch_max},
    {"pitch_rate_limit", &TurbineParams::pitch_rate_limit},
    {"wind_min", &TurbineParams::wind_min},
    {"wind_max", &TurbineParams::wind_max},
}};

// Sections owned by other modules that may share the same file.
bool is_foreign_key(const std::string& key) {
  return key.rfind("piflc.", 0) == 0 || key.rfind("sim.", 0) == 0 ||
         key.rfind("lpv.", 0) == 0;
}

}  // namespace

void TurbineParams::validate() const {
  for (const auto& f : kFields) {
    if (!std::isfinite(this->*f.member))
      throw DomainError(std::string(f.key) + " is not finite");
  }
  const std::array<std::pair<const char*, double>, 13> positive{{
      {"rated_power", rated_power},
      {"rated_rotor_speed", rated_rotor_speed},
      {"rated_generator_speed", rated_generator_speed},
      {"generator_inertia", generator_inertia},
      {"rotor_inertia", rotor_inertia},
      {"gearbox_ratio", gearbox_ratio},
      {"blade_radius", blade_radius},
      {"shaft_damping", shaft_damping},
      {"shaft_stiffness", shaft_stiffness},
      {"pitch_time_constant", pitch_time_constant},
      {"generator_time_constant", generator_time_constant},
      {"air_density", air_density},
      {"pitch_rate_limit", pitch_rate_limit},
  }};
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0)) throw DomainError(std::string(name) + " must be > 0");
  }
  if (std::abs(rated_generator_speed - gearbox_ratio * rated_rotor_speed) >
      1e-6 * rated_generator_speed)
    throw DomainError("rated_generator_speed / rated_rotor_speed must equal gearbox_ratio");
  if (!(pitch_min < pitch_max)) throw DomainError("pitch_min must be < pitch_max");
  if (!(wind_min < wind_max)) throw DomainError("wind_min must be < wind_max");
  if (!(wind_min > 0.0)) throw DomainError("wind_min must be > 0");
}

TurbineParams TurbineParams::from_keyvalues(const io::KeyValueFile& kv) {
  TurbineParams p;
  for (const auto& key : kv.keys()) {
    if (is_foreign_key(key)) continue;
    const auto it = std::find_if(kFields.begin(), kFields.end(),
                                 [&](const Field& f) { return key == f.key; });
    if (it == kFields.end())
      throw ParseError(kv.source(), 0, "unknown turbine parameter '" + key + "'");
    p.*(it->member) = *kv.get_double(key);
  }
  p.validate();
  return p;
}

TurbineParams TurbineParams::from_file(const std::filesystem::path& path) {
  return from_keyvalues(io::KeyValueFile::load(path));
}

std::string TurbineParams::to_text() const {
  std::ostringstream out;
  for (const auto& f : kFields) out << f.key << " = " << io::format_double(this->*f.member) << '\n';
  return out.str();
}

ControlCommand ControlCommand::saturated(const TurbineParams& p) const {
  return {std::clamp(pitch_ref, p.pitch_min, p.pitch_max), torque_ref};
}

}  // namespace wecs
