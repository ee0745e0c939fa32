#include "wecs/linearize.hpp"

#include <algorithm>
#include <cmath>

#include "wecs/aero.hpp"
#include "wecs/error.hpp"
#include "wecs/plant.hpp"

namespace wecs {
namespace {

template <class F>
double richardson(F&& f, double x, double h) {
  const auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace

OperatingPoint OperatingPoint::at(double wind, double pitch, const TurbineParams& p) {
  const PlantState x = equilibrium_state(wind, pitch, p);
  return {wind, x.rotor_speed, pitch, x.twist, x.generator_torque};
}

PlantState OperatingPoint::state(const TurbineParams& p) const {
  return {twist, rotor_speed, p.gearbox_ratio * rotor_speed, pitch, generator_torque};
}

ControlCommand OperatingPoint::command(const TurbineParams&) const {
  return {pitch, generator_torque};
}

double OperatingPoint::equilibrium_residual(const TurbineParams& p) const {
  const PlantState::Vector dx = derivatives(state(p), command(p), wind, p);
  const double torque_scale = std::max(1.0, p.shaft_stiffness * std::abs(twist));
  PlantState::Vector scale;
  scale << std::max(rotor_speed, 1e-12), torque_scale / p.rotor_inertia,
      torque_scale / (p.gearbox_ratio * p.generator_inertia), p.pitch_rate_limit,
      std::max(1.0, std::abs(generator_torque)) / p.generator_time_constant;
  return dx.cwiseQuotient(scale).cwiseAbs().maxCoeff();
}

double rated_aero_power(const TurbineParams& p) {
  return aero_power(p.wind_min, p.rated_rotor_speed, p.pitch_min, p);
}

double trim_pitch(double wind, const TurbineParams& p) {
  if (!(wind > 0.0)) throw DomainError("trim_pitch: wind speed must be > 0");
  const double target = rated_aero_power(p);
  const auto excess = [&](double beta) {
    return aero_power(wind, p.rated_rotor_speed, beta, p) - target;
  };
  double lo = p.pitch_min, hi = p.pitch_max;
  const double f_lo = excess(lo);
  if (std::abs(f_lo) <= 1e-12 * target) return lo;
  if (f_lo < 0.0)
    throw NoRootError("trim_pitch: rated power unreachable at " + std::to_string(wind) +
                      " m/s within the pitch range");
  if (excess(hi) >= 0.0) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

OperatingPoint vertex_operating_point(double wind, VertexPitchPolicy policy,
                                      const TurbineParams& p) {
  double pitch = 0.0;
  if (policy == VertexPitchPolicy::computed_trim) {
    pitch = trim_pitch(wind, p);
  } else if (wind == p.wind_min) {
    pitch = p.pitch_min;
  } else if (wind == p.wind_max) {
    pitch = p.pitch_max;
  } else {
    throw DomainError("vertex_operating_point: paired bounds need wind_min or wind_max");
  }
  return OperatingPoint::at(wind, pitch, p);
}

LinearCoefficients linearize_coefficients(const OperatingPoint& op, const TurbineParams& p) {
  const auto torque = [&](double v, double w, double b) {
    return aero_torque(v, w, b, p, CpMode::analytic);
  };
  LinearCoefficients k;
  k.k_omega = richardson([&](double w) { return torque(op.wind, w, op.pitch); },
                         op.rotor_speed, 1e-3 * std::abs(op.rotor_speed));
  k.k_wind = richardson([&](double v) { return torque(v, op.rotor_speed, op.pitch); }, op.wind,
                        1e-3 * std::abs(op.wind));
  k.k_pitch = richardson([&](double b) { return torque(op.wind, op.rotor_speed, b); }, op.pitch,
                         1e-3 * std::max(1.0, std::abs(op.pitch)));
  return k;
}

LinearModel build_linear_model(const OperatingPoint& op, const TurbineParams& p) {
  return build_linear_model(op, linearize_coefficients(op, p), p);
}

LinearModel build_linear_model(const OperatingPoint& op, const LinearCoefficients& k,
                               const TurbineParams& p) {
  using control::Matrix;
  const double ng = p.gearbox_ratio, jr = p.rotor_inertia, jg = p.generator_inertia;
  const double ds = p.shaft_damping, ks = p.shaft_stiffness;
  LinearModel m;
  m.op = op;
  m.coefficients = k;
  m.A = Matrix::Zero(5, 5);
  m.A.row(0) << 0.0, 1.0, -1.0 / ng, 0.0, 0.0;
  m.A.row(1) << -ks / jr, (k.k_omega - ds) / jr, ds / (ng * jr), k.k_pitch / jr, 0.0;
  m.A.row(2) << ks / (ng * jg), ds / (ng * jg), -ds / (ng * ng * jg), 0.0, -1.0 / jg;
  m.A(3, 3) = -1.0 / p.pitch_time_constant;
  m.A(4, 4) = -1.0 / p.generator_time_constant;
  m.B1 = Matrix::Zero(5, 1);
  m.B1(1, 0) = k.k_wind / jr;
  m.B2 = Matrix::Zero(5, 2);
  m.B2(3, 0) = 1.0 / p.pitch_time_constant;
  m.B2(4, 1) = 1.0 / p.generator_time_constant;
  m.C = Matrix::Zero(2, 5);
  m.C(0, 2) = 1.0;
  m.C(1, 4) = 1.0;
  return m;
}

control::StateSpace LinearModel::plant() const {
  return control::StateSpace(A, B2, C, control::Matrix::Zero(2, 2));
}

control::StateSpace LinearModel::with_disturbance() const {
  control::Matrix B(5, 3);
  B << B1, B2;
  return control::StateSpace(A, B, C, control::Matrix::Zero(2, 3));
}

control::CMatrix transfer_function(const control::StateSpace& sys, control::Complex s) {
  return control::evaluate(sys, s);
}

}  // namespace wecs
