#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "wecs/control/hinf.hpp"
#include "wecs/control/state_space.hpp"
#include "wecs/linearize.hpp"
#include "wecs/params.hpp"

namespace wecs::lpv {

using control::Matrix;
using control::StateSpace;
using control::TransferFunction;
using control::Vector;

/// Mixed-sensitivity weights. W1 is applied to every error channel, W2 has
/// one entry per control channel, W3 is an optional static output weight.
struct WeightingSet {
  TransferFunction w1;
  std::vector<TransferFunction> w2;
  std::optional<Matrix> w3;

  /// W1 = (s+10)/(2s+0.1), W2 = diag((s+60)/(2000s+1.2e7), (s+2.5)/(0.001s+25)), W3 = I.
  static WeightingSet defaults();
  /// Throws DomainError if a weight is improper or unstable.
  void validate() const;
};

/// Vertex plant in synthesis units: inputs [βr deg, Tg,r kN m], outputs
/// [ωg rad/s, Tg kN m].
StateSpace synthesis_plant(const LinearModel& model);

/// Inputs [w (references); u], outputs [W1 e; W2 u; W3 G u; e] with e = w − G u.
control::GeneralizedPlant build_generalized_plant(const StateSpace& g, const WeightingSet& w);

/// (α1, α2) with α1 = (clamp(v) − vmin)/(vmax − vmin), α2 = 1 − α1.
std::pair<double, double> scheduling_weights(double v, double vmin, double vmax);

/// First-order low-pass on the measured wind, output clamped to [lo, hi].
class SchedulingFilter {
 public:
  SchedulingFilter(double time_constant, double lo, double hi);
  void reset(double wind);
  double update(double wind, double dt);
  double value() const;

 private:
  double tc_, lo_, hi_;
  double state_ = 0.0;
  bool initialized_ = false;
};

struct TrimPoint {
  double pitch = 0.0;   // deg
  double torque = 0.0;  // generator torque reference, N m
};

/// Wind → (β̄, T̄g,r) sampled on a uniform grid, linearly interpolated.
class TrimTable {
 public:
  TrimTable() = default;
  TrimTable(const TurbineParams& p, double vmin, double vmax, double spacing = 0.05);
  /// Rows (v, β̄, T̄g,r).
  static TrimTable from_matrix(const Matrix& rows);
  const Matrix& rows() const { return rows_; }
  /// Clamps v to the table range.
  TrimPoint at(double v) const;

 private:
  Matrix rows_;
};

class LpvController {
 public:
  LpvController() = default;
  /// `high` is the vmax vertex (weight α1), `low` the vmin vertex (α2).
  LpvController(StateSpace high, StateSpace low, double vmin, double vmax, TrimTable trim,
                double scheduling_time_constant = 1.0);

  const StateSpace& vertex(int i) const { return vertices_.at(i); }
  double vmin() const { return vmin_; }
  double vmax() const { return vmax_; }
  double scheduling_time_constant() const { return filter_tc_; }
  const TrimTable& trim() const { return trim_; }
  std::array<double, 2> gammas{0.0, 0.0};

  /// α1 K_high + α2 K_low entrywise.
  StateSpace interpolate(double v) const;

  void save(const std::filesystem::path& path) const;
  std::string to_text() const;
  static LpvController load(const std::filesystem::path& path);
  static LpvController parse(const std::string& text, const std::string& source = "<string>");

 private:
  std::array<StateSpace, 2> vertices_;
  double vmin_ = 0.0, vmax_ = 0.0, filter_tc_ = 1.0;
  TrimTable trim_;
};

struct ControllerState {
  Vector x;
  /// α1 at which (Ad, Bd) were last discretized; NaN forces a refresh.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double dt = 0.0;
  Matrix Ad, Bd, Cc, Dc;

  explicit ControllerState(const LpvController& c);
};

/// Scaling of the measured error into synthesis units.
constexpr double kTorqueScale = 1e-3;

/// One controller update. `speed_error` in rad/s and `torque_error` in N m
/// (reference minus measurement). Returns trim(v_sched) + Δu with the pitch
/// saturated to the actuator range.
ControlCommand controller_step(const LpvController& ctrl, ControllerState& state,
                               double speed_error, double torque_error, double v_sched,
                               double dt, const TurbineParams& p);

/// Output references (ωg, Tg) the controller regulates to at scheduled wind v.
std::pair<double, double> output_reference(const LpvController& ctrl, double v,
                                           const TurbineParams& p);

struct VertexSynthesis {
  OperatingPoint op;
  LinearModel model;
  control::GeneralizedPlant plant;
  control::SynthesisResult result;
};

struct LpvOptions {
  control::SynthesisOptions synthesis;
  VertexPitchPolicy pitch_policy = VertexPitchPolicy::paired_bounds;
  double scheduling_time_constant = 1.0;
};

struct LpvSynthesis {
  LpvController controller;
  /// [0] = vmax vertex, [1] = vmin vertex.
  std::array<VertexSynthesis, 2> vertices;
};

/// Linearize at both vertices, synthesize, pad to equal order, build trim map.
/// Infeasibility is rethrown with the vertex named.
LpvSynthesis synthesize_lpv(const TurbineParams& p, const WeightingSet& w,
                            const LpvOptions& opts = {});

/// Entrywise α1 G_high + α2 G_low of the two vertex synthesis plants.
StateSpace interpolate_plant(const std::array<VertexSynthesis, 2>& v, double wind,
                             double vmin, double vmax);

}  // namespace wecs::lpv
