#include "wecs/lpv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wecs/aero.hpp"
#include "wecs/error.hpp"
#include "wecs/io/labeled_matrix.hpp"

namespace wecs::lpv {
namespace {

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

StateSpace diagonal_weight(const std::vector<TransferFunction>& tfs) {
  StateSpace out = tfs.front().to_state_space();
  for (size_t i = 1; i < tfs.size(); ++i) out = control::append(out, tfs[i].to_state_space());
  return out;
}

// Extra states with A = −I, B = 0, C = 0 so both vertices share one order.
StateSpace pad_states(const StateSpace& k, control::Index order) {
  const control::Index extra = order - k.states();
  if (extra <= 0) return k;
  Matrix A = block_diag(k.A, -Matrix::Identity(extra, extra));
  Matrix B = Matrix::Zero(order, k.inputs());
  B.topRows(k.states()) = k.B;
  Matrix C = Matrix::Zero(k.outputs(), order);
  C.leftCols(k.states()) = k.C;
  return StateSpace(A, B, C, k.D);
}

}  // namespace

WeightingSet WeightingSet::defaults() {
  WeightingSet w;
  w.w1 = {{1.0, 10.0}, {2.0, 0.1}};
  w.w2 = {{{1.0, 60.0}, {2000.0, 1.2e7}}, {{1.0, 2.5}, {0.001, 25.0}}};
  w.w3 = Matrix::Identity(2, 2);
  return w;
}

void WeightingSet::validate() const {
  const auto check = [](const TransferFunction& tf, const char* name) {
    const StateSpace ss = tf.to_state_space();
    if (!ss.is_stable()) throw DomainError(std::string("weight ") + name + " is not stable");
  };
  check(w1, "W1");
  if (w2.empty()) throw DomainError("weight W2 has no channels");
  for (const auto& tf : w2) check(tf, "W2");
  if (w3 && !w3->allFinite()) throw DomainError("weight W3 is not finite");
}

StateSpace synthesis_plant(const LinearModel& model) {
  StateSpace g = model.plant();
  g.B.col(1) /= kTorqueScale;
  g.C.row(1) *= kTorqueScale;
  return g;
}

control::GeneralizedPlant build_generalized_plant(const StateSpace& g, const WeightingSet& w) {
  w.validate();
  const control::Index n = g.states(), m = g.inputs(), p = g.outputs();
  if (static_cast<control::Index>(w.w2.size()) != m)
    throw DimensionError("build_generalized_plant: W2 needs one entry per control channel");
  if (w.w3 && w.w3->cols() != p)
    throw DimensionError("build_generalized_plant: W3 columns must match plant outputs");

  const StateSpace w1 = diagonal_weight(std::vector<TransferFunction>(p, w.w1));
  const StateSpace w2 = diagonal_weight(w.w2);
  const Matrix w3 = w.w3 ? *w.w3 : Matrix(0, p);
  const control::Index n1 = w1.states(), n2 = w2.states();
  const control::Index nz = p + m + w3.rows(), N = n + n1 + n2;

  // e = w − C x − D u
  Matrix A = Matrix::Zero(N, N);
  A.topLeftCorner(n, n) = g.A;
  A.block(n, 0, n1, n) = -w1.B * g.C;
  A.block(n, n, n1, n1) = w1.A;
  A.bottomRightCorner(n2, n2) = w2.A;

  Matrix B = Matrix::Zero(N, p + m);
  B.block(n, 0, n1, p) = w1.B;
  B.block(0, p, n, m) = g.B;
  B.block(n, p, n1, m) = -w1.B * g.D;
  B.block(n + n1, p, n2, m) = w2.B;

  Matrix C = Matrix::Zero(nz + p, N);
  C.block(0, 0, p, n) = -w1.D * g.C;
  C.block(0, n, p, n1) = w1.C;
  C.block(p, n + n1, m, n2) = w2.C;
  C.block(p + m, 0, w3.rows(), n) = w3 * g.C;
  C.block(nz, 0, p, n) = -g.C;

  Matrix D = Matrix::Zero(nz + p, p + m);
  D.block(0, 0, p, p) = w1.D;
  D.block(0, p, p, m) = -w1.D * g.D;
  D.block(p, p, m, m) = w2.D;
  D.block(p + m, p, w3.rows(), m) = w3 * g.D;
  D.block(nz, 0, p, p).setIdentity();
  D.block(nz, p, p, m) = -g.D;

  return control::GeneralizedPlant(StateSpace(A, B, C, D), p, m, nz, p);
}

std::pair<double, double> scheduling_weights(double v, double vmin, double vmax) {
  if (!(vmax > vmin)) throw DomainError("scheduling_weights: vmax must exceed vmin");
  const double a1 = (std::clamp(v, vmin, vmax) - vmin) / (vmax - vmin);
  return {a1, 1.0 - a1};
}

SchedulingFilter::SchedulingFilter(double time_constant, double lo, double hi)
    : tc_(time_constant), lo_(lo), hi_(hi) {
  if (!(time_constant >= 0.0)) throw DomainError("SchedulingFilter: negative time constant");
  if (!(hi > lo)) throw DomainError("SchedulingFilter: empty range");
}

void SchedulingFilter::reset(double wind) {
  state_ = wind;
  initialized_ = true;
}

double SchedulingFilter::update(double wind, double dt) {
  if (!initialized_) {
    reset(wind);
  } else if (tc_ == 0.0) {
    state_ = wind;
  } else {
    state_ += (1.0 - std::exp(-dt / tc_)) * (wind - state_);
  }
  return value();
}

double SchedulingFilter::value() const { return std::clamp(state_, lo_, hi_); }

TrimTable::TrimTable(const TurbineParams& p, double vmin, double vmax, double spacing) {
  if (!(vmax > vmin) || !(spacing > 0.0)) throw DomainError("TrimTable: bad range");
  const int count = static_cast<int>(std::ceil((vmax - vmin) / spacing - 1e-9)) + 1;
  rows_.resize(count, 3);
  for (int i = 0; i < count; ++i) {
    const double v = i + 1 == count ? vmax : vmin + i * spacing;
    const double pitch = trim_pitch(v, p);
    rows_.row(i) << v, pitch,
        aero_torque(v, p.rated_rotor_speed, pitch, p) / p.gearbox_ratio;
  }
}

TrimTable TrimTable::from_matrix(const Matrix& rows) {
  if (rows.cols() != 3 || rows.rows() < 2) throw DimensionError("TrimTable: need N x 3, N >= 2");
  for (control::Index i = 1; i < rows.rows(); ++i)
    if (!(rows(i, 0) > rows(i - 1, 0))) throw DomainError("TrimTable: wind not increasing");
  TrimTable t;
  t.rows_ = rows;
  return t;
}

TrimPoint TrimTable::at(double v) const {
  if (rows_.rows() == 0) throw DomainError("TrimTable: empty");
  const control::Index n = rows_.rows();
  if (v <= rows_(0, 0)) return {rows_(0, 1), rows_(0, 2)};
  if (v >= rows_(n - 1, 0)) return {rows_(n - 1, 1), rows_(n - 1, 2)};
  const double* begin = rows_.col(0).data();
  const control::Index hi = std::upper_bound(begin, begin + n, v) - begin;
  const control::Index lo = hi - 1;
  const double t = (v - rows_(lo, 0)) / (rows_(hi, 0) - rows_(lo, 0));
  return {rows_(lo, 1) + t * (rows_(hi, 1) - rows_(lo, 1)),
          rows_(lo, 2) + t * (rows_(hi, 2) - rows_(lo, 2))};
}

LpvController::LpvController(StateSpace high, StateSpace low, double vmin, double vmax,
                             TrimTable trim, double scheduling_time_constant)
    : vertices_{std::move(high), std::move(low)},
      vmin_(vmin),
      vmax_(vmax),
      filter_tc_(scheduling_time_constant),
      trim_(std::move(trim)) {
  const auto& a = vertices_[0];
  const auto& b = vertices_[1];
  if (a.states() != b.states() || a.inputs() != b.inputs() || a.outputs() != b.outputs())
    throw DimensionError("LpvController: vertex controllers differ in dimension");
  if (!(vmax > vmin)) throw DomainError("LpvController: vmax must exceed vmin");
}

StateSpace LpvController::interpolate(double v) const {
  const auto [a1, a2] = scheduling_weights(v, vmin_, vmax_);
  const StateSpace& k1 = vertices_[0];
  const StateSpace& k2 = vertices_[1];
  return StateSpace(a1 * k1.A + a2 * k2.A, a1 * k1.B + a2 * k2.B, a1 * k1.C + a2 * k2.C,
                    a1 * k1.D + a2 * k2.D);
}

std::string LpvController::to_text() const {
  io::LabeledMatrices out;
  out.set_meta("kind", "lpv-controller");
  out.set_meta("vmin", vmin_);
  out.set_meta("vmax", vmax_);
  out.set_meta("scheduling_time_constant", filter_tc_);
  out.set_meta("gamma_vmax", gammas[0]);
  out.set_meta("gamma_vmin", gammas[1]);
  const char* names[2] = {"vmax", "vmin"};
  for (int i = 0; i < 2; ++i) {
    const std::string s = names[i];
    out.add("A_" + s, vertices_[i].A);
    out.add("B_" + s, vertices_[i].B);
    out.add("C_" + s, vertices_[i].C);
    out.add("D_" + s, vertices_[i].D);
  }
  out.add("trim", trim_.rows());
  return out.to_text();
}

void LpvController::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_text();
  if (!out) throw Error("write failed: " + path.string());
}

LpvController LpvController::parse(const std::string& text, const std::string& source) {
  const io::LabeledMatrices in = io::LabeledMatrices::parse(text, source);
  try {
    if (in.meta("kind") != "lpv-controller")
      throw DomainError("not an lpv-controller file");
    const auto vertex = [&](const std::string& s) {
      return StateSpace(in.get("A_" + s), in.get("B_" + s), in.get("C_" + s), in.get("D_" + s));
    };
    LpvController c(vertex("vmax"), vertex("vmin"), in.meta_double("vmin"),
                    in.meta_double("vmax"), TrimTable::from_matrix(in.get("trim")),
                    in.meta_double("scheduling_time_constant"));
    c.gammas = {in.meta_double("gamma_vmax"), in.meta_double("gamma_vmin")};
    return c;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(source, 0, e.what());
  }
}

LpvController LpvController::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

ControllerState::ControllerState(const LpvController& c)
    : x(Vector::Zero(c.vertex(0).states())) {}

std::pair<double, double> output_reference(const LpvController& ctrl, double v,
                                           const TurbineParams& p) {
  const double vs = std::clamp(v, ctrl.vmin(), ctrl.vmax());
  return {p.gearbox_ratio * p.rated_rotor_speed, ctrl.trim().at(vs).torque};
}

ControlCommand controller_step(const LpvController& ctrl, ControllerState& state,
                               double speed_error, double torque_error, double v_sched,
                               double dt, const TurbineParams& p) {
  if (!(dt > 0.0)) throw DomainError("controller_step: dt must be > 0");
  const double vs = std::clamp(v_sched, ctrl.vmin(), ctrl.vmax());
  const double a1 = scheduling_weights(vs, ctrl.vmin(), ctrl.vmax()).first;
  if (!(std::abs(a1 - state.alpha) <= 1e-4) || dt != state.dt) {
    const StateSpace k = ctrl.interpolate(vs);
    std::tie(state.Ad, state.Bd) = control::discretize_zoh(k.A, k.B, dt);
    state.alpha = a1;
    state.dt = dt;
  }
  const StateSpace& k1 = ctrl.vertex(0);
  const StateSpace& k2 = ctrl.vertex(1);
  const double a2 = 1.0 - a1;
  Vector e(2);
  e << speed_error, torque_error * kTorqueScale;
  const Vector du = (a1 * k1.C + a2 * k2.C) * state.x + (a1 * k1.D + a2 * k2.D) * e;
  state.x = state.Ad * state.x + state.Bd * e;
  if (!state.x.allFinite() || !du.allFinite())
    throw NumericError("controller_step: controller state became non-finite");

  const TrimPoint trim = ctrl.trim().at(vs);
  ControlCommand cmd{trim.pitch + du(0), trim.torque + du(1) / kTorqueScale};
  return cmd.saturated(p);
}

LpvSynthesis synthesize_lpv(const TurbineParams& p, const WeightingSet& w,
                            const LpvOptions& opts) {
  p.validate();
  LpvSynthesis out;
  const double winds[2] = {p.wind_max, p.wind_min};
  const char* names[2] = {"vmax", "vmin"};
  for (int i = 0; i < 2; ++i) {
    VertexSynthesis& vs = out.vertices[i];
    vs.op = vertex_operating_point(winds[i], opts.pitch_policy, p);
    vs.model = build_linear_model(vs.op, p);
    vs.plant = build_generalized_plant(synthesis_plant(vs.model), w);
    try {
      vs.result = control::hinf_synthesize(vs.plant, opts.synthesis);
    } catch (const control::InfeasibleError& e) {
      throw control::InfeasibleError(e.condition(), std::string("vertex ") + names[i] + " (" +
                                                        std::to_string(winds[i]) +
                                                        " m/s): " + e.what());
    }
  }
  const control::Index order = std::max(out.vertices[0].result.controller.states(),
                                        out.vertices[1].result.controller.states());
  out.controller = LpvController(pad_states(out.vertices[0].result.controller, order),
                                 pad_states(out.vertices[1].result.controller, order),
                                 p.wind_min, p.wind_max, TrimTable(p, p.wind_min, p.wind_max),
                                 opts.scheduling_time_constant);
  out.controller.gammas = {out.vertices[0].result.gamma_achieved,
                           out.vertices[1].result.gamma_achieved};
  return out;
}

StateSpace interpolate_plant(const std::array<VertexSynthesis, 2>& v, double wind, double vmin,
                             double vmax) {
  const auto [a1, a2] = scheduling_weights(wind, vmin, vmax);
  const StateSpace g1 = synthesis_plant(v[0].model), g2 = synthesis_plant(v[1].model);
  return StateSpace(a1 * g1.A + a2 * g2.A, a1 * g1.B + a2 * g2.B, a1 * g1.C + a2 * g2.C,
                    a1 * g1.D + a2 * g2.D);
}

}  // namespace wecs::lpv
