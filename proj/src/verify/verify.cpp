#include "wecs/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "wecs/aero.hpp"
#include "wecs/control/hinf.hpp"
#include "wecs/control/riccati.hpp"
#include "wecs/error.hpp"
#include "wecs/io/number.hpp"
#include "wecs/linearize.hpp"
#include "wecs/plant.hpp"
#include "wecs/sim.hpp"
#include "wecs/wind.hpp"

namespace wecs::verify {
namespace {

using control::CMatrix;
using control::Complex;
using control::Matrix;
using control::StateSpace;

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

StateSpace random_stable(std::mt19937_64& rng, int n, int m, int p) {
  Matrix a = random_matrix(rng, n, n);
  const double shift = Eigen::EigenSolver<Matrix>(a, false).eigenvalues().real().maxCoeff();
  a -= (shift + 0.5) * Matrix::Identity(n, n);
  return StateSpace(a, random_matrix(rng, n, m), random_matrix(rng, p, n), random_matrix(rng, p, m));
}

double rel_err(const CMatrix& got, const CMatrix& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

struct Shared {
  const VerifyOptions& opts;
  const lpv::LpvSynthesis* syn = nullptr;
  std::vector<sim::SimRecord> audited;  // every closed/open-loop record produced
};

CriterionResult rated_power(const Shared& s) {
  CriterionResult r{1, "rated-power consistency", false, "", "", {}};
  const TurbineParams& p = s.opts.params;
  const double power = aero_power(p.wind_min, p.rated_rotor_speed, p.pitch_min, p);
  const double err = rel(power, p.rated_power);
  r.pass = err <= 0.02;
  r.measured = "P(11 m/s, 4.3 rad/s, 0 deg) = " + fmt(power) + " W (" + fmt(100 * err) + "% from " +
               fmt(p.rated_power) + " W)";
  r.bound = "<= 2%";
  return r;
}

CriterionResult table2(const Shared& s) {
  CriterionResult r{2, "linearization vs reference coefficients", true, "", "", {}};
  struct Ref {
    const char* name;
    double wind, pitch, tol;
    double k[3];
  };
  const TurbineParams& p = s.opts.params;
  const Ref refs[2] = {{"vmin", p.wind_min, p.pitch_min, 0.10, {-6.91e3, 1.229e4, -2.251e3}},
                       {"vmax", p.wind_max, p.pitch_max, 0.15, {-6.57e4, 1.618e4, -2.786e4}}};
  std::string m;
  double worst = 0.0;
  for (const auto& ref : refs) {
    const LinearCoefficients k =
        linearize_coefficients(OperatingPoint::at(ref.wind, ref.pitch, p), p);
    const double got[3] = {k.k_omega, k.k_wind, k.k_pitch};
    const char* names[3] = {"Kw", "Kv", "Kb"};
    for (int i = 0; i < 3; ++i) {
      const double e = rel(got[i], ref.k[i]);
      worst = std::max(worst, e / ref.tol);
      if (e > ref.tol || (got[i] > 0) != (ref.k[i] > 0)) r.pass = false;
      m += std::string(ref.name) + "." + names[i] + "=" + fmt(got[i]) + " (" + fmt(100 * e) + "%) ";
    }
  }
  r.measured = m + "[Kb per degree]";
  r.bound = "vmin <= 10%, vmax <= 15%, signs match";
  return r;
}

CriterionResult equilibrium(const Shared& s) {
  CriterionResult r{3, "equilibrium identity", false, "", "", {}};
  const TurbineParams& p = s.opts.params;
  const double spring = p.shaft_stiffness * p.trim_twist;
  const double torque = aero_torque(p.wind_min, p.rated_rotor_speed, p.pitch_min, p);
  const double e1 = rel(torque, spring);
  const double ratio = p.rated_generator_speed / p.rated_rotor_speed;
  const double e2 = rel(ratio, p.gearbox_ratio);
  r.pass = e1 <= 0.02 && e2 <= 1e-9;
  r.measured = "Ks*d0 = " + fmt(spring) + " vs Tr = " + fmt(torque) + " (" + fmt(100 * e1) +
               "%); wg0/wr0 = " + io::format_double(ratio) + " vs Ng = " +
               io::format_double(p.gearbox_ratio);
  r.bound = "torque <= 2%, ratio exact (1e-9 rel)";
  return r;
}

CriterionResult fig7(const Shared& s) {
  CriterionResult r{4, "linear vs nonlinear step (scenario fig7)", false, "", "", {}};
  const TurbineParams& p = s.opts.params;
  const auto& v1 = s.syn->vertices[0];
  std::vector<double> d;
  std::string m;
  for (double w : {p.wind_max, p.wind_max - 1.0, p.wind_max - 2.0, p.wind_max - 3.0}) {
    const auto c = sim::step_comparison(v1.model, w, 0.5, p);
    d.push_back(c.discrepancy);
    m += fmt(w) + " m/s: " + fmt(100 * c.discrepancy) + "% ";
  }
  const bool monotone = d[1] > d[0] && d[2] > d[1] && d[3] > d[2];
  r.pass = d[0] <= 0.01 && monotone;
  r.measured = "vertex vmax, dwg discrepancy " + m + (monotone ? "(monotone)" : "(not monotone)");
  r.bound = "<= 1% at vertex, strictly growing away from it";

  const auto& v2 = s.syn->vertices[1];
  std::string info = "vertex vmin (not gated): ";
  for (double w : {p.wind_min, p.wind_min + 1.0, p.wind_min + 2.0, p.wind_min + 3.0}) {
    const auto c = sim::step_comparison(v2.model, w, 0.5, p);
    info += fmt(w) + " m/s: " + fmt(100 * c.discrepancy) + "% ";
  }
  r.notes.push_back(info);
  return r;
}

CriterionResult fig8(Shared& s) {
  CriterionResult r{5, "open-loop sweep power (scenario fig8)", false, "", "", {}};
  sim::RunContext ctx{s.opts.params, nullptr, s.opts.fuzzy};
  const auto rec = sim::run(sim::preset("fig8", sim::ControllerKind::open_loop, 1), ctx);
  const double ratio = rec.samples.back().power / s.opts.params.rated_power;
  s.audited.push_back(rec);
  r.pass = ratio >= 3.5;
  r.measured = "Ps(24 m/s) / rated = " + fmt(ratio);
  r.bound = ">= 3.5";
  return r;
}

CriterionResult synthesis(const Shared& s) {
  CriterionResult r{6, "synthesis soundness", true, "", "", {}};
  std::string m;
  const char* names[2] = {"vmax", "vmin"};
  for (int i = 0; i < 2; ++i) {
    const auto& v = s.syn->vertices[i];
    const StateSpace cl = v.plant.close_loop(v.result.controller);
    const bool stable = cl.is_stable(1e-9);
    double norm = std::numeric_limits<double>::infinity(), grid = norm;
    if (stable) {
      norm = control::hinf_norm(cl);
      grid = control::hinf_norm_grid(cl);
    }
    const double gap = rel(grid, norm);
    const auto [rx, ry] = v.result.riccati_residuals;
    const bool ok = stable && norm <= v.result.gamma_achieved && gap <= 0.005 &&
                    std::max(rx, ry) <= 1e-8;
    r.pass = r.pass && ok;
    m += std::string(names[i]) + ": gamma=" + fmt(v.result.gamma_achieved) + " |Tzw|=" +
         fmt(norm) + " grid gap=" + fmt(100 * gap) + "% res=(" + fmt(rx) + "," + fmt(ry) + "); ";
  }
  const auto& c = s.syn->controller;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 26; ++k) {
    const double w = c.vmin() + 0.5 * k;
    const StateSpace g = lpv::interpolate_plant(s.syn->vertices, w, c.vmin(), c.vmax());
    const auto P = lpv::build_generalized_plant(g, s.opts.weights);
    worst = std::max(worst, P.close_loop(c.interpolate(w)).spectral_abscissa());
  }
  r.pass = r.pass && worst < -1e-9;
  r.measured = m + "27-point max Re(eig) = " + fmt(worst);
  r.bound = "|Tzw| <= gamma, grid gap <= 0.5%, residuals <= 1e-8, max Re < 0";
  return r;
}

sim::RunContext lpv_context(const Shared& s) {
  return {s.opts.params, s.syn ? &s.syn->controller : nullptr, s.opts.fuzzy};
}

CriterionResult fig9(Shared& s) {
  CriterionResult r{7, "LPV step-ramp (scenario fig9)", false, "", "", {}};
  const TurbineParams& p = s.opts.params;
  const auto rec = sim::run(sim::preset("fig9", sim::ControllerKind::lpv, 1), lpv_context(s));
  const auto m = sim::metrics(rec, 10.0);
  double speed = 0.0, power = 0.0;
  for (const auto& smp : rec.samples) {
    if (smp.t < 10.0) continue;
    speed = std::max(speed, rel(smp.x.generator_speed, p.rated_generator_speed));
    power = std::max(power, rel(smp.power, p.rated_power));
  }
  s.audited.push_back(rec);
  auto piflc = sim::run(sim::preset("fig9", sim::ControllerKind::piflc, 1), lpv_context(s));
  s.audited.push_back(std::move(piflc));
  r.pass = speed <= 0.05 && power <= 0.05 && m.twist_amplitude <= 1e-3;
  r.measured = "max|wg-wg0|/wg0 = " + fmt(100 * speed) + "%, max|Ps-Pe0|/Pe0 = " +
               fmt(100 * power) + "%, twist amplitude = " + fmt(m.twist_amplitude) + " rad";
  r.bound = "5%, 5%, 1e-3 rad";
  return r;
}

CriterionResult fig10(Shared& s) {
  CriterionResult r{8, "turbulence LPV vs PIFLC (scenario fig10)", true, "", "", {}};
  std::string m;
  for (std::uint64_t seed : s.opts.turbulence_seeds) {
    const auto a = sim::run(sim::preset("fig10", sim::ControllerKind::lpv, seed), lpv_context(s));
    const auto b = sim::run(sim::preset("fig10", sim::ControllerKind::piflc, seed), lpv_context(s));
    const auto c = sim::compare(a, b, 10.0);
    const double lpv_fluct = c.lpv.channels.at("generator_speed").peak_fluctuation_pct;
    const bool ok = lpv_fluct <= 6.0 && c.speed_fluctuation_ratio >= 2.0 &&
                    c.twist_variance_ratio >= 2.0;
    r.pass = r.pass && ok;
    m += "seed " + std::to_string(seed) + ": LPV " + fmt(lpv_fluct) + "%, PIFLC " +
         fmt(c.piflc.channels.at("generator_speed").peak_fluctuation_pct) + "%, ratio " +
         fmt(c.speed_fluctuation_ratio) + ", twist var ratio " + fmt(c.twist_variance_ratio) +
         "; ";
    s.audited.push_back(a);
    s.audited.push_back(b);
  }
  r.measured = m;
  r.bound = "LPV <= 6%, both ratios >= 2, every seed";
  return r;
}

CriterionResult audit(Shared& s) {
  CriterionResult r{9, "constraint audit", false, "", "", {}};
  for (auto kind : {sim::ControllerKind::lpv, sim::ControllerKind::piflc})
    s.audited.push_back(sim::run(sim::preset("steady", kind, 1), lpv_context(s)));
  long long range = 0, rate = 0;
  double max_rate = 0.0, lo = s.opts.params.pitch_max, hi = s.opts.params.pitch_min;
  for (const auto& rec : s.audited) {
    range += rec.audit.pitch_range_violations;
    rate += rec.audit.pitch_rate_violations;
    max_rate = std::max(max_rate, rec.audit.max_abs_pitch_rate);
    lo = std::min(lo, rec.audit.min_pitch);
    hi = std::max(hi, rec.audit.max_pitch);
  }
  r.pass = range == 0 && rate == 0;
  r.measured = std::to_string(s.audited.size()) + " runs: range violations " + std::to_string(range) +
               ", rate violations " + std::to_string(rate) + ", pitch in [" + fmt(lo) + ", " +
               fmt(hi) + "] deg, max |rate| " + fmt(max_rate) + " deg/s";
  r.bound = "0 violations";
  return r;
}

CriterionResult numerics(const Shared& s) {
  CriterionResult r{10, "numerics property suite", false, "", "", {}};
  const auto care = props::care_random(100, 20240611);
  const double inter = props::interconnection_random(10, 7);
  const double rk4 = props::rk4_step_halving(s.opts.params, 1e-3);
  const double odd = props::fuzzy_antisymmetry(s.opts.fuzzy, 21);

  const auto wind_a = wind::von_karman_profile(17.5, 2.0, 170.0, 20.0, 5).to_csv();
  const auto wind_b = wind::von_karman_profile(17.5, 2.0, 170.0, 20.0, 5).to_csv();
  auto sc = sim::preset("fig9", sim::ControllerKind::lpv, 3);
  sc.wind.duration = 5.0;
  sc.window_start = 0.0;
  const auto rec_a = sim::run(sc, lpv_context(s)).to_csv();
  const auto rec_b = sim::run(sc, lpv_context(s)).to_csv();
  const bool same = wind_a == wind_b && rec_a == rec_b;

  r.pass = care.worst_residual <= 1e-8 && care.all_stable && inter <= 1e-9 && rk4 <= 1e-8 &&
           odd <= 1e-9 && same;
  r.measured = "CARE " + fmt(care.worst_residual) + (care.all_stable ? "" : " (unstable loop)") +
               ", interconnection " + fmt(inter) + ", RK4 " + fmt(rk4) + ", fuzzy odd " +
               fmt(odd) + ", determinism " + (same ? "byte-exact" : "MISMATCH");
  r.bound = "1e-8, 1e-9, 1e-8, 1e-9, identical";
  return r;
}

}  // namespace

namespace props {

CareSummary care_random(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CareSummary out;
  for (int t = 0; t < trials; ++t) {
    const Matrix a = random_matrix(rng, 4, 4);
    const Matrix b = random_matrix(rng, 4, 2);
    const Matrix mq = random_matrix(rng, 4, 4);
    const Matrix q = mq.transpose() * mq;
    const Matrix mr = random_matrix(rng, 2, 2);
    const Matrix rr = mr.transpose() * mr + Matrix::Identity(2, 2);
    const Matrix x = control::solve_care(a, b, q, rr);
    const Matrix g = b * rr.inverse() * b.transpose();
    out.worst_residual = std::max(out.worst_residual, control::care_residual(a, g, q, x));
    const double abscissa =
        Eigen::EigenSolver<Matrix>(a - g * x, false).eigenvalues().real().maxCoeff();
    if (!(abscissa < 0.0)) out.all_stable = false;
  }
  return out;
}

double interconnection_random(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(-2.0, 2.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const StateSpace g1 = random_stable(rng, 2, 2, 2);
    StateSpace g2 = random_stable(rng, 2, 2, 2);
    g2.D *= 0.1;  // keep I + D2 D1 well conditioned
    const StateSpace p = random_stable(rng, 3, 4, 4);
    StateSpace pk = p;
    pk.D.bottomRightCorner(2, 2) *= 0.1;
    const StateSpace ser = control::series(g1, g2);
    const StateSpace par = control::parallel(g1, g2);
    const StateSpace fb = control::feedback(g1, g2, -1);
    const StateSpace lft = control::lower_lft(pk, g2, 2, 2);
    for (int k = 0; k < 10; ++k) {
      const Complex s(0.0, std::pow(10.0, freq(rng)));
      const CMatrix G1 = control::evaluate(g1, s), G2 = control::evaluate(g2, s);
      const CMatrix I = CMatrix::Identity(2, 2);
      worst = std::max(worst, rel_err(control::evaluate(ser, s), G2 * G1));
      worst = std::max(worst, rel_err(control::evaluate(par, s), G1 + G2));
      worst = std::max(worst, rel_err(control::evaluate(fb, s), G1 * (I + G2 * G1).inverse()));
      const CMatrix P = control::evaluate(pk, s);
      const CMatrix P11 = P.topLeftCorner(2, 2), P12 = P.topRightCorner(2, 2);
      const CMatrix P21 = P.bottomLeftCorner(2, 2), P22 = P.bottomRightCorner(2, 2);
      const CMatrix want = P11 + P12 * G2 * (I - P22 * G2).inverse() * P21;
      worst = std::max(worst, rel_err(control::evaluate(lft, s), want));
    }
  }
  return worst;
}

double rk4_step_halving(const TurbineParams& p, double dt) {
  PlantState x = equilibrium_state(17.5, trim_pitch(17.5, p), p);
  x.rotor_speed *= 1.02;
  x.twist *= 1.05;
  x.generator_torque *= 0.97;
  const ControlCommand u{x.pitch + 0.5, 1.01 * x.generator_torque};
  const PlantState full = step(x, u, 18.0, dt, p);
  const PlantState half = step(step(x, u, 18.0, 0.5 * dt, p), u, 18.0, 0.5 * dt, p);
  PlantState::Vector scale;
  scale << p.trim_twist, p.rated_rotor_speed, p.rated_generator_speed, p.pitch_max,
      p.shaft_stiffness * p.trim_twist / p.gearbox_ratio;
  return (full.to_vector() - half.to_vector()).cwiseQuotient(scale).cwiseAbs().maxCoeff();
}

double fuzzy_antisymmetry(const piflc::FuzzyConfig& c, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double e = -1.0 + 2.0 * i / (n - 1), de = -1.0 + 2.0 * j / (n - 1);
      worst = std::max(worst, std::abs(piflc::surface(e, de, c) + piflc::surface(-e, -de, c)));
    }
  return worst;
}

}  // namespace props

std::vector<CriterionResult> run_all(const VerifyOptions& opts) {
  std::vector<CriterionResult> out;
  const auto guarded = [&](int id, const char* name, const std::function<CriterionResult()>& f) {
    try {
      out.push_back(f());
    } catch (const std::exception& e) {
      out.push_back({id, name, false, std::string("error: ") + e.what(), "completes", {}});
    }
  };

  Shared shared{opts, opts.synthesis, {}};
  std::optional<lpv::LpvSynthesis> owned;
  std::string synthesis_error;
  if (!shared.syn) {
    try {
      owned = lpv::synthesize_lpv(opts.params, opts.weights);
      shared.syn = &*owned;
    } catch (const std::exception& e) {
      synthesis_error = e.what();
    }
  }
  const auto needs = [&](int id, const char* name, CriterionResult (*f)(Shared&)) {
    if (!shared.syn)
      out.push_back({id, name, false, "error: synthesis failed: " + synthesis_error, "completes", {}});
    else
      guarded(id, name, [&] { return f(shared); });
  };

  guarded(1, "rated-power consistency", [&] { return rated_power(shared); });
  guarded(2, "linearization vs reference coefficients", [&] { return table2(shared); });
  guarded(3, "equilibrium identity", [&] { return equilibrium(shared); });
  needs(4, "linear vs nonlinear step (scenario fig7)", [](Shared& s) { return fig7(s); });
  guarded(5, "open-loop sweep power (scenario fig8)", [&] { return fig8(shared); });
  needs(6, "synthesis soundness", [](Shared& s) { return synthesis(s); });
  needs(7, "LPV step-ramp (scenario fig9)", [](Shared& s) { return fig9(s); });
  needs(8, "turbulence LPV vs PIFLC (scenario fig10)", [](Shared& s) { return fig10(s); });
  needs(9, "constraint audit", [](Shared& s) { return audit(s); });
  needs(10, "numerics property suite", [](Shared& s) { return numerics(s); });
  return out;
}

std::string format(const CriterionResult& r) {
  std::string out = std::string(r.pass ? "PASS" : "FAIL") + " " + (r.id < 10 ? " " : "") +
                    std::to_string(r.id) + " " + r.name + ": " + r.measured + " (bound: " +
                    r.bound + ")";
  for (const auto& n : r.notes) out += "\n       note: " + n;
  return out;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

}  // namespace wecs::verify
