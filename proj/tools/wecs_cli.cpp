// Command-line front end: linearize, synthesize, simulate, verify.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "wecs/aero.hpp"
#include "wecs/control/hinf.hpp"
#include "wecs/error.hpp"
#include "wecs/io/keyvalue.hpp"
#include "wecs/io/labeled_matrix.hpp"
#include "wecs/io/number.hpp"
#include "wecs/io/svg_plot.hpp"
#include "wecs/linearize.hpp"
#include "wecs/lpv.hpp"
#include "wecs/piflc.hpp"
#include "wecs/sim.hpp"
#include "wecs/verify.hpp"

namespace fs = std::filesystem;
using namespace wecs;

namespace {

struct Config {
  std::string params_path;
  std::string out_dir = "out";
  std::string scenario = "fig9";
  std::string controller = "lpv";
  std::string controller_file;
  std::string wind_csv;
  std::string pitch_policy = "paired";
  std::uint64_t seed = 1;
  bool plots = false;
  double gamma_min = 1e-3;
  double gamma_max = 1e6;
};

struct Loaded {
  TurbineParams params;
  piflc::FuzzyConfig fuzzy;
};

Loaded load(const Config& c) {
  Loaded l;
  if (!c.params_path.empty()) {
    if (!fs::exists(c.params_path)) throw Error("parameter file not found: " + c.params_path);
    const auto kv = io::KeyValueFile::load(c.params_path);
    l.params = TurbineParams::from_keyvalues(kv);
    l.fuzzy = piflc::FuzzyConfig::from_keyvalues(kv);
  }
  l.params.validate();
  return l;
}

fs::path out_dir(const Config& c) {
  fs::create_directories(c.out_dir);
  return c.out_dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

VertexPitchPolicy policy(const std::string& s) {
  if (s == "paired") return VertexPitchPolicy::paired_bounds;
  if (s == "trim") return VertexPitchPolicy::computed_trim;
  throw DomainError("unknown pitch policy '" + s + "' (expected paired or trim)");
}

lpv::LpvOptions lpv_options(const Config& c) {
  lpv::LpvOptions o;
  o.synthesis.gamma_min = c.gamma_min;
  o.synthesis.gamma_max = c.gamma_max;
  o.pitch_policy = policy(c.pitch_policy);
  return o;
}

int cmd_linearize(const Config& c) {
  const Loaded l = load(c);
  const fs::path dir = out_dir(c);
  struct Ref {
    const char* name;
    double wind;
    double k[3];
  };
  const Ref refs[2] = {{"vmin", l.params.wind_min, {-6.91e3, 1.229e4, -2.251e3}},
                       {"vmax", l.params.wind_max, {-6.57e4, 1.618e4, -2.786e4}}};
  std::string report = "# linearization coefficients; Kb per degree\n";
  int status = 0;
  for (const auto& ref : refs) {
    const OperatingPoint op = vertex_operating_point(ref.wind, policy(c.pitch_policy), l.params);
    const double residual = op.equilibrium_residual(l.params);
    const LinearModel m = build_linear_model(op, l.params);
    io::LabeledMatrices out;
    out.set_meta("wind", op.wind);
    out.set_meta("pitch", op.pitch);
    out.set_meta("rotor_speed", op.rotor_speed);
    out.set_meta("twist", op.twist);
    out.set_meta("generator_torque", op.generator_torque);
    out.set_meta("equilibrium_residual", residual);
    out.add("A", m.A);
    out.add("B1", m.B1);
    out.add("B2", m.B2);
    out.add("C", m.C);
    out.save(dir / (std::string("linear_") + ref.name + ".txt"));

    const double got[3] = {m.coefficients.k_omega, m.coefficients.k_wind, m.coefficients.k_pitch};
    const char* names[3] = {"k_omega", "k_wind", "k_pitch"};
    report += std::string(ref.name) + ".wind = " + io::format_double(op.wind) + "\n";
    report += std::string(ref.name) + ".pitch = " + io::format_double(op.pitch) + "\n";
    report += std::string(ref.name) + ".equilibrium_residual = " + io::format_double(residual) + "\n";
    for (int i = 0; i < 3; ++i) {
      const std::string key = std::string(ref.name) + "." + names[i];
      report += key + " = " + io::format_double(got[i]) + "\n";
      report += key + ".sign = " + (got[i] < 0 ? "negative" : "positive") + "\n";
      report += key + ".reference = " + io::format_double(ref.k[i]) + "\n";
      report += key + ".deviation_pct = " +
                io::format_double(100.0 * std::abs(got[i] - ref.k[i]) / std::abs(ref.k[i])) + "\n";
    }
    if (!(residual <= 1e-6)) {
      std::cerr << "error: operating point at " << op.wind
                << " m/s is not an equilibrium (residual " << residual << ")\n";
      status = 1;
    }
  }
  write_text(dir / "coefficients.txt", report);
  std::cout << report;
  return status;
}

int cmd_synthesize(const Config& c) {
  const Loaded l = load(c);
  lpv::LpvSynthesis syn;
  try {
    syn = lpv::synthesize_lpv(l.params, lpv::WeightingSet::defaults(), lpv_options(c));
  } catch (const control::InfeasibleError& e) {
    std::cerr << "error: synthesis infeasible: " << e.what()
              << "\nfailed condition: " << control::to_string(e.condition()) << "\n";
    return 3;
  }
  const fs::path dir = out_dir(c);
  syn.controller.save(dir / "controller.txt");
  std::string report;
  const char* names[2] = {"vmax", "vmin"};
  for (int i = 0; i < 2; ++i) {
    const auto& v = syn.vertices[i];
    const std::string n = names[i];
    report += n + ".wind = " + io::format_double(v.op.wind) + "\n";
    report += n + ".pitch = " + io::format_double(v.op.pitch) + "\n";
    report += n + ".gamma = " + io::format_double(v.result.gamma_achieved) + "\n";
    report += n + ".gamma_boundary = " + io::format_double(v.result.gamma_boundary) + "\n";
    report += n + ".riccati_residual_x = " + io::format_double(v.result.riccati_residuals.first) + "\n";
    report += n + ".riccati_residual_y = " + io::format_double(v.result.riccati_residuals.second) + "\n";
    report += n + ".regularization = " + io::format_double(v.result.regularization) + "\n";
    report += n + ".controller_order = " + std::to_string(v.result.controller.states()) + "\n";
  }
  write_text(dir / "gamma.txt", report);
  std::cout << report;
  return 0;
}

lpv::LpvController obtain_controller(const Config& c, const Loaded& l) {
  if (!c.controller_file.empty()) return lpv::LpvController::load(c.controller_file);
  return lpv::synthesize_lpv(l.params, lpv::WeightingSet::defaults(), lpv_options(c)).controller;
}

void plot_records(const fs::path& path, const std::vector<const sim::SimRecord*>& recs) {
  struct Channel {
    const char* name;
    const char* title;
    const char* unit;
  };
  const Channel channels[] = {{"v", "wind speed", "m/s"},
                              {"generator_speed", "generator speed", "rad/s"},
                              {"pitch", "pitch angle", "deg"},
                              {"generator_torque", "generator torque", "N m"},
                              {"power", "generator power", "W"},
                              {"twist", "shaft twist", "rad"}};
  std::vector<io::PlotPanel> panels;
  for (const auto& ch : channels) {
    io::PlotPanel panel{ch.title, ch.unit, {}};
    for (const auto* r : recs)
      panel.series.push_back({r->metadata.at("controller"), r->times(), r->channel(ch.name)});
    panels.push_back(std::move(panel));
  }
  io::write_svg(path, panels, "time (s)");
}

int cmd_fig7(const Config& c, const Loaded& l, const fs::path& dir) {
  const auto& p = l.params;
  std::string csv = "# linear vs nonlinear generator-speed response to a +0.5 m/s wind step\n";
  csv += "vertex,wind,t,linear,nonlinear\n";
  std::string report;
  std::vector<io::PlotPanel> panels;
  for (const auto& [name, vwind, winds] :
       {std::tuple<const char*, double, std::vector<double>>{
            "vmax", p.wind_max, {p.wind_max, p.wind_max - 1, p.wind_max - 2, p.wind_max - 3}},
        std::tuple<const char*, double, std::vector<double>>{
            "vmin", p.wind_min, {p.wind_min, p.wind_min + 1, p.wind_min + 2, p.wind_min + 3}}}) {
    const OperatingPoint op = vertex_operating_point(vwind, policy(c.pitch_policy), p);
    const LinearModel m = build_linear_model(op, p);
    io::PlotPanel panel{std::string("vertex ") + name, "delta wg (rad/s)", {}};
    for (double w : winds) {
      const auto tr = sim::step_traces(m, w, 0.5, 60.0, 1e-3, p);
      io::PlotSeries lin{"linear", {}, {}}, nl{"nonlinear " + io::format_double(w) + " m/s", {}, {}};
      for (size_t k = 0; k < tr.size(); k += 10) {
        csv += std::string(name) + "," + io::format_double(w) + "," + io::format_double(tr[k][0]) +
               "," + io::format_double(tr[k][1]) + "," + io::format_double(tr[k][2]) + "\n";
        lin.x.push_back(tr[k][0]);
        lin.y.push_back(tr[k][1]);
        nl.x.push_back(tr[k][0]);
        nl.y.push_back(tr[k][2]);
      }
      if (w == vwind) panel.series.push_back(lin);
      panel.series.push_back(nl);
      const auto sc = sim::step_comparison(m, w, 0.5, p);
      const std::string key = std::string(name) + "." + io::format_double(w);
      report += key + ".linear = " + io::format_double(sc.linear) + "\n";
      report += key + ".nonlinear = " + io::format_double(sc.nonlinear) + "\n";
      report += key + ".discrepancy_pct = " + io::format_double(100 * sc.discrepancy) + "\n";
    }
    panels.push_back(std::move(panel));
  }
  write_text(dir / "fig7.csv", csv);
  write_text(dir / "fig7_report.txt", report);
  if (c.plots) io::write_svg(dir / "fig7.svg", panels, "time (s)");
  std::cout << report;
  return 0;
}

int cmd_simulate(const Config& c) {
  const Loaded l = load(c);
  const fs::path dir = out_dir(c);
  if (c.scenario == "fig7") return cmd_fig7(c, l, dir);

  std::vector<sim::ControllerKind> kinds;
  if (c.controller == "both")
    kinds = {sim::ControllerKind::lpv, sim::ControllerKind::piflc};
  else
    kinds = {sim::controller_from_string(c.controller)};

  std::optional<lpv::LpvController> ctrl;
  for (auto k : kinds)
    if (k == sim::ControllerKind::lpv && !ctrl) ctrl = obtain_controller(c, l);

  std::vector<sim::SimRecord> recs;
  for (auto k : kinds) {
    sim::Scenario sc = sim::preset(c.scenario, k, c.seed);
    if (!c.wind_csv.empty()) {
      sc.wind_trace = wind::WindSeries::read_csv(c.wind_csv);
      sc.dt = sc.wind_trace->dt;
    }
    const sim::RunContext ctx{l.params, ctrl ? &*ctrl : nullptr, l.fuzzy};
    recs.push_back(sim::run(sc, ctx));
    const std::string stem = c.scenario + "_" + sim::to_string(k);
    recs.back().write_csv(dir / (stem + ".csv"));
    const auto m = sim::metrics(recs.back(), sc.window_start);
    write_text(dir / (stem + "_metrics.txt"), m.to_text());
    std::cout << stem << ": wg peak fluctuation "
              << m.channels.at("generator_speed").peak_fluctuation_pct << "%, power mean "
              << m.channels.at("power").mean << " W, pitch violations "
              << m.audit.pitch_range_violations + m.audit.pitch_rate_violations << "\n";
  }
  if (recs.size() == 2) {
    const auto cmp = sim::compare(recs[0], recs[1], 10.0);
    write_text(dir / (c.scenario + "_comparison.txt"), cmp.to_text());
    std::cout << cmp.to_text();
  }
  if (c.plots) {
    std::vector<const sim::SimRecord*> ptrs;
    for (const auto& r : recs) ptrs.push_back(&r);
    plot_records(dir / (c.scenario + (c.controller == "both" ? "_both" : "_" + c.controller) + ".svg"),
                 ptrs);
  }
  return 0;
}

int cmd_verify(const Config& c) {
  const Loaded l = load(c);
  verify::VerifyOptions opts;
  opts.params = l.params;
  opts.fuzzy = l.fuzzy;
  const auto results = verify::run_all(opts);
  for (const auto& r : results) std::cout << verify::format(r) << "\n";
  const bool ok = verify::all_passed(results);
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wind turbine LPV / fuzzy pitch control workbench"};
  app.require_subcommand(1);
  Config cfg;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--params", cfg.params_path, "turbine parameter file (key = value)");
    sub->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  };
  const auto synthesis_opts = [&](CLI::App* sub) {
    sub->add_option("--gamma-min", cfg.gamma_min, "lower end of the gamma search")->capture_default_str();
    sub->add_option("--gamma-max", cfg.gamma_max, "upper end of the gamma search")->capture_default_str();
    sub->add_option("--pitch-policy", cfg.pitch_policy, "vertex pitch: paired or trim")
        ->check(CLI::IsMember({"paired", "trim"}))
        ->capture_default_str();
  };

  auto* lin = app.add_subcommand("linearize", "linearize at both vertices");
  common(lin);
  lin->add_option("--pitch-policy", cfg.pitch_policy, "vertex pitch: paired or trim")
      ->check(CLI::IsMember({"paired", "trim"}));

  auto* syn = app.add_subcommand("synthesize", "synthesize the vertex controllers");
  common(syn);
  synthesis_opts(syn);

  auto* simc = app.add_subcommand("simulate", "run a scenario");
  common(simc);
  synthesis_opts(simc);
  std::vector<std::string> scenarios = sim::preset_names();
  scenarios.insert(scenarios.begin(), "fig7");
  simc->add_option("--scenario", cfg.scenario, "fig7, fig8, fig9, fig10 or steady")
      ->check(CLI::IsMember(scenarios))
      ->capture_default_str();
  simc->add_option("--controller", cfg.controller, "lpv, piflc, open or both")
      ->check(CLI::IsMember({"lpv", "piflc", "open", "both"}))
      ->capture_default_str();
  simc->add_option("--seed", cfg.seed, "noise seed")->capture_default_str();
  simc->add_option("--controller-file", cfg.controller_file, "load a synthesized controller")
      ->check(CLI::ExistingFile);
  simc->add_option("--wind-csv", cfg.wind_csv, "drive the run with a t,v trace")
      ->check(CLI::ExistingFile);
  simc->add_flag("--plots", cfg.plots, "also write SVG plots");

  auto* ver = app.add_subcommand("verify", "run the acceptance battery");
  common(ver);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*lin) return cmd_linearize(cfg);
    if (*syn) return cmd_synthesize(cfg);
    if (*simc) return cmd_simulate(cfg);
    if (*ver) return cmd_verify(cfg);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
