#include "wecs/sim.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wecs/aero.hpp"
#include "wecs/error.hpp"
#include "wecs/io/number.hpp"
#include "wecs/plant.hpp"

namespace wecs::sim {
namespace {

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

const char* kind_name(wind::Kind k) {
  switch (k) {
    case wind::Kind::constant: return "constant";
    case wind::Kind::smooth_sweep: return "smooth_sweep";
    case wind::Kind::step_ramp: return "step_ramp";
    case wind::Kind::von_karman: return "von_karman";
  }
  return "?";
}

PlantState trim_state(double wind, const TurbineParams& p) {
  const double v = std::clamp(wind, p.wind_min, p.wind_max);
  return equilibrium_state(wind, trim_pitch(v, p), p);
}

double sample_value(const Sample& s, const std::string& name) {
  if (name == "t") return s.t;
  if (name == "v") return s.wind;
  if (name == "twist") return s.x.twist;
  if (name == "rotor_speed") return s.x.rotor_speed;
  if (name == "generator_speed") return s.x.generator_speed;
  if (name == "pitch") return s.x.pitch;
  if (name == "pitch_rate") return s.pitch_rate;
  if (name == "generator_torque") return s.x.generator_torque;
  if (name == "pitch_ref") return s.command.pitch_ref;
  if (name == "torque_ref") return s.command.torque_ref;
  if (name == "power") return s.power;
  if (name == "flags") return s.flags;
  throw DomainError("unknown channel '" + name + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::open_loop: return "open";
    case ControllerKind::lpv: return "lpv";
    case ControllerKind::piflc: return "piflc";
  }
  return "?";
}

ControllerKind controller_from_string(const std::string& s) {
  if (s == "open") return ControllerKind::open_loop;
  if (s == "lpv") return ControllerKind::lpv;
  if (s == "piflc") return ControllerKind::piflc;
  throw DomainError("unknown controller '" + s + "' (expected open, lpv or piflc)");
}

double Scenario::duration() const { return wind_trace ? wind_trace->duration() : wind.duration; }

void Scenario::validate(const piflc::FuzzyConfig& fuzzy) const {
  if (!(dt > 0.0)) throw DomainError("scenario: dt must be > 0");
  if (log_every < 1) throw DomainError("scenario: log_every must be >= 1");
  if (wind_trace && std::abs(wind_trace->dt - dt) > 1e-12 * dt)
    throw DomainError("scenario: wind trace sample period differs from dt");
  if (!wind_trace && std::abs(wind.dt - dt) > 1e-12 * dt)
    throw DomainError("scenario: wind sample period differs from dt");
  if (!(window_start >= 0.0) || !(window_start < duration()))
    throw DomainError("scenario: metric window start must lie inside the run");
  if (controller == ControllerKind::piflc) {
    const double ratio = fuzzy.ts / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
      throw DomainError("scenario: dt must divide the fuzzy controller period");
  }
}

std::string Scenario::describe() const {
  std::ostringstream s;
  s << "name=" << name << ";controller=" << to_string(controller) << ";dt=" << io::format_double(dt)
    << ";window=" << io::format_double(window_start) << ";log_every=" << log_every;
  if (wind_trace) {
    s << ";wind=trace;samples=" << wind_trace->values.size() << ";hash="
      << hex64(fnv1a(wind_trace->to_csv()));
  } else {
    s << ";wind=" << kind_name(wind.kind) << ";duration=" << io::format_double(wind.duration)
      << ";seed=" << wind.seed << ";v0=" << io::format_double(wind.v0)
      << ";v1=" << io::format_double(wind.v1) << ";ramp=" << io::format_double(wind.ramp_time)
      << ";sigma=" << io::format_double(wind.sigma) << ";L=" << io::format_double(wind.length_scale)
      << ";noise=" << io::format_double(wind.noise_variance);
    if (wind.clamp)
      s << ";clamp=" << io::format_double(wind.clamp->first) << ","
        << io::format_double(wind.clamp->second);
  }
  if (initial) {
    const auto v = initial->to_vector();
    s << ";x0=";
    for (int i = 0; i < 5; ++i) s << io::format_double(v(i)) << (i < 4 ? "," : "");
  }
  if (open_loop_command)
    s << ";u0=" << io::format_double(open_loop_command->pitch_ref) << ","
      << io::format_double(open_loop_command->torque_ref);
  return s.str();
}

std::vector<std::string> preset_names() { return {"fig8", "fig9", "fig10", "steady"}; }

Scenario preset(const std::string& name, ControllerKind controller, std::uint64_t seed) {
  Scenario s;
  s.name = name;
  s.controller = controller;
  s.wind.seed = seed;
  if (name == "fig8") {
    s.wind.kind = wind::Kind::smooth_sweep;
    s.wind.v0 = 11.0;
    s.wind.v1 = 24.0;
    s.wind.ramp_time = 200.0;
    s.wind.duration = 300.0;
  } else if (name == "fig9") {
    s.wind.kind = wind::Kind::step_ramp;
    s.wind.duration = 100.0;
  } else if (name == "fig10") {
    s.wind.kind = wind::Kind::von_karman;
    s.wind.v0 = 17.5;
    s.wind.sigma = 2.0;
    s.wind.length_scale = 170.0;
    s.wind.duration = 300.0;
    s.wind.clamp = std::make_pair(11.0, 24.0);
  } else if (name == "steady") {
    s.wind.kind = wind::Kind::constant;
    s.wind.v0 = 17.5;
    s.wind.duration = 60.0;
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw DomainError("unknown scenario '" + name + "' (valid: " + valid + ")");
  }
  return s;
}

const std::vector<std::string>& SimRecord::channel_names() {
  static const std::vector<std::string> names = {
      "t",     "v",                "twist",     "rotor_speed", "generator_speed", "pitch",
      "pitch_rate", "generator_torque", "pitch_ref", "torque_ref",  "power",           "flags"};
  return names;
}

std::vector<double> SimRecord::channel(const std::string& name) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(sample_value(s, name));
  return out;
}

std::vector<double> SimRecord::times() const { return channel("t"); }

std::string SimRecord::to_csv() const {
  std::string out;
  for (const auto& [k, v] : metadata) out += "# " + k + " " + v + "\n";
  const auto& names = channel_names();
  for (size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
  out += '\n';
  for (const auto& s : samples) {
    for (size_t i = 0; i < names.size(); ++i) {
      if (i) out += ',';
      out += names[i] == "flags" ? std::to_string(s.flags) : io::format_double(sample_value(s, names[i]));
    }
    out += '\n';
  }
  return out;
}

void SimRecord::write_csv(const std::filesystem::path& path) const { write_text(path, to_csv()); }

SimRecord run(const Scenario& sc, const RunContext& ctx) {
  const TurbineParams& p = ctx.params;
  p.validate();
  sc.validate(ctx.fuzzy);
  if (sc.controller == ControllerKind::lpv && ctx.lpv == nullptr)
    throw DomainError("run: LPV controller requested but none supplied");

  const wind::WindSeries wind = sc.wind_trace ? *sc.wind_trace : sc.wind.generate();
  const size_t steps = wind.values.size();
  const double dt = sc.dt;

  PlantState x = sc.initial ? *sc.initial : trim_state(wind.values.front(), p);
  const ControlCommand rated = equilibrium_command(p.wind_min, p.pitch_min, p);
  const ControlCommand open_cmd = sc.open_loop_command ? *sc.open_loop_command
                                                       : ControlCommand{p.pitch_min, rated.torque_ref};
  const double speed_ref = p.gearbox_ratio * p.rated_rotor_speed;

  std::optional<lpv::ControllerState> lpv_state;
  std::optional<lpv::SchedulingFilter> filter;
  if (sc.controller == ControllerKind::lpv) {
    lpv_state.emplace(*ctx.lpv);
    filter.emplace(ctx.lpv->scheduling_time_constant(), ctx.lpv->vmin(), ctx.lpv->vmax());
    filter->reset(wind.values.front());
  }
  piflc::PiflcState fuzzy_state;
  fuzzy_state.output = x.pitch;
  const long long fuzzy_every =
      std::max<long long>(1, std::llround(ctx.fuzzy.ts / dt));
  ControlCommand cmd{x.pitch, rated.torque_ref};

  SimRecord rec;
  rec.metadata["scenario"] = sc.name;
  rec.metadata["controller"] = to_string(sc.controller);
  rec.metadata["seed"] = sc.wind_trace ? std::string("trace") : std::to_string(sc.wind.seed);
  rec.metadata["dt"] = io::format_double(dt);
  rec.metadata["scenario_hash"] = hex64(fnv1a(sc.describe() + "\n" + p.to_text()));
  rec.metadata["version"] = kVersion;
  rec.samples.reserve(steps / sc.log_every + 1);
  rec.audit.min_pitch = rec.audit.max_pitch = x.pitch;

  unsigned pending_flags = 0;
  for (size_t k = 0; k < steps; ++k) {
    const double v = wind.values[k];
    switch (sc.controller) {
      case ControllerKind::open_loop: cmd = open_cmd; break;
      case ControllerKind::lpv: {
        const double vs = filter->update(v, dt);
        const auto [wg_ref, tg_ref] = lpv::output_reference(*ctx.lpv, vs, p);
        cmd = lpv::controller_step(*ctx.lpv, *lpv_state, wg_ref - x.generator_speed,
                                   tg_ref - x.generator_torque, vs, dt, p);
        break;
      }
      case ControllerKind::piflc:
        if (static_cast<long long>(k) % fuzzy_every == 0)
          piflc::piflc_step(fuzzy_state, x.generator_speed, speed_ref, ctx.fuzzy, p);
        cmd = ControlCommand{fuzzy_state.output, rated.torque_ref};
        break;
    }
    cmd = cmd.saturated(p);

    const double pitch_before = x.pitch;
    try {
      x = step(x, cmd, v, dt, p);
    } catch (const Error& e) {
      throw NumericError("run: " + std::string(e.what()) + " at t = " +
                         io::format_double((k + 1) * dt) + " s");
    }
    const double rate = (x.pitch - pitch_before) / dt;
    unsigned flags = 0;
    if (x.pitch < p.pitch_min) flags |= kPitchBelowMin;
    if (x.pitch > p.pitch_max) flags |= kPitchAboveMax;
    if (std::abs(rate) > p.pitch_rate_limit + 1e-9) flags |= kPitchRateExceeded;
    if (flags & (kPitchBelowMin | kPitchAboveMax)) ++rec.audit.pitch_range_violations;
    if (flags & kPitchRateExceeded) ++rec.audit.pitch_rate_violations;
    rec.audit.max_abs_pitch_rate = std::max(rec.audit.max_abs_pitch_rate, std::abs(rate));
    rec.audit.min_pitch = std::min(rec.audit.min_pitch, x.pitch);
    rec.audit.max_pitch = std::max(rec.audit.max_pitch, x.pitch);
    pending_flags |= flags;

    if ((k + 1) % sc.log_every == 0) {
      Sample s;
      s.t = static_cast<double>(k + 1) * dt;
      s.wind = v;
      s.x = x;
      s.pitch_rate = rate;
      s.command = cmd;
      s.power = x.generator_torque * x.generator_speed;
      s.flags = pending_flags;
      pending_flags = 0;
      rec.samples.push_back(s);
    }
  }
  return rec;
}

ChannelStats channel_stats(const std::vector<double>& x) {
  if (x.empty()) throw DomainError("channel_stats: empty series");
  ChannelStats s;
  // Accumulate about the first sample; exact for constant series.
  const double ref = x.front();
  double sum = 0.0;
  for (double v : x) sum += v - ref;
  s.mean = ref + sum / static_cast<double>(x.size());
  double ss = 0.0, peak = 0.0;
  s.min = s.max = x.front();
  for (double v : x) {
    ss += (v - s.mean) * (v - s.mean);
    peak = std::max(peak, std::abs(v - s.mean));
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.variance = ss / static_cast<double>(x.size());
  s.peak_fluctuation_pct = s.mean != 0.0 ? 100.0 * peak / std::abs(s.mean) : 0.0;
  return s;
}

MetricReport metrics(const SimRecord& rec, double window_start) {
  MetricReport m;
  m.window_start = window_start;
  m.audit = rec.audit;
  size_t first = 0;
  while (first < rec.samples.size() && rec.samples[first].t < window_start) ++first;
  if (first >= rec.samples.size()) throw DomainError("metrics: metric window is empty");
  m.window_samples = static_cast<long long>(rec.samples.size() - first);
  for (const auto& name : SimRecord::channel_names()) {
    if (name == "t" || name == "flags") continue;
    std::vector<double> x;
    x.reserve(rec.samples.size() - first);
    for (size_t i = first; i < rec.samples.size(); ++i) x.push_back(sample_value(rec.samples[i], name));
    m.channels[name] = channel_stats(x);
  }
  const double twist_mean = m.channels["twist"].mean;
  for (size_t i = first; i < rec.samples.size(); ++i)
    m.twist_amplitude = std::max(m.twist_amplitude, std::abs(rec.samples[i].x.twist - twist_mean));
  return m;
}

std::string MetricReport::to_text() const {
  std::string out;
  const auto line = [&](const std::string& k, double v) { out += k + " = " + io::format_double(v) + "\n"; };
  line("window_start", window_start);
  out += "window_samples = " + std::to_string(window_samples) + "\n";
  for (const auto& [name, s] : channels) {
    line(name + ".mean", s.mean);
    line(name + ".variance", s.variance);
    line(name + ".min", s.min);
    line(name + ".max", s.max);
    line(name + ".peak_fluctuation_pct", s.peak_fluctuation_pct);
  }
  line("twist_amplitude", twist_amplitude);
  out += "pitch_range_violations = " + std::to_string(audit.pitch_range_violations) + "\n";
  out += "pitch_rate_violations = " + std::to_string(audit.pitch_rate_violations) + "\n";
  line("max_abs_pitch_rate", audit.max_abs_pitch_rate);
  line("min_pitch", audit.min_pitch);
  line("max_pitch", audit.max_pitch);
  return out;
}

Comparison compare(const SimRecord& lpv, const SimRecord& piflc, double window_start) {
  const auto get = [](const SimRecord& r, const char* k) {
    auto it = r.metadata.find(k);
    return it == r.metadata.end() ? std::string() : it->second;
  };
  if (get(lpv, "scenario") != get(piflc, "scenario") || get(lpv, "seed") != get(piflc, "seed") ||
      get(lpv, "dt") != get(piflc, "dt"))
    throw DomainError("compare: records come from different scenarios or seeds");
  Comparison c;
  c.lpv = metrics(lpv, window_start);
  c.piflc = metrics(piflc, window_start);
  const auto ratio = [](double a, double b) {
    return b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
  };
  c.speed_fluctuation_ratio = ratio(c.piflc.channels.at("generator_speed").peak_fluctuation_pct,
                                    c.lpv.channels.at("generator_speed").peak_fluctuation_pct);
  c.power_fluctuation_ratio = ratio(c.piflc.channels.at("power").peak_fluctuation_pct,
                                    c.lpv.channels.at("power").peak_fluctuation_pct);
  c.twist_variance_ratio =
      ratio(c.piflc.channels.at("twist").variance, c.lpv.channels.at("twist").variance);
  return c;
}

std::string Comparison::to_text() const {
  std::string out;
  const auto row = [&](const std::string& k, double a, double b) {
    out += k + ".lpv = " + io::format_double(a) + "\n" + k + ".piflc = " + io::format_double(b) + "\n";
  };
  const auto& l = lpv.channels;
  const auto& f = piflc.channels;
  row("generator_speed.peak_fluctuation_pct", l.at("generator_speed").peak_fluctuation_pct,
      f.at("generator_speed").peak_fluctuation_pct);
  row("power.peak_fluctuation_pct", l.at("power").peak_fluctuation_pct,
      f.at("power").peak_fluctuation_pct);
  row("twist.variance", l.at("twist").variance, f.at("twist").variance);
  row("twist_amplitude", lpv.twist_amplitude, piflc.twist_amplitude);
  out += "ratio.generator_speed_fluctuation = " + io::format_double(speed_fluctuation_ratio) + "\n";
  out += "ratio.power_fluctuation = " + io::format_double(power_fluctuation_ratio) + "\n";
  out += "ratio.twist_variance = " + io::format_double(twist_variance_ratio) + "\n";
  return out;
}

std::vector<std::array<double, 3>> step_traces(const LinearModel& model, double wind,
                                              double step_size, double duration, double dt,
                                              const TurbineParams& p) {
  const double pitch = trim_pitch(std::clamp(wind, p.wind_min, p.wind_max), p);
  const PlantState x0 = equilibrium_state(wind, pitch, p);
  const ControlCommand u0 = equilibrium_command(wind, pitch, p);
  const auto [ad, bd] = control::discretize_zoh(model.A, model.B1, dt);
  control::Vector xl = control::Vector::Zero(5);
  PlantState x = x0;
  std::vector<std::array<double, 3>> out;
  const auto n = static_cast<long long>(std::llround(duration / dt));
  out.reserve(n + 1);
  out.push_back({0.0, 0.0, 0.0});
  for (long long k = 0; k < n; ++k) {
    x = step(x, u0, wind + step_size, dt, p);
    xl = ad * xl + bd * step_size;
    out.push_back({(k + 1) * dt, xl(2), x.generator_speed - x0.generator_speed});
  }
  return out;
}

StepComparison step_comparison(const LinearModel& model, double wind, double step_size,
                               const TurbineParams& p) {
  StepComparison c;
  c.wind = wind;
  // static gain −C A⁻¹ B1 on the ωg row
  const control::Vector dx = -model.A.fullPivLu().solve(model.B1 * step_size);
  c.linear = dx(2);

  const double pitch = trim_pitch(std::clamp(wind, p.wind_min, p.wind_max), p);
  const PlantState x0 = equilibrium_state(wind, pitch, p);
  const ControlCommand u0 = equilibrium_command(wind, pitch, p);
  PlantState x = x0;
  const double dt = 1e-3;
  double previous = x.generator_speed;
  for (int second = 1; second <= 3000; ++second) {
    for (int k = 0; k < 1000; ++k) x = step(x, u0, wind + step_size, dt, p);
    const double change = std::abs(x.generator_speed - previous);
    previous = x.generator_speed;
    if (second >= 20 && change < 1e-10 * x0.generator_speed) break;
  }
  c.nonlinear = x.generator_speed - x0.generator_speed;
  c.discrepancy = std::abs(c.nonlinear - c.linear) / std::abs(c.linear);
  return c;
}

}  // namespace wecs::sim
