#include "wecs/wind.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "wecs/error.hpp"
#include "wecs/io/number.hpp"

namespace wecs::wind {
namespace {

size_t sample_count(double duration, double dt) {
  if (!(dt > 0.0)) throw DomainError("wind: dt must be > 0");
  if (!(duration > 0.0)) throw DomainError("wind: duration must be > 0");
  return static_cast<size_t>(std::llround(duration / dt));
}

}  // namespace

double WindSeries::at(double t) const {
  if (values.empty()) throw DomainError("WindSeries: empty");
  const double k = std::floor(t / dt + 1e-9);
  const size_t i = k <= 0.0 ? 0 : std::min(values.size() - 1, static_cast<size_t>(k));
  return values[i];
}

void WindSeries::clamp(double lo, double hi) {
  for (double& v : values) v = std::clamp(v, lo, hi);
}

std::string WindSeries::to_csv() const {
  std::string out = "t,v\n";
  for (size_t k = 0; k < values.size(); ++k)
    out += io::format_double(time(k)) + "," + io::format_double(values[k]) + "\n";
  return out;
}

void WindSeries::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_csv();
}

WindSeries WindSeries::parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<double> t, v;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(source, lineno, "expected 't,v'");
    double a = 0.0, b = 0.0;
    const bool ok = io::parse_double(std::string_view(line).substr(0, comma), a) &&
                    io::parse_double(std::string_view(line).substr(comma + 1), b);
    if (!ok) {
      if (t.empty() && v.empty() && lineno == 1) continue;  // header
      throw ParseError(source, lineno, "bad number");
    }
    if (!std::isfinite(a) || !std::isfinite(b)) throw ParseError(source, lineno, "non-finite value");
    t.push_back(a);
    v.push_back(b);
  }
  if (t.size() < 2) throw ParseError(source, 0, "need at least two samples");
  WindSeries out;
  out.dt = t[1] - t[0];
  if (!(out.dt > 0.0)) throw ParseError(source, 0, "time must increase");
  for (size_t k = 0; k < t.size(); ++k)
    if (std::abs(t[k] - t[0] - k * out.dt) > 1e-6 * out.dt * std::max<size_t>(1, k))
      throw ParseError(source, 0, "non-uniform time spacing at sample " + std::to_string(k));
  out.values = std::move(v);
  return out;
}

WindSeries WindSeries::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

WindSeries constant(double v, double duration, double dt) {
  return {dt, std::vector<double>(sample_count(duration, dt), v)};
}

WindSeries smooth_sweep(double v0, double v1, double ramp_time, double duration, double dt) {
  if (!(ramp_time > 0.0)) throw DomainError("smooth_sweep: ramp time must be > 0");
  WindSeries out{dt, std::vector<double>(sample_count(duration, dt))};
  for (size_t k = 0; k < out.values.size(); ++k) {
    const double s = std::min(1.0, out.time(k) / ramp_time);
    out.values[k] = s >= 1.0 ? v1 : v0 + (v1 - v0) * 0.5 * (1.0 - std::cos(std::numbers::pi * s));
  }
  return out;
}

double step_ramp_mean(double t) {
  if (t <= 25.0) return 24.0;
  if (t <= 35.0) return 24.0 + kStepRampSlope * (t - 25.0);
  if (t <= 60.0) return 17.5;
  if (t <= 70.0) return 17.5 + kStepRampSlope * (t - 60.0);
  return 11.0;
}

WindSeries step_ramp_profile(double duration, std::uint64_t seed, double dt,
                             double noise_variance) {
  if (!(noise_variance >= 0.0)) throw DomainError("step_ramp_profile: negative variance");
  WindSeries out{dt, std::vector<double>(sample_count(duration, dt))};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(noise_variance));
  for (size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = step_ramp_mean(out.time(k)) + noise(rng);
  return out;
}

control::TransferFunction von_karman_filter(double mean_speed, double sigma, double length) {
  if (!(mean_speed > 0.0) || !(sigma > 0.0) || !(length > 0.0))
    throw DomainError("von_karman_filter: V, sigma and L must be > 0");
  const double tau = length / mean_speed;
  const double gain = sigma * std::sqrt(2.0 * length / (std::numbers::pi * mean_speed));
  return {{gain * 0.25 * tau, gain}, {0.1987 * tau * tau, 1.357 * tau, 1.0}};
}

WindSeries von_karman_raw(double mean_speed, double sigma, double length, double duration,
                          std::uint64_t seed, double dt) {
  const control::StateSpace f = von_karman_filter(mean_speed, sigma, length).to_state_space();
  const auto [ad, bd] = control::discretize_zoh(f.A, f.B, dt);
  WindSeries out{dt, std::vector<double>(sample_count(duration, dt))};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(std::numbers::pi / dt));
  control::Vector x = control::Vector::Zero(f.states());
  for (double& v : out.values) {
    const double w = noise(rng);
    v = mean_speed + (f.C * x)(0) + f.D(0, 0) * w;
    x = ad * x + bd * w;
  }
  return out;
}

WindSeries von_karman_profile(double mean_speed, double sigma, double length, double duration,
                              std::uint64_t seed, double dt, double lo, double hi) {
  WindSeries out = von_karman_raw(mean_speed, sigma, length, duration, seed, dt);
  out.clamp(lo, hi);
  return out;
}

WindSeries WindProfile::generate() const {
  WindSeries out;
  switch (kind) {
    case Kind::constant: out = constant(v0, duration, dt); break;
    case Kind::smooth_sweep:
      out = smooth_sweep(v0, v1, ramp_time > 0.0 ? ramp_time : duration, duration, dt);
      break;
    case Kind::step_ramp: out = step_ramp_profile(duration, seed, dt, noise_variance); break;
    case Kind::von_karman:
      out = von_karman_raw(v0, sigma, length_scale, duration, seed, dt);
      break;
  }
  if (clamp) out.clamp(clamp->first, clamp->second);
  return out;
}

}  // namespace wecs::wind
