#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wecs/control/state_space.hpp"

namespace wecs::wind {

/// Uniformly sampled wind speed; sample k holds on [k dt, (k+1) dt).
struct WindSeries {
  double dt = 1e-3;
  std::vector<double> values;

  double duration() const { return dt * static_cast<double>(values.size()); }
  double time(size_t k) const { return dt * static_cast<double>(k); }
  /// Sample holding at time t (clamped to the record).
  double at(double t) const;
  void clamp(double lo, double hi);

  void write_csv(const std::filesystem::path& path) const;
  std::string to_csv() const;
  /// Two columns `t,v` with a header line; spacing must be uniform.
  static WindSeries read_csv(const std::filesystem::path& path);
  static WindSeries parse_csv(const std::string& text, const std::string& source = "<string>");
};

enum class Kind { constant, smooth_sweep, step_ramp, von_karman };

struct WindProfile {
  Kind kind = Kind::constant;
  double duration = 100.0;  // s
  double dt = 1e-3;         // s
  std::uint64_t seed = 1;
  /// constant: speed; smooth_sweep: start; von_karman: mean.
  double v0 = 17.5;
  /// smooth_sweep end speed.
  double v1 = 24.0;
  /// smooth_sweep ramp length; the end speed is held afterwards.
  double ramp_time = 0.0;
  double sigma = 2.0;          // von_karman
  double length_scale = 170.0; // von_karman, m
  double noise_variance = 0.0102;  // step_ramp, per sample
  std::optional<std::pair<double, double>> clamp;

  WindSeries generate() const;
};

WindSeries constant(double v, double duration, double dt = 1e-3);

/// Half-cosine ramp v0 → v1 over `ramp_time`, then v1 held until `duration`.
WindSeries smooth_sweep(double v0, double v1, double ramp_time, double duration,
                        double dt = 1e-3);

/// Noise-free step-ramp script: 24 m/s to 25 s, down to 17.5 m/s at 35 s,
/// held to 60 s, down to 11 m/s at 70 s, held.
double step_ramp_mean(double t);
/// Ramp slope of the script, m/s².
constexpr double kStepRampSlope = -0.65;

/// step_ramp_mean plus Gaussian white noise of the given per-sample variance.
WindSeries step_ramp_profile(double duration, std::uint64_t seed, double dt = 1e-3,
                             double noise_variance = 0.0102);

/// Shaping filter σ√(2L/(πV)) (1 + 0.25τs)/(1 + 1.357τs + 0.1987τ²s²), τ = L/V.
control::TransferFunction von_karman_filter(double mean_speed, double sigma, double length);

/// Mean plus filtered white noise (ZOH-discretized filter driven by
/// discrete noise of variance π/dt). No clamping.
WindSeries von_karman_raw(double mean_speed, double sigma, double length, double duration,
                          std::uint64_t seed, double dt = 1e-3);

/// von_karman_raw clamped to [lo, hi].
WindSeries von_karman_profile(double mean_speed, double sigma, double length, double duration,
                              std::uint64_t seed, double dt = 1e-3, double lo = 11.0,
                              double hi = 24.0);

}  // namespace wecs::wind
