#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wecs/linearize.hpp"
#include "wecs/lpv.hpp"
#include "wecs/params.hpp"
#include "wecs/piflc.hpp"
#include "wecs/wind.hpp"

namespace wecs::sim {

inline constexpr const char* kVersion = "0.1.0";

enum class ControllerKind { open_loop, lpv, piflc };

std::string to_string(ControllerKind k);
/// Accepts "open", "lpv", "piflc". Throws DomainError otherwise.
ControllerKind controller_from_string(const std::string& s);

struct Scenario {
  std::string name = "custom";
  wind::WindProfile wind;
  /// Replaces `wind` when set (e.g. a trace read from CSV).
  std::optional<wind::WindSeries> wind_trace;
  ControllerKind controller = ControllerKind::open_loop;
  /// Defaults to the trim equilibrium at the first wind sample.
  std::optional<PlantState> initial;
  /// Open-loop command; defaults to zero pitch and rated torque.
  std::optional<ControlCommand> open_loop_command;
  double dt = 1e-3;
  double window_start = 10.0;
  /// Store every n-th integration step.
  int log_every = 10;

  double duration() const;
  /// Throws DomainError on an inconsistent configuration.
  void validate(const piflc::FuzzyConfig& fuzzy) const;
  /// Stable text description used for the record hash.
  std::string describe() const;
};

/// fig8 (open-loop sweep 11→24 m/s), fig9 (step-ramp with noise), fig10
/// (Von Karman turbulence), steady (constant 17.5 m/s).
Scenario preset(const std::string& name, ControllerKind controller, std::uint64_t seed);
std::vector<std::string> preset_names();

enum SampleFlag : unsigned {
  kPitchBelowMin = 1u << 0,
  kPitchAboveMax = 1u << 1,
  kPitchRateExceeded = 1u << 2,
};

struct Sample {
  double t = 0.0, wind = 0.0;
  PlantState x;
  double pitch_rate = 0.0;  // deg/s, realized over the last step
  ControlCommand command;
  double power = 0.0;  // Tg ωg
  unsigned flags = 0;
};

struct ConstraintAudit {
  long long pitch_range_violations = 0;
  long long pitch_rate_violations = 0;
  double max_abs_pitch_rate = 0.0;
  double min_pitch = 0.0, max_pitch = 0.0;
};

struct SimRecord {
  std::map<std::string, std::string> metadata;
  std::vector<Sample> samples;
  ConstraintAudit audit;

  static const std::vector<std::string>& channel_names();
  std::vector<double> channel(const std::string& name) const;
  std::vector<double> times() const;

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

/// Everything a run may need besides the scenario.
struct RunContext {
  TurbineParams params;
  const lpv::LpvController* lpv = nullptr;
  piflc::FuzzyConfig fuzzy;
};

/// Fixed-step co-simulation. Throws NumericError with the time of failure
/// if the plant diverges.
SimRecord run(const Scenario& scenario, const RunContext& ctx);

struct ChannelStats {
  double mean = 0.0, variance = 0.0, min = 0.0, max = 0.0;
  /// 100 · max|x − mean| / |mean|.
  double peak_fluctuation_pct = 0.0;
};

ChannelStats channel_stats(const std::vector<double>& x);

struct MetricReport {
  double window_start = 0.0;
  long long window_samples = 0;
  std::map<std::string, ChannelStats> channels;
  /// max |δ − mean δ| over the window, rad.
  double twist_amplitude = 0.0;
  ConstraintAudit audit;

  std::string to_text() const;
};

/// Throws DomainError when the window holds no sample.
MetricReport metrics(const SimRecord& rec, double window_start);

struct Comparison {
  MetricReport lpv, piflc;
  double speed_fluctuation_ratio = 0.0;  // PIFLC / LPV
  double power_fluctuation_ratio = 0.0;
  double twist_variance_ratio = 0.0;

  std::string to_text() const;
};

/// Throws DomainError if the records come from different scenarios or seeds.
Comparison compare(const SimRecord& lpv, const SimRecord& piflc, double window_start);

/// Steady-state Δωg after a wind step, nonlinear plant vs a linear model.
struct StepComparison {
  double wind = 0.0;
  double linear = 0.0;     // rad/s
  double nonlinear = 0.0;  // rad/s
  /// |nonlinear − linear| / |linear|
  double discrepancy = 0.0;
};

/// Starts the nonlinear plant at the trim of `wind` with commands held,
/// steps the wind by `step`, and simulates to rest. The linear prediction
/// is the static gain of `model` from Δv to Δωg.
StepComparison step_comparison(const LinearModel& model, double wind, double step,
                               const TurbineParams& p);

/// Time traces of Δωg for the comparison (t, linear, nonlinear).
std::vector<std::array<double, 3>> step_traces(const LinearModel& model, double wind, double step,
                                              double duration, double dt, const TurbineParams& p);

}  // namespace wecs::sim
