#pragma once

#include <array>
#include <string>

#include "wecs/params.hpp"

namespace wecs {
namespace io {
class KeyValueFile;
}

namespace piflc {

constexpr int kSets = 7;
using Memberships = std::array<double, kSets>;
/// Output-set index (0 = NB .. 6 = PB) for each (error, error-change) pair.
using RuleTable = std::array<std::array<int, kSets>, kSets>;

extern const std::array<const char*, kSets> kLabels;

struct FuzzyConfig {
  double ke = 2.0;
  double kde = 2.0;
  double ku = -2.0;
  double ts = 0.01;          // s
  double full_scale = 24.0;  // deg of pitch per unit of normalized output
  RuleTable rules = default_rules();

  /// out = clip(i + j) over labels NB..PB.
  static RuleTable default_rules();
  /// Defaults overridden by `piflc.ke`, `piflc.kde`, `piflc.ku`, `piflc.ts`,
  /// `piflc.full_scale`.
  static FuzzyConfig from_keyvalues(const io::KeyValueFile& kv);
  void validate() const;
  /// Membership centers and the rule table as text.
  std::string dump() const;
};

/// Seven triangles centered at k/3, k = −3..3, each of half-width 1/3.
/// Input is saturated to [−1, 1].
Memberships fuzzify(double x);

/// Mamdani min-AND, max aggregation, centroid. Output sets are full
/// triangles, so the universe is [−4/3, 4/3]; the result is clamped to [−1, 1].
double infer_and_defuzzify(const Memberships& e, const Memberships& de, const FuzzyConfig& c);

/// fuzzify + infer on already normalized inputs.
double surface(double e, double de, const FuzzyConfig& c);

struct PiflcState {
  double previous_error = 0.0;
  double output = 0.0;  // pitch command, deg
  long long samples = 0;
};

/// One sample: e = (ref − ωg)/ref, Δe = e − e_prev, u += Ku·full_scale·surface(Ke e, Kde Δe),
/// saturated to the pitch range. Returns the new pitch command.
double piflc_step(PiflcState& state, double measured_speed, double reference_speed,
                  const FuzzyConfig& c, const TurbineParams& p);

}  // namespace piflc
}  // namespace wecs
