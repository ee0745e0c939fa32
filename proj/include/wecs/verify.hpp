#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wecs/lpv.hpp"
#include "wecs/params.hpp"
#include "wecs/piflc.hpp"

namespace wecs::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;
  std::string bound;
  /// Extra non-gating observations.
  std::vector<std::string> notes;
};

struct VerifyOptions {
  TurbineParams params;
  piflc::FuzzyConfig fuzzy;
  lpv::WeightingSet weights = lpv::WeightingSet::defaults();
  std::vector<std::uint64_t> turbulence_seeds{1, 2, 3};
  /// Reused when set; otherwise synthesized from `params`.
  const lpv::LpvSynthesis* synthesis = nullptr;
};

/// Runs criteria 1-10. A criterion that throws is reported as failed with
/// the error text as its measurement.
std::vector<CriterionResult> run_all(const VerifyOptions& opts);

/// `PASS  3 equilibrium identity: measured ... (bound ...)` plus note lines.
std::string format(const CriterionResult& r);

bool all_passed(const std::vector<CriterionResult>& results);

/// Numeric property checks shared by the acceptance battery and the tests.
namespace props {
/// Worst relative CARE residual and whether every closed loop was stable.
struct CareSummary {
  double worst_residual = 0.0;
  bool all_stable = true;
};
CareSummary care_random(int trials, std::uint64_t seed);
/// Worst relative error of series/parallel/feedback/lower_lft frequency
/// responses against direct complex-matrix formulas.
double interconnection_random(int trials, std::uint64_t seed);
/// Relative gap between one RK4 step of dt and two of dt/2 from an
/// off-equilibrium state (per-component characteristic scaling).
double rk4_step_halving(const TurbineParams& p, double dt);
/// max |surface(e, de) + surface(−e, −de)| on an n×n grid.
double fuzzy_antisymmetry(const piflc::FuzzyConfig& c, int n);
}  // namespace props

}  // namespace wecs::verify
