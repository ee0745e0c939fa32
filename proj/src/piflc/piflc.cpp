#include "wecs/piflc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wecs/error.hpp"
#include "wecs/io/keyvalue.hpp"
#include "wecs/io/number.hpp"

namespace wecs::piflc {
namespace {

constexpr double kWidth = 1.0 / 3.0;
constexpr int kGrid = 2400;  // universe samples; every center k/3 is a grid point

double center(int k) { return (k - 3) / 3.0; }

double triangle(double x, int k) { return std::max(0.0, 1.0 - std::abs(x - center(k)) / kWidth); }

}  // namespace

const std::array<const char*, kSets> kLabels = {"NB", "NM", "NS", "ZE", "PS", "PM", "PB"};

RuleTable FuzzyConfig::default_rules() {
  RuleTable r{};
  for (int i = 0; i < kSets; ++i)
    for (int j = 0; j < kSets; ++j) r[i][j] = std::clamp(i + j - 3, 0, kSets - 1);
  return r;
}

FuzzyConfig FuzzyConfig::from_keyvalues(const io::KeyValueFile& kv) {
  FuzzyConfig c;
  if (auto x = kv.get_double("piflc.ke")) c.ke = *x;
  if (auto x = kv.get_double("piflc.kde")) c.kde = *x;
  if (auto x = kv.get_double("piflc.ku")) c.ku = *x;
  if (auto x = kv.get_double("piflc.ts")) c.ts = *x;
  if (auto x = kv.get_double("piflc.full_scale")) c.full_scale = *x;
  c.validate();
  return c;
}

void FuzzyConfig::validate() const {
  if (!std::isfinite(ke) || !std::isfinite(kde) || !std::isfinite(ku))
    throw DomainError("FuzzyConfig: gains must be finite");
  if (!(ts > 0.0)) throw DomainError("FuzzyConfig: ts must be > 0");
  if (!(full_scale > 0.0)) throw DomainError("FuzzyConfig: full_scale must be > 0");
  for (const auto& row : rules)
    for (int o : row)
      if (o < 0 || o >= kSets) throw DomainError("FuzzyConfig: rule output out of range");
}

std::string FuzzyConfig::dump() const {
  std::ostringstream out;
  out << "# gains\nke " << io::format_double(ke) << "\nkde " << io::format_double(kde)
      << "\nku " << io::format_double(ku) << "\nts " << io::format_double(ts)
      << "\nfull_scale " << io::format_double(full_scale) << "\n# membership centers (half-width 1/3)\n";
  for (int k = 0; k < kSets; ++k) out << kLabels[k] << ' ' << io::format_double(center(k)) << '\n';
  out << "# rules: rows e, columns de\n  ";
  for (int j = 0; j < kSets; ++j) out << ' ' << kLabels[j];
  out << '\n';
  for (int i = 0; i < kSets; ++i) {
    out << kLabels[i];
    for (int j = 0; j < kSets; ++j) out << ' ' << kLabels[rules[i][j]];
    out << '\n';
  }
  return out.str();
}

Memberships fuzzify(double x) {
  x = std::clamp(x, -1.0, 1.0);
  Memberships mu{};
  for (int k = 0; k < kSets; ++k) mu[k] = triangle(x, k);
  return mu;
}

double infer_and_defuzzify(const Memberships& e, const Memberships& de, const FuzzyConfig& c) {
  std::array<double, kSets> strength{};
  for (int i = 0; i < kSets; ++i) {
    if (e[i] <= 0.0) continue;
    for (int j = 0; j < kSets; ++j) {
      if (de[j] <= 0.0) continue;
      auto& s = strength[c.rules[i][j]];
      s = std::max(s, std::min(e[i], de[j]));
    }
  }
  const double hi = 1.0 + kWidth, h = 2.0 * hi / kGrid;
  const auto aggregated = [&](double u) {
    double mu = 0.0;
    for (int k = 0; k < kSets; ++k)
      if (strength[k] > 0.0) mu = std::max(mu, std::min(strength[k], triangle(u, k)));
    return mu;
  };
  // Trapezoid rule on mirrored sample pairs, so the surface is exactly odd.
  double num = 0.0, den = aggregated(0.0);
  for (int g = 0; g < kGrid / 2; ++g) {
    const double u = hi - g * h;
    const double w = g == 0 ? 0.5 : 1.0;
    const double pos = aggregated(u), neg = aggregated(-u);
    num += w * (pos - neg) * u;
    den += w * (pos + neg);
  }
  if (!(den > 0.0)) throw DomainError("infer_and_defuzzify: no rule fired");
  return std::clamp(num / den, -1.0, 1.0);
}

double surface(double e, double de, const FuzzyConfig& c) {
  return infer_and_defuzzify(fuzzify(e), fuzzify(de), c);
}

double piflc_step(PiflcState& state, double measured_speed, double reference_speed,
                  const FuzzyConfig& c, const TurbineParams& p) {
  if (!(reference_speed > 0.0)) throw DomainError("piflc_step: reference must be > 0");
  const double e = (reference_speed - measured_speed) / reference_speed;
  const double de = e - state.previous_error;
  const double du = c.ku * c.full_scale *
                    surface(std::clamp(c.ke * e, -1.0, 1.0), std::clamp(c.kde * de, -1.0, 1.0), c);
  state.previous_error = e;
  state.output = std::clamp(state.output + du, p.pitch_min, p.pitch_max);
  ++state.samples;
  return state.output;
}

}  // namespace wecs::piflc
