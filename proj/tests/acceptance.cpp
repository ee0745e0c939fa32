// Acceptance battery: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <iostream>

#include "wecs/verify.hpp"

int main() {
  const auto results = wecs::verify::run_all({});
  for (const auto& r : results) std::cout << wecs::verify::format(r) << "\n";
  const bool ok = wecs::verify::all_passed(results);
  std::cout << (ok ? "acceptance: all criteria passed" : "acceptance: some criteria failed") << "\n";
  return ok ? 0 : 1;
}
