#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace omd {

/// Result of one randomized invariant check. Every drawn case produces a
/// slack whose pass condition is slack >= 0, with the check's stated
/// tolerance already folded in; `worst_slack` is the smallest slack seen.
struct PropertyCheck {
  std::string name;
  std::int64_t cases = 0;
  std::int64_t failures = 0;
  double worst_slack = std::numeric_limits<double>::infinity();

  bool passed() const { return failures == 0; }
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;

  bool all_passed() const;
  std::int64_t total_failures() const;
};

/// Runs the randomized inequality and identity checks for the simplex
/// divergences, prox maps, series bound, and finite-difference calculus.
/// `cases` draws per randomized check; the series bound runs its three
/// fixed instances.
PropertyReport run_property_suite(std::int64_t cases, std::uint64_t seed);

}  // namespace omd
