#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lrti {

struct PropertyResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double worst = 0;  ///< largest violation margin seen (<= 0 when all cases pass)
  std::string first_failure;

  bool passed() const { return failures == 0; }
};

struct PropertyReport {
  std::uint64_t seed = 0;
  std::vector<PropertyResult> results;

  bool passed() const;
};

/// Randomized checks of the thresholding operators over `pairs` seeded random
/// matrix pairs (mixed real and complex, shapes up to 12 x 12), plus the
/// deterministic quadrature tables for J = 1..11.
PropertyReport run_property_suite(std::uint64_t seed, int pairs = 1000);

}  // namespace lrti
