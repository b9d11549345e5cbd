#pragma once

#include <cstdint>

namespace um {

struct OracleOutcome {
  int instances = 0;
  double max_abs_delta = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

// Randomized cross-checks of the recursive likelihood-ratio path against
// independently coded one-shot formulas.  Zero instances is a vacuous pass.

// Sum of per-observation log updates vs the normalizer-ratio form,
// multinomial family (K <= 8, evidence <= 50 draws, t <= 200).
OracleOutcome oracle_multinomial(int instances, std::uint64_t seed);

// Same for the Gaussian family (d <= 3).
OracleOutcome oracle_gaussian(int instances, std::uint64_t seed);

// d = 1 posterior predictive density vs brute-force numerical integration
// of likelihood times posterior over (mean, variance).
OracleOutcome oracle_quadrature(int instances, std::uint64_t seed);

}  // namespace um
