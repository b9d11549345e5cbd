#pragma once

#include <stdexcept>

namespace um {

// Hyperparameter update produced a state outside the family (e.g. a scatter
// matrix that lost positive definiteness to rounding).
class NumericalDegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An observation landed where the model assigns zero density.  Under the
// absolute-continuity assumption the ground truth cannot emit such a point,
// so seeing one means the configuration violates that assumption.
class SupportViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace um
