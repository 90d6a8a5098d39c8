#pragma once

#include <stdexcept>
#include <string>

namespace samsbo {

/// Factorization or conditioning failure that survived the jitter policy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A system matrix that was required to be Hurwitz is not.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Markov chain did not mix (acceptance collapsed after adaptation).
class ChainFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by acquisition when the safe set is empty.
class NoSafeAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration (grid too coarse, bad key, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace samsbo
