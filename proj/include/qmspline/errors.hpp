#pragma once

// Error taxonomy for the library.  Everything derives from Error so callers
// can distinguish configuration mistakes from numerical failures.

#include <stdexcept>
#include <string>

namespace qms {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid user-facing configuration: unknown kinds, bad parameter ranges,
// malformed config keys.
struct ConfigError : Error {
  using Error::Error;
};

// Requested covariance derivative order exceeds what the model provides.
struct OrderExceededError : Error {
  using Error::Error;
};

// Argument outside the model's domain [0,1].
struct DomainError : Error {
  using Error::Error;
};

// The requested derivative kernel does not exist at the given point
// (e.g. derivative kernels of the distorted stationary model at t = 0).
struct SingularityError : Error {
  using Error::Error;
};

// Hermite degree outside the supported set {1,3,5}.
struct UnsupportedDegreeError : Error {
  using Error::Error;
};

// A design could not be constructed (non-invertible quantile, etc.).
struct ConstructionError : Error {
  using Error::Error;
};

// Admissibility checks are implemented for power-law densities only.
struct UndecidableError : Error {
  using Error::Error;
};

// The smoothness profile lacks the data a check or construction needs.
struct IncompleteProfileError : Error {
  using Error::Error;
};

// Greedy rate-design construction cannot reach t = 1 within n intervals.
// minimal_feasible_n is 0 when no feasible n was found below the search cap.
struct InfeasibleDesignError : Error {
  InfeasibleDesignError(const std::string& msg, long minimal_n)
      : Error(msg), minimal_feasible_n(minimal_n) {}
  long minimal_feasible_n = 0;
};

// A numerical estimation failed to converge (ladder limits, fits).
struct EstimationError : Error {
  using Error::Error;
};

// A norm or constant diverges for the requested configuration.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace qms
