// errors.hpp: exception types thrown by the kerrbath library
#pragma once

#include <stdexcept>

namespace kerrbath {

// Identical-mode bath required (Gaussian lobes, recurrence times).
struct NonIdenticalBath : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// t_E and t_R are undefined for mu == 0.
struct DegenerateNonlinearity : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonPositiveFrequency : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyBatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A Fock cutoff leaves more probability mass in the discarded tail than allowed.
struct TruncationTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kerrbath
