#pragma once

#include <stdexcept>

namespace recomb {

/// State-space size limit exceeded. Construction refuses loudly instead of
/// truncating; the dense engine is exponential in the number of sites.
class CapExceededError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: integrator positivity loss beyond the roundoff clamp,
/// undefined divergences, runaway mass drift.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace recomb
