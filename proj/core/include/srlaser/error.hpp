#pragma once

#include <stdexcept>
#include <string>

namespace srlaser {

/// Invalid or inconsistent configuration (bad key, bad value, violated invariant).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The integration produced a non-finite state, or an oracle integrator failed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Post-processing could not produce the requested quantity.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace srlaser
