#pragma once

#include "srlaser/config.hpp"
#include "srlaser/pump.hpp"

namespace srlaser {

/// Integrates the undamped pump Bloch equations for cfg.scheme from the
/// ground state over [t0, t0 + tau_p] with an adaptive Dormand-Prince
/// integrator and applies the same pump-to-atom frame rotation as the closed
/// forms. Reference solution for tests; throws NumericalError on failure.
BlochMean bloch_ode_oracle(const PumpConfig& cfg, double t0, double phase_noise = 0.0, double tolerance = 1e-13);

}  // namespace srlaser
