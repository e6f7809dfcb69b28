#pragma once

namespace srlaser {

/// Rates left behind by adiabatically eliminating the bad-cavity field,
/// evaluated at an effective cavity-atom detuning. All in rad/s.
struct DerivedRates {
    double gamma_delta = 0.0;  // dispersive part, odd in the detuning
    double gamma_c = 0.0;      // collective emission rate, even in the detuning
    double gamma_0 = 0.0;      // gamma_c on resonance, 4 g^2 / kappa
};

/// gamma_delta = 2 g^2 d / (d^2 + (kappa/2)^2), gamma_c = g^2 kappa / (d^2 + (kappa/2)^2).
/// Throws std::invalid_argument for kappa <= 0 or non-finite input.
DerivedRates derived_rates(double delta_eff, double g, double kappa);

}  // namespace srlaser
