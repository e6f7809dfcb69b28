#include "srlaser/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace srlaser {

DerivedRates derived_rates(double delta_eff, double g, double kappa) {
    if (!std::isfinite(delta_eff) || !std::isfinite(g) || !std::isfinite(kappa))
        throw std::invalid_argument("derived_rates: non-finite input");
    if (kappa <= 0.0) throw std::invalid_argument("derived_rates: kappa must be > 0");
    const double g2 = g * g;
    const double denom = delta_eff * delta_eff + 0.25 * kappa * kappa;
    return {
        .gamma_delta = 2.0 * g2 * delta_eff / denom,
        .gamma_c = g2 * kappa / denom,
        .gamma_0 = 4.0 * g2 / kappa,
    };
}

}  // namespace srlaser
