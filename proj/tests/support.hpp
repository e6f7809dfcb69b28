#pragma once

#include <string>

#include "srlaser/config.hpp"

namespace srlaser::test {

// Small, fast configuration used across the unit tests.
inline std::string small_config_text() {
    return R"([cavity]
kappa_mhz = 50
g_mhz = 0.25
delta_ca_mhz = 0

[beam]
tau_us = 0.4
n_mean = 200

[pump]
scheme = modulated_resonant
omega_mhz = 12
tau_p_us = 0.0414
delta_pa_mhz = 2
linewidth_khz = 20

[numerics]
dt_ns = 5
t_burn_us = 2
t_record_us = 40
record_stride = 5
seed = 9
)";
}

inline SimConfig small_config() { return ConfigDocument::parse(small_config_text()).to_config(); }

}  // namespace srlaser::test
