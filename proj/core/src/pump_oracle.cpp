#include "srlaser/pump_oracle.hpp"

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "srlaser/error.hpp"

namespace srlaser {

BlochMean bloch_ode_oracle(const PumpConfig& cfg, double t0, double phase_noise, double tolerance) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 3>;

    // Detuning of the frame the equations are written in, and the modulation
    // of the Rabi frequency.
    double frame_detuning = 0.0;
    bool modulated = false;
    switch (cfg.scheme) {
        case PumpScheme::DetunedSingle: frame_detuning = cfg.delta_pa; break;
        case PumpScheme::ModulatedResonant: modulated = true; break;
        case PumpScheme::ModulatedOffset:
            frame_detuning = cfg.delta_offset;
            modulated = true;
            break;
    }

    auto rhs = [&](const State& s, State& ds, double t) {
        const double rabi = modulated ? cfg.omega * std::cos(cfg.delta_pa * t + phase_noise) : cfg.omega;
        ds[0] = frame_detuning * s[1];
        ds[1] = -frame_detuning * s[0] + rabi * s[2];
        ds[2] = -rabi * s[1];
    };

    State s{0.0, 0.0, -1.0};
    const double t_end = t0 + cfg.tau_p;
    const double rabi_scale = std::max({cfg.omega, std::abs(cfg.delta_pa), std::abs(frame_detuning)});
    const double h0 = 1e-3 / rabi_scale;
    const std::size_t max_steps = 10'000'000;
    try {
        auto stepper = odeint::make_controlled(tolerance, tolerance, odeint::runge_kutta_dopri5<State>());
        auto steps = odeint::integrate_adaptive(stepper, rhs, s, t0, t_end, h0);
        if (steps >= max_steps) throw NumericalError("bloch_ode_oracle: step budget exhausted");
    } catch (const odeint::step_adjustment_error& e) {
        throw NumericalError(fmt::format("bloch_ode_oracle: step size failure: {}", e.what()));
    }
    for (double v : s)
        if (!std::isfinite(v)) throw NumericalError("bloch_ode_oracle: non-finite state");

    BlochMean out{s[0], s[1], s[2]};
    if (cfg.scheme == PumpScheme::ModulatedResonant) return out;
    // Back to the atom frame at the exit time, pump phase jitter included.
    return rotate_to_atom_frame(out, frame_detuning * t_end + phase_noise);
}

}  // namespace srlaser
