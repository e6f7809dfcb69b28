#pragma once

#include "srlaser/config.hpp"
#include "srlaser/random.hpp"

namespace srlaser {

/// Mean Bloch vector of an atom leaving the pump, in the rotating frame of
/// the atom. Excited state is sz = +1.
struct BlochMean {
    double sx = 0.0;
    double sy = 0.0;
    double sz = -1.0;

    double norm2() const { return sx * sx + sy * sy + sz * sz; }
    double excited_population() const { return 0.5 * (1.0 + sz); }
};

// `t0` is the time the atom enters the pump; `phase_noise` is added to the
// pump phase (delta_pa * t0, and delta_offset * t0 for the offset scheme).

/// Single detuned pump, Rabi pulse area omega * tau_p.
BlochMean prep_detuned_single(const PumpConfig& cfg, double t0, double phase_noise = 0.0);

/// Amplitude-modulated resonant pump, carrier on resonance.
BlochMean prep_modulated(const PumpConfig& cfg, double t0, double phase_noise = 0.0);

/// Amplitude-modulated pump with carrier detuning delta_offset.
BlochMean prep_modulated_offset(const PumpConfig& cfg, double t0, double phase_noise = 0.0);

/// Dispatches on cfg.scheme.
BlochMean prepare(const PumpConfig& cfg, double t0, double phase_noise = 0.0);

/// Pulse area seen by a modulated pump between t0 and t0 + tau_p (exact or
/// small delta_pa * tau_p form, per cfg.use_exact).
double modulated_pulse_area(const PumpConfig& cfg, double t0, double phase_noise = 0.0);

/// Gaussian pump phase jitter with standard deviation sqrt(linewidth * tau_p).
double sample_phase_noise(double linewidth, double tau_p, Rng& rng);

/// Rotates the transverse components by `angle` (pump frame -> atom frame).
BlochMean rotate_to_atom_frame(const BlochMean& s, double angle);

}  // namespace srlaser
