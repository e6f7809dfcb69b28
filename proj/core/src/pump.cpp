#include "srlaser/pump.hpp"

#include <cmath>
#include <stdexcept>

namespace srlaser {

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace

BlochMean rotate_to_atom_frame(const BlochMean& s, double angle) {
    const double c = std::cos(angle);
    const double sn = std::sin(angle);
    return {s.sx * c - s.sy * sn, s.sx * sn + s.sy * c, s.sz};
}

BlochMean prep_detuned_single(const PumpConfig& cfg, double t0, double phase_noise) {
    // sin(omega tau_p) equals 2 sqrt(rho_ee (1 - rho_ee)) for areas up to pi
    // and keeps the correct sign beyond.
    const double area = cfg.pulse_area();
    const double transverse = std::sin(area);
    const double phase = cfg.delta_pa * t0 + phase_noise;
    return {transverse * std::sin(phase), -transverse * std::cos(phase), -std::cos(area)};
}

double modulated_pulse_area(const PumpConfig& cfg, double t0, double phase_noise) {
    const double phase = cfg.delta_pa * t0 + phase_noise;
    if (!cfg.use_exact) return cfg.omega * std::cos(phase) * cfg.tau_p;
    // (omega/d)[sin(d(t0 + tau_p) + phi) - sin(d t0 + phi)] in product form,
    // finite as d -> 0.
    const double half = 0.5 * cfg.delta_pa * cfg.tau_p;
    return cfg.omega * cfg.tau_p * sinc(half) * std::cos(phase + half);
}

BlochMean prep_modulated(const PumpConfig& cfg, double t0, double phase_noise) {
    const double a = modulated_pulse_area(cfg, t0, phase_noise);
    return {0.0, -std::sin(a), -std::cos(a)};
}

BlochMean prep_modulated_offset(const PumpConfig& cfg, double t0, double phase_noise) {
    const double b = modulated_pulse_area(cfg, t0, phase_noise);
    const double carrier = cfg.delta_offset * t0 + phase_noise;
    return {std::sin(b) * std::sin(carrier), -std::sin(b) * std::cos(carrier), -std::cos(b)};
}

BlochMean prepare(const PumpConfig& cfg, double t0, double phase_noise) {
    switch (cfg.scheme) {
        case PumpScheme::DetunedSingle: return prep_detuned_single(cfg, t0, phase_noise);
        case PumpScheme::ModulatedResonant: return prep_modulated(cfg, t0, phase_noise);
        case PumpScheme::ModulatedOffset: return prep_modulated_offset(cfg, t0, phase_noise);
    }
    throw std::logic_error("prepare: unknown pump scheme");
}

double sample_phase_noise(double linewidth, double tau_p, Rng& rng) {
    if (linewidth < 0.0) throw std::invalid_argument("sample_phase_noise: linewidth must be >= 0");
    if (linewidth == 0.0) return 0.0;
    std::normal_distribution<double> dist(0.0, std::sqrt(linewidth * tau_p));
    return dist(rng);
}

}  // namespace srlaser
