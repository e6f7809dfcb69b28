#include "srlaser/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srlaser {

CollectiveSpin collective_spin(std::span<const AtomState> atoms) {
    CollectiveSpin j;
    for (const auto& a : atoms) {
        j.jx += a.eta * a.sx;
        j.jy += a.eta * a.sy;
    }
    return j;
}

std::array<double, 3> project_spin(const BlochMean& mean, Rng& rng) {
    std::array<double, 3> out{};
    const double comps[3] = {mean.sx, mean.sy, mean.sz};
    for (int i = 0; i < 3; ++i) {
        const double m = comps[i];
        if (!(m >= -1.0 && m <= 1.0)) throw std::invalid_argument("project_spin: mean component outside [-1, 1]");
        std::bernoulli_distribution up(0.5 * (1.0 + m));
        out[i] = up(rng) ? 1.0 : -1.0;
    }
    return out;
}

double sample_coupling(CouplingMode mode, Rng& rng) {
    if (mode == CouplingMode::Uniform) return 1.0;
    // Transverse offset uniform across +-w of a Gaussian mode: eta = exp(-x^2/w^2).
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    const double x = offset(rng);
    return std::exp(-x * x);
}

std::size_t draw_injection_count(double rate, double dt, ArrivalMode mode, double& carry, Rng& rng) {
    const double expected = rate * dt;
    if (!(expected > 0.0)) return 0;
    if (mode == ArrivalMode::Deterministic) {
        carry += expected;
        // Tolerance absorbs round-off in rate * dt accumulated over many steps.
        const double whole = std::floor(carry + 1e-9);
        carry -= whole;
        return static_cast<std::size_t>(whole);
    }
    std::poisson_distribution<std::size_t> dist(expected);
    return dist(rng);
}

std::vector<AtomState> make_atoms(std::size_t count, double now, double tau, const PumpConfig& pump,
                                  const BeamConfig& beam, Rng& rng) {
    std::vector<AtomState> atoms;
    atoms.reserve(count);
    std::normal_distribution<double> doppler(beam.doppler_mean, beam.doppler_width);
    // The atom entered the pump tau_p before reaching the cavity.
    const double t0 = now - pump.tau_p;
    for (std::size_t i = 0; i < count; ++i) {
        const double phi = sample_phase_noise(pump.linewidth, pump.tau_p, rng);
        BlochMean mean = prepare(pump, t0, phi);
        // Closed forms can overshoot the unit ball by round-off only.
        mean.sx = std::clamp(mean.sx, -1.0, 1.0);
        mean.sy = std::clamp(mean.sy, -1.0, 1.0);
        mean.sz = std::clamp(mean.sz, -1.0, 1.0);
        const auto s = project_spin(mean, rng);
        AtomState a;
        a.sx = s[0];
        a.sy = s[1];
        a.sz = s[2];
        a.doppler = beam.doppler_width > 0.0 ? doppler(rng) : beam.doppler_mean;
        a.eta = sample_coupling(beam.coupling_mode, rng);
        a.t_exit = now + tau;
        atoms.push_back(a);
    }
    return atoms;
}

std::vector<AtomState> inject_atoms(double now, double dt, double rate, double tau, const PumpConfig& pump,
                                    const BeamConfig& beam, Rng& rng, double& carry) {
    const auto count = draw_injection_count(rate, dt, beam.arrival, carry, rng);
    return make_atoms(count, now, tau, pump, beam, rng);
}

DerivedRates Ensemble::rates_for(const AtomState& atom) const {
    // The Doppler shift enters through the cavity-atom detuning.
    return derived_rates(physics_.delta_ca - atom.doppler, physics_.g, physics_.kappa);
}

void Ensemble::insert_at(std::size_t pos, const AtomState& a) {
    const DerivedRates r = rates_for(a);
    const double inv_sqrt_g0 = r.gamma_0 > 0.0 ? 1.0 / std::sqrt(r.gamma_0) : 0.0;
    auto put = [pos](std::vector<double>& v, double x) { v.insert(v.begin() + static_cast<std::ptrdiff_t>(pos), x); };
    put(eta_, a.eta);
    put(sx_, a.sx);
    put(sy_, a.sy);
    put(sz_, a.sz);
    put(doppler_, a.doppler);
    put(t_exit_, a.t_exit);
    put(hc_, 0.5 * r.gamma_c * a.eta);
    put(hd_, 0.5 * r.gamma_delta * a.eta);
    put(nc_, r.gamma_c * inv_sqrt_g0 * a.eta);
    put(nd_, r.gamma_delta * inv_sqrt_g0 * a.eta);
}

void Ensemble::add(const AtomState& atom) {
    // Common case: atoms arrive in exit order and append.
    const auto begin = t_exit_.begin() + static_cast<std::ptrdiff_t>(head_);
    const auto it = std::upper_bound(begin, t_exit_.end(), atom.t_exit);
    insert_at(static_cast<std::size_t>(it - t_exit_.begin()), atom);
}

void Ensemble::add(std::span<const AtomState> atoms) {
    for (const auto& a : atoms) add(a);
}

std::size_t Ensemble::retire(double now) {
    std::size_t removed = 0;
    while (head_ < t_exit_.size() && t_exit_[head_] <= now) {
        ++head_;
        ++removed;
    }
    if (head_ > 1024 && head_ * 2 > t_exit_.size()) compact();
    return removed;
}

void Ensemble::compact() {
    auto drop = [this](std::vector<double>& v) { v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(head_)); };
    for (auto* v : {&eta_, &sx_, &sy_, &sz_, &doppler_, &t_exit_, &hc_, &hd_, &nc_, &nd_}) drop(*v);
    head_ = 0;
}

AtomState Ensemble::atom(std::size_t i) const {
    const std::size_t k = head_ + i;
    if (k >= eta_.size()) throw std::out_of_range("Ensemble::atom");
    return {eta_[k], sx_[k], sy_[k], sz_[k], doppler_[k], t_exit_[k]};
}

CollectiveSpin Ensemble::collective_spin() const {
    CollectiveSpin j;
    for (std::size_t k = head_; k < eta_.size(); ++k) {
        j.jx += eta_[k] * sx_[k];
        j.jy += eta_[k] * sy_[k];
    }
    return j;
}

double Ensemble::total_inversion() const {
    double s = 0.0;
    for (std::size_t k = head_; k < sz_.size(); ++k) s += sz_[k];
    return s;
}

}  // namespace srlaser
