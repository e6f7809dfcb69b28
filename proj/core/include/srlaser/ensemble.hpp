#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "srlaser/config.hpp"
#include "srlaser/pump.hpp"
#include "srlaser/random.hpp"
#include "srlaser/rates.hpp"

namespace srlaser {

/// One transiting atom.
struct AtomState {
    double eta = 1.0;      // cavity mode amplitude at the atom
    double sx = 0.0;
    double sy = 0.0;
    double sz = 0.0;
    double doppler = 0.0;  // k * v_tr, rad/s
    double t_exit = 0.0;
};

/// Coupling-weighted sums of the transverse Bloch components.
struct CollectiveSpin {
    double jx = 0.0;
    double jy = 0.0;

    /// J+ = (Jx + i Jy) / 2.
    std::complex<double> j_plus() const { return {0.5 * jx, 0.5 * jy}; }
};

CollectiveSpin collective_spin(std::span<const AtomState> atoms);

/// Projects each mean component independently onto +-1 with matching expectation.
/// Throws std::invalid_argument if a component lies outside [-1, 1].
std::array<double, 3> project_spin(const BlochMean& mean, Rng& rng);

/// Mode amplitude for a new atom.
double sample_coupling(CouplingMode mode, Rng& rng);

/// Number of atoms entering during one step. `carry` holds the fractional
/// remainder for the deterministic arrival mode.
std::size_t draw_injection_count(double rate, double dt, ArrivalMode mode, double& carry, Rng& rng);

/// Builds `count` fresh atoms entering the cavity at `now`: pump preparation
/// (with phase jitter), projection, Doppler shift and coupling.
std::vector<AtomState> make_atoms(std::size_t count, double now, double tau, const PumpConfig& pump,
                                  const BeamConfig& beam, Rng& rng);

/// Draws a Poisson (or staggered) number of atoms for one step and builds them.
std::vector<AtomState> inject_atoms(double now, double dt, double rate, double tau, const PumpConfig& pump,
                                    const BeamConfig& beam, Rng& rng, double& carry);

/// Active atoms, struct-of-arrays, ordered by exit time. Per-atom drift
/// coefficients are fixed at injection because the Doppler shift is.
class Ensemble {
public:
    struct Physics {
        double g = 0.0;
        double kappa = 1.0;
        double delta_ca = 0.0;
    };

    Ensemble() = default;
    explicit Ensemble(Physics physics) : physics_(physics) {}

    void add(const AtomState& atom);
    void add(std::span<const AtomState> atoms);

    /// Removes every atom with t_exit <= now; returns the count removed.
    std::size_t retire(double now);

    std::size_t size() const { return eta_.size() - head_; }
    bool empty() const { return size() == 0; }
    AtomState atom(std::size_t i) const;
    const Physics& physics() const { return physics_; }

    CollectiveSpin collective_spin() const;
    /// Sum of sz over active atoms.
    double total_inversion() const;

    std::span<double> sx() { return span(sx_); }
    std::span<double> sy() { return span(sy_); }
    std::span<double> sz() { return span(sz_); }
    std::span<const double> sx() const { return span(sx_); }
    std::span<const double> sy() const { return span(sy_); }
    std::span<const double> sz() const { return span(sz_); }
    std::span<const double> eta() const { return span(eta_); }
    // Half-rates times eta, and noise amplitudes times eta (see dynamics).
    std::span<const double> half_gamma_c() const { return span(hc_); }
    std::span<const double> half_gamma_delta() const { return span(hd_); }
    std::span<const double> noise_c() const { return span(nc_); }
    std::span<const double> noise_delta() const { return span(nd_); }

    DerivedRates rates_for(const AtomState& atom) const;

private:
    template <class T>
    std::span<T> span(std::vector<T>& v) {
        return {v.data() + head_, v.size() - head_};
    }
    template <class T>
    std::span<const T> span(const std::vector<T>& v) const {
        return {v.data() + head_, v.size() - head_};
    }
    void compact();
    void insert_at(std::size_t pos, const AtomState& atom);

    Physics physics_{};
    std::size_t head_ = 0;
    std::vector<double> eta_, sx_, sy_, sz_, doppler_, t_exit_;
    std::vector<double> hc_, hd_, nc_, nd_;
};

}  // namespace srlaser
