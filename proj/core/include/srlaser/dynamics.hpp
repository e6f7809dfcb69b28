#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "srlaser/config.hpp"
#include "srlaser/ensemble.hpp"
#include "srlaser/random.hpp"
#include "srlaser/rates.hpp"

namespace srlaser {

/// Amplitudes of the two field quadrature noises over one step.
struct NoiseSample {
    double xi_p = 0.0;
    double xi_q = 0.0;
};

struct BlochDerivative {
    double dsx = 0.0;
    double dsy = 0.0;
    double dsz = 0.0;
};

/// Right-hand side of the c-number Langevin equations for one atom driven by
/// the collective spin (which includes the atom itself). Includes the
/// finite-N self-interaction terms. The imaginary self term of the inversion
/// equation has no real part and is dropped.
BlochDerivative drift(const AtomState& atom, const CollectiveSpin& j, const DerivedRates& rates,
                      const NoiseSample& noise);

/// Independent N(0, 1/dt) draws; zero when noise is off.
NoiseSample sample_noise(double dt, Rng& rng, bool noise_on);

/// Intracavity photon number implied by the eliminated field, noise excluded:
/// |Gamma_Delta + i Gamma_c|^2 / (4 g^2) * |J-|^2.
double photon_number(const CollectiveSpin& j, const DerivedRates& rates, double g);

enum class CouplingUpdate {
    PerStage,    // J recomputed from every RK4 stage state
    FrozenStep,  // J taken at the start of the step for all stages
};

/// Scratch buffers for rk4_step, reused across steps.
struct Rk4Workspace {
    std::vector<double> tx, ty, tz;
    std::vector<double> ax, ay, az;
};

/// Classic RK4 update of every active atom with the noise held fixed over
/// the step. Returns J of the updated states. Throws NumericalError if the
/// state becomes non-finite.
CollectiveSpin rk4_step(Ensemble& ensemble, const NoiseSample& noise, double dt, CouplingUpdate mode,
                        Rk4Workspace& work);

/// Recorded cavity field, after burn-in, on a uniform grid.
struct FieldRecord {
    double sample_interval = 0.0;
    std::vector<double> t;
    std::vector<std::complex<double>> j_plus;
    std::vector<double> n_phot;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
};

struct TrajectoryStats {
    std::uint64_t steps = 0;
    std::uint64_t injected = 0;
    std::uint64_t retired = 0;
    double mean_atoms = 0.0;      // over the recording span
    double mean_inversion = 0.0;  // mean sz per atom over the recording span
    double mean_photons = 0.0;
};

/// Steps one trajectory: retire, inject, draw noise, RK4. Exposed so tests and
/// benchmarks can drive the loop directly.
class Trajectory {
public:
    explicit Trajectory(const SimConfig& cfg);

    /// Advances one step of size dt.
    void step();
    double now() const { return static_cast<double>(step_) * cfg_.numerics.dt; }
    std::uint64_t step_index() const { return step_; }
    const Ensemble& ensemble() const { return ensemble_; }
    Ensemble& ensemble() { return ensemble_; }
    const CollectiveSpin& collective() const { return j_; }
    const TrajectoryStats& stats() const { return stats_; }
    double photon_number_now() const;

private:
    SimConfig cfg_;
    Ensemble ensemble_;
    DerivedRates ensemble_rates_;
    Rng atoms_rng_;
    Rng noise_rng_;
    Rk4Workspace work_;
    CollectiveSpin j_{};
    double carry_ = 0.0;
    std::uint64_t lifetime_steps_ = 0;
    std::uint64_t step_ = 0;
    TrajectoryStats stats_{};
    CouplingUpdate mode_;
};

/// Burn-in for t_burn, then records J+ and the photon number every
/// record_stride steps over t_record. Deterministic given the seed.
FieldRecord run_trajectory(const SimConfig& cfg, TrajectoryStats* stats = nullptr);

}  // namespace srlaser
