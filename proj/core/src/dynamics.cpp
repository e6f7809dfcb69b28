#include "srlaser/dynamics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "srlaser/error.hpp"

namespace srlaser {

namespace {

// Per-atom coefficients: hc = Gamma_c eta / 2, hd = Gamma_Delta eta / 2,
// nc = Gamma_c eta / sqrt(Gamma_0), nd = Gamma_Delta eta / sqrt(Gamma_0).
struct Coeffs {
    double eta, hc, hd, nc, nd;
};

inline void bloch_rhs(const Coeffs& c, double sx, double sy, double sz, double jx, double jy, double xp, double xq,
                      double& dx, double& dy, double& dz) {
    const double zp1 = sz + 1.0;
    const double ax = jx * sz - c.eta * sx * zp1;
    const double ay = jy * sz - c.eta * sy * zp1;
    dx = c.hc * ax - c.hd * ay - c.nc * sz * xp + c.nd * sz * xq;
    dy = c.hc * ay + c.hd * ax + c.nc * sz * xq - c.nd * sz * xp;
    dz = -c.hc * (jx * sx + jy * sy + 2.0 * c.eta * sz) + c.hd * (jy * sx - jx * sy) + c.nc * (sx * xp - sy * xq) +
         c.nd * (sx * xq + sy * xp);
}

}  // namespace

BlochDerivative drift(const AtomState& a, const CollectiveSpin& j, const DerivedRates& r, const NoiseSample& n) {
    const double inv = r.gamma_0 > 0.0 ? 1.0 / std::sqrt(r.gamma_0) : 0.0;
    const Coeffs c{a.eta, 0.5 * r.gamma_c * a.eta, 0.5 * r.gamma_delta * a.eta, r.gamma_c * inv * a.eta,
                   r.gamma_delta * inv * a.eta};
    BlochDerivative d;
    bloch_rhs(c, a.sx, a.sy, a.sz, j.jx, j.jy, n.xi_p, n.xi_q, d.dsx, d.dsy, d.dsz);
    return d;
}

NoiseSample sample_noise(double dt, Rng& rng, bool noise_on) {
    if (!noise_on) return {};
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(dt));
    const double p = dist(rng);
    const double q = dist(rng);
    return {p, q};
}

double photon_number(const CollectiveSpin& j, const DerivedRates& r, double g) {
    if (g == 0.0) return 0.0;
    const double field_gain = (r.gamma_delta * r.gamma_delta + r.gamma_c * r.gamma_c) / (4.0 * g * g);
    const double jminus2 = 0.25 * (j.jx * j.jx + j.jy * j.jy);
    return field_gain * jminus2;
}

CollectiveSpin rk4_step(Ensemble& ens, const NoiseSample& noise, double dt, CouplingUpdate mode, Rk4Workspace& w) {
    const std::size_t n = ens.size();
    if (n == 0) return {};
    auto sx = ens.sx();
    auto sy = ens.sy();
    auto sz = ens.sz();
    const auto eta = ens.eta();
    const auto hc = ens.half_gamma_c();
    const auto hd = ens.half_gamma_delta();
    const auto nc = ens.noise_c();
    const auto nd = ens.noise_delta();
    for (auto* v : {&w.tx, &w.ty, &w.tz, &w.ax, &w.ay, &w.az}) v->resize(n);
    const double xp = noise.xi_p;
    const double xq = noise.xi_q;
    const bool frozen = mode == CouplingUpdate::FrozenStep;

    const CollectiveSpin j0 = ens.collective_spin();
    double jx = j0.jx;
    double jy = j0.jy;

    double* const tx = w.tx.data();
    double* const ty = w.ty.data();
    double* const tz = w.tz.data();
    double* const ax = w.ax.data();
    double* const ay = w.ay.data();
    double* const az = w.az.data();
    double* const px = sx.data();
    double* const py = sy.data();
    double* const pz = sz.data();

    // Stage 1: derivative at the step start, first stage state, and its J.
    {
        const double h = 0.5 * dt;
        double nx = 0.0;
        double ny = 0.0;
#pragma omp simd reduction(+ : nx, ny)
        for (std::size_t k = 0; k < n; ++k) {
            const Coeffs c{eta[k], hc[k], hd[k], nc[k], nd[k]};
            double dx, dy, dz;
            bloch_rhs(c, px[k], py[k], pz[k], jx, jy, xp, xq, dx, dy, dz);
            ax[k] = dx;
            ay[k] = dy;
            az[k] = dz;
            tx[k] = px[k] + h * dx;
            ty[k] = py[k] + h * dy;
            tz[k] = pz[k] + h * dz;
            nx += c.eta * tx[k];
            ny += c.eta * ty[k];
        }
        if (!frozen) {
            jx = nx;
            jy = ny;
        }
    }
    // Stages 2 and 3 overwrite the stage state in place: each atom's
    // derivative depends only on its own state and the collective J.
    constexpr double stage_step[2] = {0.5, 1.0};
    for (double step_fraction : stage_step) {
        const double h = step_fraction * dt;
        double nx = 0.0;
        double ny = 0.0;
#pragma omp simd reduction(+ : nx, ny)
        for (std::size_t k = 0; k < n; ++k) {
            const Coeffs c{eta[k], hc[k], hd[k], nc[k], nd[k]};
            double dx, dy, dz;
            bloch_rhs(c, tx[k], ty[k], tz[k], jx, jy, xp, xq, dx, dy, dz);
            ax[k] += 2.0 * dx;
            ay[k] += 2.0 * dy;
            az[k] += 2.0 * dz;
            tx[k] = px[k] + h * dx;
            ty[k] = py[k] + h * dy;
            tz[k] = pz[k] + h * dz;
            nx += c.eta * tx[k];
            ny += c.eta * ty[k];
        }
        if (!frozen) {
            jx = nx;
            jy = ny;
        }
    }

    const double sixth = dt / 6.0;
    double ex = 0.0;
    double ey = 0.0;
#pragma omp simd reduction(+ : ex, ey)
    for (std::size_t k = 0; k < n; ++k) {
        const Coeffs c{eta[k], hc[k], hd[k], nc[k], nd[k]};
        double dx, dy, dz;
        bloch_rhs(c, tx[k], ty[k], tz[k], jx, jy, xp, xq, dx, dy, dz);
        px[k] += sixth * (ax[k] + dx);
        py[k] += sixth * (ay[k] + dy);
        pz[k] += sixth * (az[k] + dz);
        ex += c.eta * px[k];
        ey += c.eta * py[k];
    }
    if (!std::isfinite(ex) || !std::isfinite(ey)) {
        // Locate the first offending atom for the diagnostic.
        for (std::size_t k = 0; k < n; ++k)
            if (!std::isfinite(sx[k]) || !std::isfinite(sy[k]) || !std::isfinite(sz[k]))
                throw NumericalError(fmt::format("non-finite Bloch vector for atom {} of {} (eta {:.3g})", k, n, eta[k]));
        throw NumericalError("non-finite collective spin");
    }
    return {ex, ey};
}

Trajectory::Trajectory(const SimConfig& cfg)
    : cfg_(cfg),
      ensemble_(Ensemble::Physics{cfg.g, cfg.kappa, cfg.delta_ca}),
      ensemble_rates_(derived_rates(cfg.delta_ca, cfg.g, cfg.kappa)),
      atoms_rng_(make_stream(cfg.numerics.seed, 0)),
      noise_rng_(make_stream(cfg.numerics.seed, 1)),
      mode_(cfg.numerics.paper_literal ? CouplingUpdate::FrozenStep : CouplingUpdate::PerStage) {
    const double ratio = cfg.tau / cfg.numerics.dt;
    lifetime_steps_ = static_cast<std::uint64_t>(std::ceil(ratio - 1e-9));
    if (lifetime_steps_ == 0) lifetime_steps_ = 1;
}

double Trajectory::photon_number_now() const { return photon_number(j_, ensemble_rates_, cfg_.g); }

void Trajectory::step() {
    const double dt = cfg_.numerics.dt;
    const double t = now();
    stats_.retired += ensemble_.retire(t);
    const auto count = draw_injection_count(cfg_.injection_rate(), dt, cfg_.beam.arrival, carry_, atoms_rng_);
    if (count > 0) {
        auto atoms = make_atoms(count, t, cfg_.tau, cfg_.pump, cfg_.beam, atoms_rng_);
        // Exit on the step grid so the lifetime is exactly ceil(tau/dt) steps.
        const double t_exit = static_cast<double>(step_ + lifetime_steps_) * dt;
        for (auto& a : atoms) a.t_exit = t_exit;
        ensemble_.add(atoms);
        stats_.injected += count;
    }
    const NoiseSample noise = sample_noise(dt, noise_rng_, cfg_.numerics.noise_on);
    j_ = rk4_step(ensemble_, noise, dt, mode_, work_);
    ++step_;
    ++stats_.steps;
}

FieldRecord run_trajectory(const SimConfig& cfg, TrajectoryStats* stats_out) {
    const double dt = cfg.numerics.dt;
    const auto burn_steps = static_cast<std::uint64_t>(std::llround(cfg.numerics.t_burn / dt));
    const auto stride = static_cast<std::uint64_t>(cfg.numerics.record_stride);
    const double sample_interval = dt * static_cast<double>(stride);
    const auto samples = static_cast<std::uint64_t>(std::floor(cfg.numerics.t_record / sample_interval + 1e-9));

    FieldRecord rec;
    rec.sample_interval = sample_interval;
    if (samples == 0) {
        if (stats_out) *stats_out = {};
        return rec;
    }
    rec.t.reserve(samples);
    rec.j_plus.reserve(samples);
    rec.n_phot.reserve(samples);

    Trajectory traj(cfg);
    for (std::uint64_t k = 0; k < burn_steps; ++k) traj.step();

    double atoms_sum = 0.0;
    double inversion_sum = 0.0;
    double photons_sum = 0.0;
    const double t_start = traj.now();
    for (std::uint64_t s = 0; s < samples; ++s) {
        for (std::uint64_t k = 0; k < stride; ++k) traj.step();
        const double n_ph = traj.photon_number_now();
        rec.t.push_back(traj.now() - t_start);
        rec.j_plus.push_back(traj.collective().j_plus());
        rec.n_phot.push_back(n_ph);
        const auto na = static_cast<double>(traj.ensemble().size());
        atoms_sum += na;
        inversion_sum += na > 0 ? traj.ensemble().total_inversion() / na : 0.0;
        photons_sum += n_ph;
    }
    if (stats_out) {
        *stats_out = traj.stats();
        const auto ns = static_cast<double>(samples);
        stats_out->mean_atoms = atoms_sum / ns;
        stats_out->mean_inversion = inversion_sum / ns;
        stats_out->mean_photons = photons_sum / ns;
    }
    return rec;
}

}  // namespace srlaser
