#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "srlaser/dynamics.hpp"
#include "srlaser/error.hpp"
#include "srlaser/units.hpp"
#include "support.hpp"

using namespace srlaser;

namespace {

const double kKappa = mhz_to_angular(50.0);
const double kG = mhz_to_angular(0.25);

AtomState atom_at(double sx, double sy, double sz) {
    AtomState a;
    a.sx = sx;
    a.sy = sy;
    a.sz = sz;
    a.t_exit = 1.0;
    return a;
}

// Closed single-atom system, noise off: the transverse part decays and
// rotates as exp(-(Gc/2 + i Gd/2) t) and sz' = -Gc/2 (sx^2 + sy^2) - Gc sz,
// so sz(t) = (sz0 - (Gc/2) r0^2 t) exp(-Gc t).
struct SingleAtomSolution {
    double gc, gd, sx0, sy0, sz0;
    BlochMean at(double t) const {
        const std::complex<double> s0(sx0, sy0);
        const auto s = s0 * std::exp(std::complex<double>(-0.5 * gc, -0.5 * gd) * t);
        const double r2 = std::norm(s0);
        return {s.real(), s.imag(), (sz0 - 0.5 * gc * r2 * t) * std::exp(-gc * t)};
    }
};

BlochMean integrate_single(const AtomState& start, double delta, double g, double t_end, int steps) {
    Ensemble ens(Ensemble::Physics{g, kKappa, delta});
    ens.add(start);
    Rk4Workspace work;
    const double dt = t_end / steps;
    for (int k = 0; k < steps; ++k) rk4_step(ens, {}, dt, CouplingUpdate::PerStage, work);
    const auto a = ens.atom(0);
    return {a.sx, a.sy, a.sz};
}

double distance(const BlochMean& a, const BlochMean& b) {
    return std::sqrt((a.sx - b.sx) * (a.sx - b.sx) + (a.sy - b.sy) * (a.sy - b.sy) + (a.sz - b.sz) * (a.sz - b.sz));
}

}  // namespace

TEST_CASE("single excited atom decays at the collective rate") {
    const auto r = derived_rates(0.0, kG, kKappa);
    const auto d = drift(atom_at(0.0, 0.0, 1.0), {0.0, 0.0}, r, {});
    CHECK(d.dsz == doctest::Approx(-r.gamma_c).epsilon(1e-14));
    CHECK(d.dsx == 0.0);
    CHECK(d.dsy == 0.0);
}

TEST_CASE("two atoms on the equator: inversion rate from the collective spin") {
    // sz = 0, Jx = 2: dsz = -(Gc/2) (Jx sx + Jy sy + 2 eta sz) = -Gc.
    const auto r = derived_rates(0.0, kG, kKappa);
    const auto d = drift(atom_at(1.0, 0.0, 0.0), {2.0, 0.0}, r, {});
    CHECK(d.dsz == doctest::Approx(-r.gamma_c).epsilon(1e-14));
}

TEST_CASE("no dispersive cross-coupling on resonance") {
    const auto r = derived_rates(0.0, kG, kKappa);
    REQUIRE(r.gamma_delta == 0.0);
    const auto base = drift(atom_at(0.3, -0.2, 0.5), {0.0, 0.0}, r, {});
    const auto with_jy = drift(atom_at(0.3, -0.2, 0.5), {0.0, 7.0}, r, {});
    const auto with_jx = drift(atom_at(0.3, -0.2, 0.5), {7.0, 0.0}, r, {});
    CHECK(with_jy.dsx == base.dsx);  // Jy reaches sx only through Gamma_Delta
    CHECK(with_jx.dsy == base.dsy);  // Jx reaches sy only through Gamma_Delta
    const auto off = derived_rates(mhz_to_angular(10.0), kG, kKappa);
    CHECK(drift(atom_at(0.3, -0.2, 0.5), {0.0, 7.0}, off, {}).dsx !=
          drift(atom_at(0.3, -0.2, 0.5), {0.0, 0.0}, off, {}).dsx);
}

TEST_CASE("noise enters with the documented coefficients") {
    const auto r = derived_rates(mhz_to_angular(13.0), kG, kKappa);
    const auto a = atom_at(0.4, -0.7, 0.2);
    const NoiseSample n{1.3, -0.6};
    const auto with = drift(a, {0.4, -0.7}, r, n);
    const auto without = drift(a, {0.4, -0.7}, r, {});
    const double nc = r.gamma_c / std::sqrt(r.gamma_0);
    const double nd = r.gamma_delta / std::sqrt(r.gamma_0);
    CHECK(with.dsx - without.dsx == doctest::Approx(-nc * a.sz * n.xi_p + nd * a.sz * n.xi_q).epsilon(1e-12));
    CHECK(with.dsy - without.dsy == doctest::Approx(nc * a.sz * n.xi_q - nd * a.sz * n.xi_p).epsilon(1e-12));
    CHECK(with.dsz - without.dsz ==
          doctest::Approx(nc * (a.sx * n.xi_p - a.sy * n.xi_q) + nd * (a.sx * n.xi_q + a.sy * n.xi_p)).epsilon(1e-12));
}

TEST_CASE("RK4 matches the closed single-atom solution with fourth-order convergence") {
    const double g = mhz_to_angular(5.0);  // fast enough for a short horizon
    for (double delta : {0.0, mhz_to_angular(20.0)}) {
        const auto r = derived_rates(delta, g, kKappa);
        const SingleAtomSolution exact{r.gamma_c, r.gamma_delta, 0.6, -0.3, 0.5};
        const double t_end = 3.0 / r.gamma_c;
        const auto start = atom_at(exact.sx0, exact.sy0, exact.sz0);
        const double e1 = distance(integrate_single(start, delta, g, t_end, 20), exact.at(t_end));
        const double e2 = distance(integrate_single(start, delta, g, t_end, 40), exact.at(t_end));
        const double e3 = distance(integrate_single(start, delta, g, t_end, 80), exact.at(t_end));
        CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.25));
        CHECK(e2 / e3 == doctest::Approx(16.0).epsilon(0.25));
        CHECK(e3 < 1e-5);
    }
}

TEST_CASE("zero atoms and zero coupling leave nothing to do") {
    Ensemble empty(Ensemble::Physics{kG, kKappa, 0.0});
    Rk4Workspace work;
    const auto j = rk4_step(empty, {1.0, 1.0}, 1e-9, CouplingUpdate::PerStage, work);
    CHECK(j.jx == 0.0);
    CHECK(j.jy == 0.0);

    Ensemble frozen(Ensemble::Physics{0.0, kKappa, mhz_to_angular(3.0)});
    frozen.add(atom_at(1.0, -1.0, 1.0));
    frozen.add(atom_at(-1.0, -1.0, -1.0));
    Rng rng(2);
    for (int k = 0; k < 100; ++k) rk4_step(frozen, sample_noise(1e-9, rng, true), 1e-9, CouplingUpdate::PerStage, work);
    CHECK(frozen.atom(0).sx == 1.0);
    CHECK(frozen.atom(0).sz == 1.0);
    CHECK(frozen.atom(1).sy == -1.0);
    CHECK(frozen.atom(1).sz == -1.0);
}

TEST_CASE("an inverted ensemble without seed coherence relaxes monotonically") {
    Ensemble ens(Ensemble::Physics{kG, kKappa, 0.0});
    for (int i = 0; i < 500; ++i) ens.add(atom_at(0.0, 0.0, 1.0));
    Rk4Workspace work;
    double previous = ens.total_inversion();
    bool monotone = true;
    for (int k = 0; k < 2000; ++k) {
        rk4_step(ens, {}, 2e-9, CouplingUpdate::PerStage, work);
        const double now = ens.total_inversion();
        monotone = monotone && now <= previous;
        previous = now;
    }
    CHECK(monotone);
    const double gc = derived_rates(0.0, kG, kKappa).gamma_c;
    CHECK(previous == doctest::Approx(500.0 * std::exp(-gc * 4e-6)).epsilon(1e-9));
}

TEST_CASE("frozen coupling differs from per-stage coupling only at higher order") {
    Ensemble a(Ensemble::Physics{kG, kKappa, 0.0});
    for (int i = 0; i < 50; ++i) a.add(atom_at(0.2, 0.1, 0.9));
    Ensemble b = a;
    Rk4Workspace work;
    for (int k = 0; k < 100; ++k) {
        rk4_step(a, {}, 2e-9, CouplingUpdate::PerStage, work);
        rk4_step(b, {}, 2e-9, CouplingUpdate::FrozenStep, work);
    }
    const double diff = std::abs(a.atom(0).sz - b.atom(0).sz);
    CHECK(diff > 0.0);
    CHECK(diff < 1e-3);
}

TEST_CASE("non-finite state raises a numerical error") {
    Ensemble ens(Ensemble::Physics{kG, kKappa, 0.0});
    ens.add(atom_at(std::nan(""), 0.0, 1.0));
    Rk4Workspace work;
    CHECK_THROWS_AS(rk4_step(ens, {}, 1e-9, CouplingUpdate::PerStage, work), NumericalError);
}

TEST_CASE("field noise statistics") {
    Rng rng(123);
    const NoiseSample off = sample_noise(1e-9, rng, false);
    CHECK(off.xi_p == 0.0);
    CHECK(off.xi_q == 0.0);
    const double dt = 2e-9;
    const int n = 1000000;
    double pp = 0.0, qq = 0.0, pq = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto s = sample_noise(dt, rng, true);
        pp += s.xi_p * s.xi_p;
        qq += s.xi_q * s.xi_q;
        pq += s.xi_p * s.xi_q;
    }
    CHECK(pp / n * dt == doctest::Approx(1.0).epsilon(0.01));
    CHECK(qq / n * dt == doctest::Approx(1.0).epsilon(0.01));
    const double corr = pq / std::sqrt(pp * qq);
    CHECK(std::abs(corr) < 3.0 / std::sqrt(n));
}

TEST_CASE("photon number from the collective spin") {
    const auto r0 = derived_rates(0.0, kG, kKappa);
    CHECK(photon_number({0.0, 0.0}, r0, kG) == 0.0);
    // |J-|^2 = 1 on resonance gives g^2 / (kappa/2)^2 = Gamma_0 / kappa.
    CHECK(photon_number({2.0, 0.0}, r0, kG) == doctest::Approx(r0.gamma_0 / kKappa).epsilon(1e-14));
    const double d = mhz_to_angular(17.0);
    const auto r = derived_rates(d, kG, kKappa);
    CHECK(photon_number({1.0, 3.0}, r, kG) ==
          doctest::Approx(kG * kG / (d * d + 0.25 * kKappa * kKappa) * 10.0 / 4.0).epsilon(1e-13));
}

TEST_CASE("trajectories are deterministic and an empty record is allowed") {
    auto cfg = test::small_config();
    cfg.numerics.t_record = 5e-6;
    const auto a = run_trajectory(cfg);
    const auto b = run_trajectory(cfg);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == 200);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.j_plus[k] == b.j_plus[k]);
        CHECK(a.n_phot[k] == b.n_phot[k]);
        CHECK(a.n_phot[k] >= 0.0);
    }
    CHECK(a.t[1] - a.t[0] == doctest::Approx(a.sample_interval));
    cfg.numerics.seed += 1;
    CHECK(run_trajectory(cfg).j_plus.back() != a.j_plus.back());
    cfg.numerics.t_record = 0.0;
    CHECK(run_trajectory(cfg).empty());
}

TEST_CASE("with zero coupling the recorded spin is a sum of frozen projections") {
    auto cfg = test::small_config();
    cfg.g = 0.0;
    cfg.numerics.t_record = 2e-6;
    TrajectoryStats stats;
    const auto rec = run_trajectory(cfg, &stats);
    for (std::size_t k = 0; k < rec.size(); ++k) {
        // Sums of +-1 halves: J+ components are integers or half-integers.
        CHECK(std::fmod(std::abs(2.0 * rec.j_plus[k].real()), 1.0) == 0.0);
        CHECK(rec.n_phot[k] == 0.0);
    }
    CHECK(stats.mean_atoms == doctest::Approx(cfg.n_mean).epsilon(0.15));
}
