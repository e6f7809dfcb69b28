#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "srlaser/pump.hpp"
#include "srlaser/pump_oracle.hpp"
#include "srlaser/units.hpp"

using namespace srlaser;
using std::numbers::pi;

namespace {

PumpConfig modulated(double omega_mhz, double delta_mhz, double tau_p_us, bool exact) {
    PumpConfig p;
    p.scheme = PumpScheme::ModulatedResonant;
    p.omega = mhz_to_angular(omega_mhz);
    p.delta_pa = mhz_to_angular(delta_mhz);
    p.tau_p = us_to_s(tau_p_us);
    p.use_exact = exact;
    return p;
}

PumpConfig single(double area, double delta) {
    PumpConfig p;
    p.scheme = PumpScheme::DetunedSingle;
    p.omega = mhz_to_angular(12.0);
    p.tau_p = area / p.omega;
    p.delta_pa = delta;
    return p;
}

void check_close(const BlochMean& a, const BlochMean& b, double tol) {
    CHECK(std::abs(a.sx - b.sx) < tol);
    CHECK(std::abs(a.sy - b.sy) < tol);
    CHECK(std::abs(a.sz - b.sz) < tol);
}

double max_abs_diff(const BlochMean& a, const BlochMean& b) {
    return std::max({std::abs(a.sx - b.sx), std::abs(a.sy - b.sy), std::abs(a.sz - b.sz)});
}

}  // namespace

TEST_CASE("resonant pi pulse fully inverts") {
    check_close(prep_detuned_single(single(pi, 0.0), 0.0), {0.0, 0.0, 1.0}, 1e-15);
    auto p = modulated(12.0, 0.0, 0.5 / 12.0, true);  // area pi, no modulation
    check_close(prep_modulated(p, 0.37e-6), {0.0, 0.0, 1.0}, 1e-12);
}

TEST_CASE("quarter pulse lies on the equator") {
    check_close(prep_detuned_single(single(0.5 * pi, 0.0), 0.0), {0.0, -1.0, 0.0}, 1e-15);
}

TEST_CASE("population 0.8 needs a 0.7048 pi pulse") {
    // Root of (1 - cos x) / 2 = 0.8 by bisection.
    double lo = 0.5 * pi;
    double hi = pi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((1.0 - std::cos(mid)) / 2.0 < 0.8 ? lo : hi) = mid;
    }
    CHECK(lo / pi == doctest::Approx(0.7048).epsilon(1e-4));
    const auto s = prep_detuned_single(single(lo, 0.0), 0.0);
    CHECK(s.sz == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(std::hypot(s.sx, s.sy) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(s.excited_population() == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("modulation node leaves the atom in the ground state (approximate form)") {
    const auto p = modulated(12.0, 2.0, 0.0414, false);
    const double t0 = 0.5 * pi / p.delta_pa;
    check_close(prep_modulated(p, t0), {0.0, 0.0, -1.0}, 1e-12);
}

TEST_CASE("exact and approximate modulated areas at the published pump") {
    // A = (Omega / Delta) [sin(Delta (t0 + tau_p)) - sin(Delta t0)] at t0 = 0.
    const auto exact = modulated(12.0, 2.0, 0.0414, true);
    const double a = exact.omega / exact.delta_pa * std::sin(exact.delta_pa * exact.tau_p);
    CHECK(prep_modulated(exact, 0.0).sz == doctest::Approx(-std::cos(a)).epsilon(1e-13));
    CHECK(prep_modulated(exact, 0.0).sz == doctest::Approx(0.987).epsilon(5e-4));
    const auto approx = modulated(12.0, 2.0, 0.0414, false);
    CHECK(prep_modulated(approx, 0.0).sz == doctest::Approx(0.9998).epsilon(1e-4));
    // The exact form is the solution of the modulated Bloch equations.
    check_close(prep_modulated(exact, 0.0), bloch_ode_oracle(exact, 0.0), 1e-9);
}

TEST_CASE("exact modulated area is continuous as the modulation vanishes") {
    auto p = modulated(12.0, 1e-9, 0.0414, true);
    const double limit = p.omega * p.tau_p;
    CHECK(modulated_pulse_area(p, 0.0) == doctest::Approx(limit).epsilon(1e-12));
    p.delta_pa = 0.0;
    CHECK(modulated_pulse_area(p, 0.0) == doctest::Approx(limit).epsilon(1e-15));
}

TEST_CASE("offset scheme without carrier detuning equals the resonant scheme") {
    for (bool exact : {true, false}) {
        auto p = modulated(12.0, 2.0, 0.0414, exact);
        auto q = p;
        q.scheme = PumpScheme::ModulatedOffset;
        q.delta_offset = 0.0;
        for (double t0 : {0.0, 0.1e-6, 0.33e-6}) {
            check_close(prep_modulated_offset(q, t0, 0.0), prep_modulated(p, t0, 0.0), 1e-15);
            // Phase noise also enters the carrier phase, so only the
            // inversion and the transverse magnitude still coincide.
            const auto a = prep_modulated_offset(q, t0, 0.07);
            const auto b = prep_modulated(p, t0, 0.07);
            CHECK(a.sz == doctest::Approx(b.sz).epsilon(1e-15));
            CHECK(std::hypot(a.sx, a.sy) == doctest::Approx(std::hypot(b.sx, b.sy)).epsilon(1e-14));
        }
    }
}

TEST_CASE("offset scheme example point") {
    // delta t0 = pi/2 and B = pi/2 -> (+1, 0, 0).
    PumpConfig p;
    p.scheme = PumpScheme::ModulatedOffset;
    p.use_exact = false;
    p.delta_pa = 0.0;
    p.omega = mhz_to_angular(12.0);
    p.tau_p = 0.5 * pi / p.omega;
    p.delta_offset = mhz_to_angular(0.03);
    const double t0 = 0.5 * pi / p.delta_offset;
    check_close(prep_modulated_offset(p, t0), {1.0, 0.0, 0.0}, 1e-12);
}

TEST_CASE("oracle reproduces the resonant Rabi solution") {
    auto p = modulated(12.0, 0.0, 0.031, true);
    const double a = p.omega * p.tau_p;
    check_close(bloch_ode_oracle(p, 0.2e-6), {0.0, -std::sin(a), -std::cos(a)}, 1e-9);
}

TEST_CASE("oracle preserves the Bloch vector norm") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        PumpConfig p = modulated(5.0 + 10.0 * u(rng), 3.0 * u(rng), 0.02 + 0.05 * u(rng), true);
        p.scheme = static_cast<PumpScheme>(i % 3);
        p.delta_offset = mhz_to_angular(0.1 * u(rng));
        const auto s = bloch_ode_oracle(p, 1e-6 * u(rng), u(rng));
        CHECK(std::abs(s.norm2() - 1.0) < 1e-10);
    }
}

TEST_CASE("frame rotation keeps the transverse magnitude") {
    const BlochMean s{0.3, -0.4, 0.2};
    for (double angle : {0.0, 0.5, 2.0, -7.0}) {
        const auto r = rotate_to_atom_frame(s, angle);
        CHECK(std::hypot(r.sx, r.sy) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(r.sz == s.sz);
    }
}

TEST_CASE("closed forms never leave the unit ball") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        PumpConfig p = modulated(1.0 + 20.0 * u(rng), 4.0 * u(rng), 0.1 * u(rng), i % 2 == 0);
        p.scheme = static_cast<PumpScheme>(i % 3);
        p.delta_offset = mhz_to_angular(0.05 * u(rng));
        CHECK(prepare(p, 1e-5 * u(rng), u(rng)).norm2() <= 1.0 + 1e-9);
    }
}

TEST_CASE("approximate modulated form converges to the oracle as tau_p shrinks") {
    // At fixed pulse area, the error of A -> Omega cos(Delta t0) tau_p is
    // second order in Delta tau_p at modulation antinodes and first order
    // elsewhere (it misses the (Omega tau_p)(Delta tau_p / 2) sin(Delta t0) term).
    const double area = 0.9 * pi;
    const double delta = mhz_to_angular(2.0);
    auto error_at = [&](double tau_p, double t0) {
        PumpConfig p;
        p.scheme = PumpScheme::ModulatedResonant;
        p.use_exact = false;
        p.delta_pa = delta;
        p.tau_p = tau_p;
        p.omega = area / tau_p;
        return max_abs_diff(prep_modulated(p, t0), bloch_ode_oracle(p, t0));
    };
    const double tau_p = 0.004e-6;
    const double antinode = 0.0;
    const double e1 = error_at(tau_p, antinode);
    const double e2 = error_at(0.5 * tau_p, antinode);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    const double generic = 0.3 / delta;
    const double g1 = error_at(tau_p, generic);
    const double g2 = error_at(0.5 * tau_p, generic);
    CHECK(g1 / g2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("phase noise statistics and determinism") {
    Rng any(1);
    CHECK(sample_phase_noise(0.0, 1e-7, any) == 0.0);
    CHECK_THROWS_AS(sample_phase_noise(-1.0, 1e-7, any), std::invalid_argument);

    const double linewidth = khz_to_angular(20.0);
    const double tau_p = us_to_s(0.0414);
    const double expected = std::sqrt(linewidth * tau_p);
    CHECK(expected == doctest::Approx(0.0722).epsilon(1e-3));
    Rng rng(42);
    const int n = 100000;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_phase_noise(linewidth, tau_p, rng);
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    CHECK(sd == doctest::Approx(expected).epsilon(0.01));
    CHECK(std::abs(mean) < 4.0 * expected / std::sqrt(n));

    Rng a(7), b(7), c(8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = sample_phase_noise(linewidth, tau_p, a);
        CHECK(x == sample_phase_noise(linewidth, tau_p, b));
        differs |= x != sample_phase_noise(linewidth, tau_p, c);
    }
    CHECK(differs);
}
