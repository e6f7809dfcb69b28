#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "srlaser/rates.hpp"
#include "srlaser/units.hpp"

using namespace srlaser;

namespace {
const double kKappa = mhz_to_angular(50.0);
const double kG = mhz_to_angular(0.25);
}  // namespace

TEST_CASE("resonant collective rate is 5 kHz for the standard cavity") {
    const auto r = derived_rates(0.0, kG, kKappa);
    CHECK(angular_to_hz(r.gamma_c) == doctest::Approx(5000.0).epsilon(1e-12));
    CHECK(r.gamma_delta == 0.0);
    CHECK(r.gamma_0 == doctest::Approx(4.0 * kG * kG / kKappa).epsilon(1e-14));
}

TEST_CASE("half-linewidth detuning gives equal dispersive and emission rates") {
    const auto r = derived_rates(0.5 * kKappa, kG, kKappa);
    CHECK(r.gamma_delta == doctest::Approx(r.gamma_c).epsilon(1e-14));
    CHECK(r.gamma_c == doctest::Approx(0.5 * r.gamma_0).epsilon(1e-14));
}

TEST_CASE("symmetry and ratio identity over a detuning grid") {
    for (int i = -50; i <= 50; ++i) {
        const double d = mhz_to_angular(2.0 * i);
        const auto p = derived_rates(d, kG, kKappa);
        const auto m = derived_rates(-d, kG, kKappa);
        CHECK(p.gamma_delta == doctest::Approx(-m.gamma_delta).epsilon(1e-14));
        CHECK(p.gamma_c == doctest::Approx(m.gamma_c).epsilon(1e-14));
        CHECK(p.gamma_c > 0.0);
        CHECK(p.gamma_c <= p.gamma_0 * (1.0 + 1e-15));
        if (i != 0) CHECK(p.gamma_delta / p.gamma_c == doctest::Approx(2.0 * d / kKappa).epsilon(1e-13));
    }
}

TEST_CASE("emission rate peaks on resonance at gamma_0") {
    double best = 0.0;
    double best_d = 1.0;
    for (int i = -400; i <= 400; ++i) {
        const double d = mhz_to_angular(0.25 * i);
        const auto r = derived_rates(d, kG, kKappa);
        if (r.gamma_c > best) {
            best = r.gamma_c;
            best_d = d;
        }
    }
    CHECK(best_d == 0.0);
    CHECK(best == doctest::Approx(derived_rates(0.0, kG, kKappa).gamma_0).epsilon(1e-15));
}

TEST_CASE("invalid inputs are rejected") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(derived_rates(0.0, kG, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(derived_rates(0.0, kG, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(derived_rates(nan, kG, kKappa), std::invalid_argument);
    CHECK_THROWS_AS(derived_rates(0.0, inf, kKappa), std::invalid_argument);
    CHECK_THROWS_AS(derived_rates(0.0, kG, inf), std::invalid_argument);
}
