#include <doctest.h>

#include <cmath>
#include <numbers>

#include "srlaser/config.hpp"
#include "srlaser/error.hpp"
#include "srlaser/units.hpp"
#include "support.hpp"

using namespace srlaser;

TEST_CASE("config file values convert to angular units and seconds") {
    const auto c = test::small_config();
    CHECK(c.kappa == doctest::Approx(kTwoPi * 50e6));
    CHECK(c.g == doctest::Approx(kTwoPi * 0.25e6));
    CHECK(c.tau == doctest::Approx(0.4e-6));
    CHECK(c.n_mean == 200.0);
    CHECK(c.pump.tau_p == doctest::Approx(0.0414e-6));
    CHECK(c.pump.linewidth == doctest::Approx(kTwoPi * 20e3));
    CHECK(c.numerics.dt == doctest::Approx(5e-9));
    CHECK(c.numerics.record_stride == 5);
    CHECK(c.numerics.seed == 9);
    CHECK(c.injection_rate() == doctest::Approx(200.0 / 0.4e-6));
}

TEST_CASE("defaults") {
    const auto c = test::small_config();
    CHECK(c.beam.doppler_width == doctest::Approx(kTwoPi * 0.1 / 0.4e-6));
    CHECK(c.beam.doppler_mean == 0.0);
    CHECK(c.beam.coupling_mode == CouplingMode::Uniform);
    CHECK(c.beam.arrival == ArrivalMode::Poisson);
    CHECK(c.pump.use_exact);
    CHECK(c.numerics.noise_on);
    CHECK_FALSE(c.numerics.paper_literal);
    CHECK(c.analysis.window == SpectralWindow::None);
    CHECK(c.effective_max_lag() == doctest::Approx(c.numerics.t_record / 4.0));
    auto doc = ConfigDocument::parse(test::small_config_text());
    doc.set("pump.linewidth_khz", "20");
    CHECK(doc.to_config().pump.linewidth == c.pump.linewidth);
}

TEST_CASE("unknown keys and keys outside sections are errors") {
    CHECK_THROWS_AS(ConfigDocument::parse(test::small_config_text() + "\n[cavity2]\nfoo = 1\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("kappa_mhz = 50\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("[cavity]\nkappa = 50\n"), ConfigError);
    auto doc = ConfigDocument::parse(test::small_config_text());
    CHECK_THROWS_AS(doc.apply_override("cavity.kapa_mhz=3"), ConfigError);
    CHECK_THROWS_AS(doc.apply_override("cavity.kappa_mhz"), ConfigError);
}

TEST_CASE("missing required keys and malformed values") {
    CHECK_THROWS_AS(ConfigDocument::parse("[cavity]\nkappa_mhz = 50\n").to_config(), ConfigError);
    auto doc = ConfigDocument::parse(test::small_config_text());
    doc.set("cavity.g_mhz", "0.25x");
    CHECK_THROWS_AS(doc.to_config(), ConfigError);
    doc = ConfigDocument::parse(test::small_config_text());
    doc.set("pump.scheme", "laser");
    CHECK_THROWS_AS(doc.to_config(), ConfigError);
    doc = ConfigDocument::parse(test::small_config_text());
    doc.set("numerics.record_stride", "0");
    CHECK_THROWS_AS(doc.to_config(), ConfigError);
}

TEST_CASE("pulse area and pump time are alternative spellings") {
    auto doc = ConfigDocument::parse(test::small_config_text());
    doc.apply_override("pump.pulse_area_pi=0.96");
    const auto c = doc.to_config();
    CHECK(c.pump.pulse_area() == doctest::Approx(0.96 * std::numbers::pi).epsilon(1e-14));
    doc.apply_override("pump.tau_p_us=0.04");
    CHECK(doc.to_config().pump.tau_p == doctest::Approx(0.04e-6));
    auto both = test::small_config_text() + "pulse_area_pi = 1\n";
    // Appended under [numerics], so it is an unknown key there.
    CHECK_THROWS_AS(ConfigDocument::parse(both), ConfigError);
}

TEST_CASE("validation rejects broken invariants") {
    auto broken = [](auto mutate) {
        auto c = test::small_config();
        mutate(c);
        return c;
    };
    CHECK_NOTHROW(validate(test::small_config()));
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.kappa = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.g = -1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.tau = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.n_mean = 0.5; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.pump.omega = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.pump.tau_p = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.beam.doppler_width = -1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.numerics.dt = c.tau / 40.0; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) {
                        c.n_mean = 1e5;  // Gamma_0 N dt ~ 16
                    })),
                    ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) { c.analysis.max_lag = c.numerics.t_record; })), ConfigError);
    CHECK_THROWS_AS(validate(broken([](SimConfig& c) {
                        c.pump.scheme = PumpScheme::ModulatedOffset;
                        c.pump.delta_offset = 2.0 * c.pump.delta_pa;
                    })),
                    ConfigError);
}

TEST_CASE("validation warnings") {
    auto c = test::small_config();
    c.n_mean = 1000;  // kappa / (sqrt(N) g) = 6.3
    c.numerics.dt = 0.5e-9;
    auto w = validate(c);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("bad-cavity") != std::string::npos);

    c = test::small_config();
    c.pump.scheme = PumpScheme::DetunedSingle;
    c.pump.delta_pa = c.pump.omega / 2.0;
    c.numerics.dt = 1e-9;
    w = validate(c);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("omega") != std::string::npos);

    c = test::small_config();
    c.numerics.record_stride = 50;  // 250 ns sampling, Nyquist 2 MHz
    w = validate(c);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("Nyquist") != std::string::npos);
}

TEST_CASE("canonical text round-trips and the hash ignores only the seed") {
    const auto c = test::small_config();
    const auto again = ConfigDocument::parse(canonical_text(c)).to_config();
    CHECK(canonical_text(again) == canonical_text(c));
    CHECK(config_hash(again) == config_hash(c));

    auto reseeded = c;
    reseeded.numerics.seed = 12345;
    CHECK(config_hash(reseeded) == config_hash(c));

    auto doc = ConfigDocument::parse(test::small_config_text());
    doc.apply_override("cavity.delta_ca_mhz=10");
    CHECK(config_hash(doc.to_config()) != config_hash(c));
    CHECK(hash_hex(config_hash(c)).size() == 16);
}

TEST_CASE("enum names") {
    CHECK(to_string(PumpScheme::DetunedSingle) == "detuned_single");
    CHECK(to_string(PumpScheme::ModulatedResonant) == "modulated_resonant");
    CHECK(to_string(PumpScheme::ModulatedOffset) == "modulated_offset");
    CHECK(to_string(CouplingMode::RandomGaussianMode) == "random_gaussian_mode");
    CHECK(to_string(ArrivalMode::Deterministic) == "deterministic");
    CHECK(to_string(SpectralWindow::Hann) == "hann");
}
