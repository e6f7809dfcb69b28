#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace srlaser {

enum class PumpScheme { DetunedSingle, ModulatedResonant, ModulatedOffset };
enum class CouplingMode { Uniform, RandomGaussianMode };
enum class ArrivalMode { Poisson, Deterministic };
enum class SpectralWindow { None, Hann };

// All frequencies below are angular (rad/s), all times in seconds.

struct PumpConfig {
    PumpScheme scheme = PumpScheme::ModulatedResonant;
    double omega = 0.0;         // Rabi frequency
    double tau_p = 0.0;         // pump interaction time
    double delta_pa = 0.0;      // pump-atom detuning, or modulation frequency
    double delta_offset = 0.0;  // carrier detuning (ModulatedOffset only)
    double linewidth = 0.0;     // pump laser linewidth
    bool use_exact = true;

    double pulse_area() const { return omega * tau_p; }
};

struct BeamConfig {
    double doppler_width = 0.0;  // standard deviation of k*v_tr
    double doppler_mean = 0.0;
    CouplingMode coupling_mode = CouplingMode::Uniform;
    ArrivalMode arrival = ArrivalMode::Poisson;
};

struct NumericsConfig {
    double dt = 1e-9;
    double t_burn = 0.0;
    double t_record = 0.0;
    int record_stride = 1;
    std::uint64_t seed = 1;
    bool noise_on = true;
    bool paper_literal = false;  // freeze J over the whole RK4 step
    bool keep_imag_term = false;
};

struct AnalysisConfig {
    double max_lag = 0.0;  // 0 selects t_record / 4
    SpectralWindow window = SpectralWindow::None;
    double peak_threshold = 10.0;  // minimum height over the median floor
    double side_window_fraction = 0.25;
    double linewidth_bins = 16.0;  // target bins per FWHM for the line fit; 0 fits at max_lag only
};

struct SimConfig {
    double kappa = 0.0;
    double g = 0.0;
    double delta_ca = 0.0;
    double tau = 0.0;
    double n_mean = 0.0;
    PumpConfig pump;
    BeamConfig beam;
    NumericsConfig numerics;
    AnalysisConfig analysis;

    double injection_rate() const { return n_mean / tau; }
    double effective_max_lag() const;
};

/// Checks every invariant; throws ConfigError on violation and returns
/// soft warnings (bad-cavity condition, pump validity regimes).
std::vector<std::string> validate(const SimConfig& cfg);

/// Flat "section.key" -> value view of a config file, in file order.
class ConfigDocument {
public:
    static ConfigDocument parse(std::string_view text);
    static ConfigDocument load(const std::string& path);

    /// Applies "section.key=value"; the key must belong to the schema.
    void apply_override(std::string_view assignment);
    void set(const std::string& key, const std::string& value);
    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    SimConfig to_config() const;

private:
    std::map<std::string, std::string> values_;
};

/// Every accepted "section.key".
const std::vector<std::string>& config_schema_keys();

/// Canonical text rendering of a resolved config (round-trips through
/// ConfigDocument::parse). Used for config echo and hashing.
std::string canonical_text(const SimConfig& cfg);

/// FNV-1a over the canonical text excluding the seed.
std::uint64_t config_hash(const SimConfig& cfg);
std::string hash_hex(std::uint64_t h);

std::string_view to_string(PumpScheme s);
std::string_view to_string(CouplingMode m);
std::string_view to_string(ArrivalMode m);
std::string_view to_string(SpectralWindow w);

}  // namespace srlaser
