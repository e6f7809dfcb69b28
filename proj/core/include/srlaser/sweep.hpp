#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srlaser/config.hpp"
#include "srlaser/dynamics.hpp"
#include "srlaser/io.hpp"
#include "srlaser/spectrum.hpp"

namespace srlaser {

/// Everything one trajectory produces.
struct RunResult {
    SimConfig config;
    FieldRecord record;
    TrajectoryStats stats;
    SpectrumResult spectrum;
    RunMetrics metrics;
};

/// Simulates and analyses one validated config.
RunResult execute_run(const SimConfig& cfg);

/// Scalar readouts from a finished trajectory and its spectrum.
RunMetrics compute_metrics(const SimConfig& cfg, const SpectrumResult& spec, const TrajectoryStats& stats);

struct RunOutputs {
    bool write_field = true;
    bool write_spectrum = true;
};

/// Writes config echo, field record, spectrum, metrics and manifest into
/// dir (created if needed). Returns the written file names.
std::vector<std::string> write_run_outputs(const std::filesystem::path& dir, const RunResult& run,
                                           RunManifest manifest, const RunOutputs& what = {});

/// Writes diagnostics.txt after a failed run.
void write_diagnostics(const std::filesystem::path& dir, const SimConfig& cfg, const std::string& message);

/// One swept parameter: a config key and its values in sweep order.
struct SweepAxis {
    std::string key;
    std::vector<std::string> values;

    /// "key=v1,v2,..." or "key=start:stop:count" (inclusive, linear).
    static SweepAxis parse(std::string_view text);
};

struct SweepSpec {
    std::vector<SweepAxis> axes;
    int repeats = 1;
    std::uint64_t base_seed = 1;

    std::size_t point_count() const;  // product of axis sizes times repeats
};

struct SweepPoint {
    std::size_t index = 0;  // position in the expansion, seeds derive from it
    std::vector<std::string> values;
    int replica = 0;
    std::uint64_t seed = 0;

    std::vector<std::string> overrides(const SweepSpec& spec) const;
};

/// Per-point artifact directory name ("point_00012").
std::string point_dir_name(std::size_t index);

/// Cartesian expansion, last axis fastest, replicas innermost.
std::vector<SweepPoint> expand(const SweepSpec& spec);

struct SweepRow {
    SweepPoint point;
    bool ok = false;
    std::string error;
    std::optional<SimConfig> config;  // absent when the point failed to resolve
    RunMetrics metrics;
};

struct SweepOptions {
    unsigned parallel = 1;
    std::optional<std::filesystem::path> point_dir;  // per-point artifacts when set
    RunOutputs outputs{false, true};
    std::function<void(const SweepRow&)> on_point_done;  // called under a lock
};

/// Runs every point; a failing point is recorded in its row. Rows come back
/// sorted by axis values (numerically where possible), then replica.
std::vector<SweepRow> run_sweep(const ConfigDocument& base, const SweepSpec& spec, const SweepOptions& options = {});

/// Tab-separated aggregate table, one row per point.
std::string format_aggregate(const SweepSpec& spec, const std::vector<SweepRow>& rows);

struct PullingRow {
    std::vector<std::string> values;  // non-detuning axis values
    int replica = 0;
    std::size_t points = 0;
    bool ok = false;
    PullingFit fit;
    double p_kappa_tau = 0.0;
    double n_mean = 0.0;
    double n_tau_gamma_c = 0.0;  // N tau Gamma_c at resonance (4 g^2 / kappa)
};

/// Groups rows over the cavity.delta_ca_mhz axis and fits a pulling
/// coefficient per group. Empty when that axis is not swept.
std::vector<PullingRow> pulling_summary(const SweepSpec& spec, const std::vector<SweepRow>& rows);
std::string format_pulling(const SweepSpec& spec, const std::vector<PullingRow>& rows);

/// A preset: a config plus the sweep it drives ([sweep] section with keys
/// axis1..axisN, repeats).
struct Preset {
    std::string name;
    ConfigDocument config;
    SweepSpec sweep;
};

Preset parse_preset(std::string_view name, std::string_view text);

}  // namespace srlaser
