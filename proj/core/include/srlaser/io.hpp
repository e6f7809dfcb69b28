#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srlaser/config.hpp"
#include "srlaser/dynamics.hpp"
#include "srlaser/spectrum.hpp"

namespace srlaser {

/// Scalar readouts of one run. Absent quantities are NaN and are written as
/// "nan".
struct RunMetrics {
    std::string config_hash;
    std::uint64_t seed = 0;
    double bin_width_hz = 0.0;
    double spectral_floor = 0.0;

    bool central_found = false;
    double central_offset_hz;
    double central_fwhm_hz;
    double central_raw_fwhm_hz;
    double central_height;
    double central_fit_bin_hz;  // resolution of the spectrum the line was fitted on
    bool central_fit_converged = false;
    bool central_resolution_limited = false;

    double side_lower_freq_hz;
    double side_lower_height;
    double side_upper_freq_hz;
    double side_upper_height;
    double contrast;
    double spectrum_shift_hz;  // midpoint of the two side peaks

    double photon_number_mean = 0.0;
    double central_photon_number;  // share of the photon number in the central line
    double mean_atoms = 0.0;
    double mean_inversion = 0.0;
    double pulling_P;  // only filled by sweep summaries

    RunMetrics();
};

/// Metrics file: one "key = value" line per field, fixed order.
std::string format_metrics(const RunMetrics& m);
RunMetrics parse_metrics(const std::string& text);

/// Field record table: header comment with hash and seed, then
/// t_s, re_j_plus, im_j_plus, n_phot.
std::string format_field_record(const FieldRecord& rec, const std::string& config_hash, std::uint64_t seed);
/// Spectrum table: freq_hz, psd.
std::string format_spectrum(const Spectrum& spec, const std::string& config_hash, std::uint64_t seed);
Spectrum parse_spectrum(const std::string& text);

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string code_version;
    std::string config_source;
    std::vector<std::string> overrides;
    std::string start_time;  // UTC, ISO 8601
    std::string end_time;
    double wall_seconds = 0.0;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
};

std::string format_manifest(const RunManifest& m);

/// Flat "key = value" reader shared by the metrics and manifest formats.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Writes via a temporary file and rename so readers never see partial files.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

std::string code_version();
std::string utc_timestamp();

}  // namespace srlaser
