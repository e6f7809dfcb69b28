#include "srlaser/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "srlaser/error.hpp"

#ifndef SRLASER_VERSION
#define SRLASER_VERSION "unknown"
#endif

namespace srlaser {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.17g}", v);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& value) {
    if (value == "nan") return kNaN;
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("metrics key '{}' is not a number: '{}'", key, value));
}

const std::string& lookup(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(fmt::format("metrics file lacks '{}'", key));
    return it->second;
}

double to_double(const std::map<std::string, std::string>& kv, const std::string& key) {
    return parse_number(key, lookup(kv, key));
}

bool to_bool(const std::map<std::string, std::string>& kv, const std::string& key) {
    const auto& v = lookup(kv, key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(fmt::format("metrics key '{}' is not a boolean: '{}'", key, v));
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

RunMetrics::RunMetrics()
    : central_offset_hz(kNaN),
      central_fwhm_hz(kNaN),
      central_raw_fwhm_hz(kNaN),
      central_height(kNaN),
      central_fit_bin_hz(kNaN),
      side_lower_freq_hz(kNaN),
      side_lower_height(kNaN),
      side_upper_freq_hz(kNaN),
      side_upper_height(kNaN),
      contrast(kNaN),
      spectrum_shift_hz(kNaN),
      central_photon_number(kNaN),
      pulling_P(kNaN) {}

std::string format_metrics(const RunMetrics& m) {
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };
    auto yes = [](bool b) { return std::string(b ? "true" : "false"); };
    line("config_hash", m.config_hash);
    line("seed", std::to_string(m.seed));
    line("bin_width_hz", num(m.bin_width_hz));
    line("spectral_floor", num(m.spectral_floor));
    line("central_found", yes(m.central_found));
    line("central_offset_hz", num(m.central_offset_hz));
    line("central_fwhm_hz", num(m.central_fwhm_hz));
    line("central_raw_fwhm_hz", num(m.central_raw_fwhm_hz));
    line("central_height", num(m.central_height));
    line("central_fit_bin_hz", num(m.central_fit_bin_hz));
    line("central_fit_converged", yes(m.central_fit_converged));
    line("central_resolution_limited", yes(m.central_resolution_limited));
    line("side_peak_freqs", fmt::format("{},{}", num(m.side_lower_freq_hz), num(m.side_upper_freq_hz)));
    line("side_peak_heights", fmt::format("{},{}", num(m.side_lower_height), num(m.side_upper_height)));
    line("contrast", num(m.contrast));
    line("spectrum_shift_hz", num(m.spectrum_shift_hz));
    line("photon_number_mean", num(m.photon_number_mean));
    line("central_photon_number", num(m.central_photon_number));
    line("mean_atoms", num(m.mean_atoms));
    line("mean_inversion", num(m.mean_inversion));
    line("pulling_P", num(m.pulling_P));
    return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        const std::string text_line = trim(raw);
        if (text_line.empty() || text_line[0] == '#') continue;
        const auto eq = text_line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("malformed key-value line '{}'", text_line));
        kv[trim(text_line.substr(0, eq))] = trim(text_line.substr(eq + 1));
    }
    return kv;
}

RunMetrics parse_metrics(const std::string& text) {
    const auto kv = parse_key_values(text);
    auto pair = [&](const std::string& key) {
        const auto& v = lookup(kv, key);
        const auto comma = v.find(',');
        if (comma == std::string::npos) throw ConfigError(fmt::format("metrics key '{}' needs two values", key));
        return std::pair{parse_number(key, v.substr(0, comma)), parse_number(key, v.substr(comma + 1))};
    };
    RunMetrics m;
    m.config_hash = lookup(kv, "config_hash");
    try {
        m.seed = std::stoull(lookup(kv, "seed"));
    } catch (const std::logic_error&) {
        throw ConfigError("metrics key 'seed' is not an unsigned integer");
    }
    m.bin_width_hz = to_double(kv, "bin_width_hz");
    m.spectral_floor = to_double(kv, "spectral_floor");
    m.central_found = to_bool(kv, "central_found");
    m.central_offset_hz = to_double(kv, "central_offset_hz");
    m.central_fwhm_hz = to_double(kv, "central_fwhm_hz");
    m.central_raw_fwhm_hz = to_double(kv, "central_raw_fwhm_hz");
    m.central_height = to_double(kv, "central_height");
    m.central_fit_bin_hz = to_double(kv, "central_fit_bin_hz");
    m.central_fit_converged = to_bool(kv, "central_fit_converged");
    m.central_resolution_limited = to_bool(kv, "central_resolution_limited");
    std::tie(m.side_lower_freq_hz, m.side_upper_freq_hz) = pair("side_peak_freqs");
    std::tie(m.side_lower_height, m.side_upper_height) = pair("side_peak_heights");
    m.contrast = to_double(kv, "contrast");
    m.spectrum_shift_hz = to_double(kv, "spectrum_shift_hz");
    m.photon_number_mean = to_double(kv, "photon_number_mean");
    m.central_photon_number = to_double(kv, "central_photon_number");
    m.mean_atoms = to_double(kv, "mean_atoms");
    m.mean_inversion = to_double(kv, "mean_inversion");
    m.pulling_P = to_double(kv, "pulling_P");
    return m;
}

std::string format_field_record(const FieldRecord& rec, const std::string& config_hash, std::uint64_t seed) {
    std::string out = fmt::format("# config_hash={} seed={} sample_interval_s={}\n", config_hash, seed,
                                  num(rec.sample_interval));
    out += "t_s\tre_j_plus\tim_j_plus\tn_phot\n";
    out.reserve(out.size() + rec.size() * 80);
    for (std::size_t k = 0; k < rec.size(); ++k)
        fmt::format_to(std::back_inserter(out), "{:.9g}\t{:.9g}\t{:.9g}\t{:.9g}\n", rec.t[k], rec.j_plus[k].real(),
                       rec.j_plus[k].imag(), rec.n_phot[k]);
    return out;
}

std::string format_spectrum(const Spectrum& spec, const std::string& config_hash, std::uint64_t seed) {
    std::string out =
        fmt::format("# config_hash={} seed={} bin_width_hz={}\n", config_hash, seed, num(spec.bin_width));
    out += "freq_hz\tpsd\n";
    out.reserve(out.size() + spec.size() * 40);
    for (std::size_t k = 0; k < spec.size(); ++k)
        fmt::format_to(std::back_inserter(out), "{:.12g}\t{:.17g}\n", spec.freq[k], spec.psd[k]);
    return out;
}

Spectrum parse_spectrum(const std::string& text) {
    Spectrum s;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (trim(line) != "freq_hz\tpsd") throw ConfigError(fmt::format("unexpected spectrum header '{}'", line));
            header = true;
            continue;
        }
        double f = 0.0;
        double p = 0.0;
        if (std::sscanf(line.c_str(), "%lf\t%lf", &f, &p) != 2)
            throw ConfigError(fmt::format("malformed spectrum row '{}'", line));
        s.freq.push_back(f);
        s.psd.push_back(p);
    }
    if (!header) throw ConfigError("spectrum table has no header");
    if (s.size() > 1) s.bin_width = s.freq[1] - s.freq[0];
    return s;
}

std::string format_manifest(const RunManifest& m) {
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };
    line("config_hash", m.config_hash);
    line("seed", std::to_string(m.seed));
    line("code_version", m.code_version);
    line("config_source", m.config_source);
    line("overrides", join(m.overrides, ";"));
    line("start_time", m.start_time);
    line("end_time", m.end_time);
    line("wall_seconds", fmt::format("{:.3f}", m.wall_seconds));
    line("outputs", join(m.outputs, ","));
    for (std::size_t i = 0; i < m.warnings.size(); ++i) line(fmt::format("warning_{}", i + 1), m.warnings[i]);
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string code_version() { return SRLASER_VERSION; }

std::string utc_timestamp() {
    const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

}  // namespace srlaser
