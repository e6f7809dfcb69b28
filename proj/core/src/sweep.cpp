#include "srlaser/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "srlaser/error.hpp"
#include "srlaser/random.hpp"
#include "srlaser/units.hpp"

namespace srlaser {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> as_number(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

// Numeric values compare numerically and sort before text values.
bool value_less(const std::string& a, const std::string& b) {
    const auto na = as_number(a);
    const auto nb = as_number(b);
    if (na && nb) return *na < *nb;
    if (na != nb) return na.has_value();
    return a < b;
}

bool values_less(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), value_less);
}

std::string cell(double v) { return std::isnan(v) ? "nan" : fmt::format("{:.10g}", v); }

std::string sanitize(std::string s) {
    std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    return s;
}

}  // namespace

RunMetrics compute_metrics(const SimConfig& cfg, const SpectrumResult& r, const TrajectoryStats& stats) {
    RunMetrics m;
    m.config_hash = hash_hex(config_hash(cfg));
    m.seed = cfg.numerics.seed;
    m.bin_width_hz = r.spectrum.bin_width;
    m.spectral_floor = r.peaks.floor;
    m.photon_number_mean = stats.mean_photons;
    m.mean_atoms = stats.mean_atoms;
    m.mean_inversion = stats.mean_inversion;

    if (r.peaks.central && r.central) {
        m.central_found = true;
        m.central_offset_hz = r.central->offset;
        m.central_fwhm_hz = r.central->fwhm;
        m.central_raw_fwhm_hz = r.central->raw_fwhm;
        m.central_height = r.peaks.central->height;
        m.central_fit_bin_hz = r.central_bin_width;
        m.central_fit_converged = r.central->fit_converged;
        m.central_resolution_limited = r.central->resolution_limited;

        // Power above the floor within +-10 linewidths of the line, as a
        // share of the total, scales the mean photon number.
        const double spacing = angular_to_hz(std::abs(cfg.pump.delta_pa));
        double half = 10.0 * std::max(r.central->fwhm, r.spectrum.bin_width);
        if (spacing > 0.0) half = std::min(half, 0.25 * spacing);
        double line_power = 0.0;
        for (std::size_t k = 0; k < r.spectrum.size(); ++k)
            if (std::abs(r.spectrum.freq[k] - r.central->offset) <= half)
                line_power += (r.spectrum.psd[k] - r.peaks.floor) * r.spectrum.bin_width;
        const double total = r.spectrum.total_power();
        if (total > 0.0) m.central_photon_number = stats.mean_photons * std::max(line_power, 0.0) / total;
    }
    if (r.peaks.lower) {
        m.side_lower_freq_hz = r.peaks.lower->freq;
        m.side_lower_height = r.peaks.lower->height;
    }
    if (r.peaks.upper) {
        m.side_upper_freq_hz = r.peaks.upper->freq;
        m.side_upper_height = r.peaks.upper->height;
    }
    if (r.peaks.lower && r.peaks.upper) m.spectrum_shift_hz = 0.5 * (r.peaks.lower->freq + r.peaks.upper->freq);
    if (r.contrast) m.contrast = *r.contrast;
    return m;
}

RunResult execute_run(const SimConfig& cfg) {
    RunResult out;
    out.config = cfg;
    out.record = run_trajectory(cfg, &out.stats);
    out.spectrum = analyze(out.record, cfg);
    out.metrics = compute_metrics(cfg, out.spectrum, out.stats);
    return out;
}

std::vector<std::string> write_run_outputs(const std::filesystem::path& dir, const RunResult& run,
                                           RunManifest manifest, const RunOutputs& what) {
    std::filesystem::create_directories(dir);
    const auto& hash = run.metrics.config_hash;
    const auto seed = run.config.numerics.seed;
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& content) {
        write_text_file(dir / name, content);
        written.push_back(name);
    };
    put("config.cfg", canonical_text(run.config));
    if (what.write_field) put("field.tsv", format_field_record(run.record, hash, seed));
    if (what.write_spectrum) put("spectrum.tsv", format_spectrum(run.spectrum.spectrum, hash, seed));
    put("metrics.txt", format_metrics(run.metrics));
    manifest.config_hash = hash;
    manifest.seed = seed;
    manifest.outputs = written;
    manifest.outputs.push_back("manifest.txt");
    put("manifest.txt", format_manifest(manifest));
    return written;
}

void write_diagnostics(const std::filesystem::path& dir, const SimConfig& cfg, const std::string& message) {
    std::filesystem::create_directories(dir);
    std::string text = fmt::format("error = {}\nconfig_hash = {}\nseed = {}\ncode_version = {}\n\n", sanitize(message),
                                   hash_hex(config_hash(cfg)), cfg.numerics.seed, code_version());
    text += canonical_text(cfg);
    write_text_file(dir / "diagnostics.txt", text);
}

SweepAxis SweepAxis::parse(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("sweep axis '{}' is not key=values", text));
    SweepAxis axis;
    axis.key = trim(text.substr(0, eq));
    const auto& keys = config_schema_keys();
    if (std::find(keys.begin(), keys.end(), axis.key) == keys.end())
        throw ConfigError(fmt::format("sweep axis '{}' is not a config key", axis.key));
    const std::string body = trim(text.substr(eq + 1));
    if (std::count(body.begin(), body.end(), ':') == 2) {
        std::vector<std::string> parts;
        std::stringstream ss(body);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
        const auto start = as_number(parts[0]);
        const auto stop = as_number(parts[1]);
        const auto count = as_number(parts[2]);
        if (!start || !stop || !count || *count < 1 || *count != std::floor(*count))
            throw ConfigError(fmt::format("sweep range '{}' must be start:stop:count", body));
        const auto n = static_cast<int>(*count);
        for (int i = 0; i < n; ++i) {
            const double v = n == 1 ? *start : *start + (*stop - *start) * i / (n - 1);
            axis.values.push_back(fmt::format("{:.12g}", v));
        }
    } else {
        std::stringstream ss(body);
        for (std::string p; std::getline(ss, p, ',');) {
            auto v = trim(p);
            if (v.empty()) throw ConfigError(fmt::format("empty value in sweep axis '{}'", axis.key));
            axis.values.push_back(v);
        }
    }
    if (axis.values.empty()) throw ConfigError(fmt::format("sweep axis '{}' has no values", axis.key));
    return axis;
}

std::string point_dir_name(std::size_t index) { return fmt::format("point_{:05d}", index); }

std::size_t SweepSpec::point_count() const {
    std::size_t n = static_cast<std::size_t>(std::max(repeats, 0));
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<std::string> SweepPoint::overrides(const SweepSpec& spec) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < spec.axes.size(); ++i) out.push_back(spec.axes[i].key + "=" + values[i]);
    return out;
}

std::vector<SweepPoint> expand(const SweepSpec& spec) {
    if (spec.repeats < 1) throw ConfigError("sweep repeats must be >= 1");
    for (const auto& a : spec.axes)
        if (a.values.empty()) throw ConfigError(fmt::format("sweep axis '{}' has no values", a.key));
    std::vector<SweepPoint> points;
    const std::size_t total = spec.point_count();
    points.reserve(total);
    std::vector<std::size_t> digit(spec.axes.size(), 0);
    for (std::size_t index = 0; index < total; ++index) {
        const auto combo = index / static_cast<std::size_t>(spec.repeats);
        std::size_t rest = combo;
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            digit[a] = rest % spec.axes[a].values.size();
            rest /= spec.axes[a].values.size();
        }
        SweepPoint p;
        p.index = index;
        p.replica = static_cast<int>(index % static_cast<std::size_t>(spec.repeats));
        p.seed = derive_seed(spec.base_seed, index);
        for (std::size_t a = 0; a < spec.axes.size(); ++a) p.values.push_back(spec.axes[a].values[digit[a]]);
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<SweepRow> run_sweep(const ConfigDocument& base, const SweepSpec& spec, const SweepOptions& options) {
    const auto points = expand(spec);
    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    std::mutex done_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            SweepRow& row = rows[i];
            row.point = points[i];
            const auto start = std::chrono::steady_clock::now();
            RunManifest manifest;
            manifest.code_version = code_version();
            manifest.config_source = "sweep";
            manifest.overrides = row.point.overrides(spec);
            manifest.start_time = utc_timestamp();
            try {
                ConfigDocument doc = base;
                for (const auto& o : manifest.overrides) doc.apply_override(o);
                SimConfig cfg = doc.to_config();
                cfg.numerics.seed = row.point.seed;
                manifest.warnings = validate(cfg);
                row.config = cfg;
                const auto run = execute_run(cfg);
                row.metrics = run.metrics;
                row.ok = true;
                if (options.point_dir) {
                    manifest.end_time = utc_timestamp();
                    manifest.wall_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    write_run_outputs(*options.point_dir / point_dir_name(row.point.index), run, manifest,
                                      options.outputs);
                }
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = sanitize(e.what());
                if (row.config) {
                    row.metrics = RunMetrics{};
                    row.metrics.config_hash = hash_hex(config_hash(*row.config));
                    row.metrics.seed = row.point.seed;
                    if (options.point_dir)
                        write_diagnostics(*options.point_dir / point_dir_name(row.point.index),
                                          *row.config, e.what());
                } else if (options.point_dir) {
                    // Rejected before a config existed: record the overrides instead.
                    std::string text = fmt::format("error: {}\n", sanitize(e.what()));
                    for (const auto& o : manifest.overrides) text += fmt::format("override: {}\n", o);
                    const auto dir = *options.point_dir / point_dir_name(row.point.index);
                    std::filesystem::create_directories(dir);
                    write_text_file(dir / "diagnostics.txt", text);
                }
            }
            if (options.on_point_done) {
                std::lock_guard lock(done_mutex);
                options.on_point_done(row);
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options.parallel, static_cast<unsigned>(points.size())));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }

    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (values_less(a.point.values, b.point.values)) return true;
        if (values_less(b.point.values, a.point.values)) return false;
        return a.point.replica < b.point.replica;
    });
    return rows;
}

std::string format_aggregate(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    std::string out;
    for (const auto& a : spec.axes) out += a.key + "\t";
    out +=
        "replica\tpoint\tseed\tconfig_hash\tstatus\tcentral_found\tcentral_offset_hz\tcentral_fwhm_hz\t"
        "central_raw_fwhm_hz\tresolution_limited\tcentral_fit_bin_hz\tcentral_height\tside_lower_freq_hz\tside_upper_freq_hz\t"
        "side_lower_height\tside_upper_height\tcontrast\tspectrum_shift_hz\tphoton_number_mean\t"
        "central_photon_number\tmean_inversion\tbin_width_hz\terror\n";
    for (const auto& r : rows) {
        for (const auto& v : r.point.values) out += v + "\t";
        const auto& m = r.metrics;
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t", r.point.replica, r.point.index, r.point.seed,
                           m.config_hash.empty() ? "-" : m.config_hash, r.ok ? "ok" : "failed",
                           m.central_found ? 1 : 0);
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t", cell(m.central_offset_hz), cell(m.central_fwhm_hz),
                           cell(m.central_raw_fwhm_hz), m.central_resolution_limited ? 1 : 0,
                           cell(m.central_fit_bin_hz), cell(m.central_height));
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t", cell(m.side_lower_freq_hz), cell(m.side_upper_freq_hz),
                           cell(m.side_lower_height), cell(m.side_upper_height), cell(m.contrast),
                           cell(m.spectrum_shift_hz));
        out += fmt::format("{}\t{}\t{}\t{}\t{}\n", r.ok ? cell(m.photon_number_mean) : "nan",
                           cell(m.central_photon_number), r.ok ? cell(m.mean_inversion) : "nan",
                           r.ok ? cell(m.bin_width_hz) : "nan", r.error.empty() ? "-" : r.error);
    }
    return out;
}

std::vector<PullingRow> pulling_summary(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    constexpr std::string_view kDetuning = "cavity.delta_ca_mhz";
    const auto axis_it = std::find_if(spec.axes.begin(), spec.axes.end(), [&](const SweepAxis& a) { return a.key == kDetuning; });
    if (axis_it == spec.axes.end()) return {};
    const auto axis = static_cast<std::size_t>(axis_it - spec.axes.begin());

    struct Group {
        PullingRow row;
        std::vector<PullingPoint> points;
        std::optional<SimConfig> cfg;
    };
    std::vector<Group> groups;
    for (const auto& r : rows) {
        auto key = r.point.values;
        key.erase(key.begin() + static_cast<std::ptrdiff_t>(axis));
        auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& x) {
            return x.row.values == key && x.row.replica == r.point.replica;
        });
        if (g == groups.end()) {
            groups.push_back({});
            g = std::prev(groups.end());
            g->row.values = key;
            g->row.replica = r.point.replica;
        }
        if (!g->cfg && r.config) g->cfg = r.config;
        if (r.ok && r.metrics.central_found && r.config)
            g->points.push_back({angular_to_hz(r.config->delta_ca), r.metrics.central_offset_hz});
    }
    std::vector<PullingRow> out;
    for (auto& g : groups) {
        g.row.points = g.points.size();
        if (g.cfg) {
            const double gamma_c = 4.0 * g.cfg->g * g.cfg->g / g.cfg->kappa;
            g.row.n_tau_gamma_c = g.cfg->n_mean * g.cfg->tau * gamma_c;
            g.row.n_mean = g.cfg->n_mean;
        }
        try {
            g.row.fit = pulling_coefficient(g.points);
            g.row.ok = true;
            if (g.cfg) g.row.p_kappa_tau = g.row.fit.coefficient * g.cfg->kappa * g.cfg->tau;
        } catch (const AnalysisError&) {
            g.row.ok = false;
        }
        out.push_back(std::move(g.row));
    }
    return out;
}

std::string format_pulling(const SweepSpec& spec, const std::vector<PullingRow>& rows) {
    std::string out;
    for (const auto& a : spec.axes)
        if (a.key != "cavity.delta_ca_mhz") out += a.key + "\t";
    out += "replica\tpoints\tstatus\tn_mean\tpulling_P\tpulling_P_stderr\tP_kappa_tau\tn_tau_gamma_c\n";
    for (const auto& r : rows) {
        for (const auto& v : r.values) out += v + "\t";
        const double nan = std::nan("");
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", r.replica, r.points, r.ok ? "ok" : "failed", cell(r.n_mean),
                           cell(r.ok ? r.fit.coefficient : nan), cell(r.ok ? r.fit.stderr : nan),
                           cell(r.ok ? r.p_kappa_tau : nan), cell(r.n_tau_gamma_c));
    }
    return out;
}

Preset parse_preset(std::string_view name, std::string_view text) {
    // Split off the [sweep] section; everything else is an ordinary config.
    std::string config_text;
    std::vector<std::pair<std::string, std::string>> sweep_keys;
    bool in_sweep = false;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        const auto t = trim(line);
        if (!t.empty() && t.front() == '[') {
            in_sweep = t == "[sweep]";
            if (in_sweep) continue;
        }
        if (!in_sweep) {
            config_text += line + "\n";
            continue;
        }
        if (t.empty() || t.front() == '#' || t.front() == ';') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("preset {}: malformed sweep line '{}'", name, t));
        sweep_keys.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }

    Preset p;
    p.name = std::string(name);
    p.config = ConfigDocument::parse(config_text);
    for (const auto& [key, value] : sweep_keys) {
        if (key.rfind("axis", 0) == 0) {
            p.sweep.axes.push_back(SweepAxis::parse(value));
        } else if (key == "repeats") {
            const auto n = as_number(value);
            if (!n || *n < 1 || *n != std::floor(*n)) throw ConfigError(fmt::format("preset {}: bad repeats", name));
            p.sweep.repeats = static_cast<int>(*n);
        } else {
            throw ConfigError(fmt::format("preset {}: unknown sweep key '{}'", name, key));
        }
    }
    p.sweep.base_seed = p.config.to_config().numerics.seed;
    return p;
}

}  // namespace srlaser
