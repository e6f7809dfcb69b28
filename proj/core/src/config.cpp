#include "srlaser/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "srlaser/error.hpp"
#include "srlaser/units.hpp"

namespace srlaser {

namespace {

const std::vector<std::string> kSchema = {
    "cavity.kappa_mhz",
    "cavity.g_mhz",
    "cavity.delta_ca_mhz",
    "beam.tau_us",
    "beam.n_mean",
    "beam.doppler_width_mhz",
    "beam.doppler_mean_mhz",
    "beam.coupling",
    "beam.arrival",
    "pump.scheme",
    "pump.omega_mhz",
    "pump.tau_p_us",
    "pump.pulse_area_pi",
    "pump.delta_pa_mhz",
    "pump.delta_offset_mhz",
    "pump.linewidth_khz",
    "pump.use_exact",
    "numerics.dt_ns",
    "numerics.t_burn_us",
    "numerics.t_record_us",
    "numerics.record_stride",
    "numerics.seed",
    "numerics.noise_on",
    "numerics.paper_literal",
    "numerics.keep_imag_term",
    "analysis.max_lag_us",
    "analysis.window",
    "analysis.peak_threshold",
    "analysis.side_window_fraction",
    "analysis.linewidth_bins",
};

bool in_schema(const std::string& key) {
    return std::find(kSchema.begin(), kSchema.end(), key) != kSchema.end();
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
    }
    if (pos != v.size()) throw ConfigError(fmt::format("{}: trailing characters in '{}'", key, v));
    if (!std::isfinite(out)) throw ConfigError(fmt::format("{}: value must be finite", key));
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
    }
    if (pos != v.size()) throw ConfigError(fmt::format("{}: trailing characters in '{}'", key, v));
    return out;
}

std::uint64_t parse_seed(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    unsigned long long out = 0;
    if (!v.empty() && v.front() == '-') throw ConfigError(fmt::format("{}: seed must be non-negative", key));
    try {
        out = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not an unsigned integer", key, v));
    }
    if (pos != v.size()) throw ConfigError(fmt::format("{}: trailing characters in '{}'", key, v));
    return out;
}

template <class Enum>
struct EnumName {
    std::string_view name;
    Enum value;
};

constexpr EnumName<PumpScheme> kSchemes[] = {
    {"detuned_single", PumpScheme::DetunedSingle},
    {"modulated_resonant", PumpScheme::ModulatedResonant},
    {"modulated_offset", PumpScheme::ModulatedOffset},
};
constexpr EnumName<CouplingMode> kCouplings[] = {
    {"uniform", CouplingMode::Uniform},
    {"random_gaussian_mode", CouplingMode::RandomGaussianMode},
};
constexpr EnumName<ArrivalMode> kArrivals[] = {
    {"poisson", ArrivalMode::Poisson},
    {"deterministic", ArrivalMode::Deterministic},
};
constexpr EnumName<SpectralWindow> kWindows[] = {
    {"none", SpectralWindow::None},
    {"hann", SpectralWindow::Hann},
};

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& key, const std::string& v, const EnumName<Enum> (&names)[N]) {
    for (const auto& n : names)
        if (n.name == v) return n.value;
    std::string allowed;
    for (const auto& n : names) allowed += fmt::format("{}{}", allowed.empty() ? "" : "|", n.name);
    throw ConfigError(fmt::format("{}: '{}' is not one of {}", key, v, allowed));
}

template <class Enum, std::size_t N>
std::string_view enum_name(Enum e, const EnumName<Enum> (&names)[N]) {
    for (const auto& n : names)
        if (n.value == e) return n.name;
    return "?";
}

// Twelve digits: unit conversions leave round-off in the last places, and a
// re-parsed echo must render (and hash) identically.
std::string num(double v) { return fmt::format("{:.12g}", v); }

}  // namespace

std::string_view to_string(PumpScheme s) { return enum_name(s, kSchemes); }
std::string_view to_string(CouplingMode m) { return enum_name(m, kCouplings); }
std::string_view to_string(ArrivalMode m) { return enum_name(m, kArrivals); }
std::string_view to_string(SpectralWindow w) { return enum_name(w, kWindows); }

const std::vector<std::string>& config_schema_keys() { return kSchema; }

double SimConfig::effective_max_lag() const {
    return analysis.max_lag > 0.0 ? analysis.max_lag : numerics.t_record / 4.0;
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config parse error: {}", e.message()));
    }
    ConfigDocument doc;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError(fmt::format("key '{}' outside of a section", section));
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (!in_schema(full)) throw ConfigError(fmt::format("unknown config key '{}'", full));
            doc.values_[full] = trim(value.data());
        }
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void ConfigDocument::set(const std::string& key, const std::string& value) {
    if (!in_schema(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));
    // The two ways of stating the pulse are mutually exclusive; the later one wins.
    if (key == "pump.pulse_area_pi") values_.erase("pump.tau_p_us");
    if (key == "pump.tau_p_us") values_.erase("pump.pulse_area_pi");
    values_[key] = trim(value);
}

void ConfigDocument::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
    set(trim(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

SimConfig ConfigDocument::to_config() const {
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    };
    auto required = [&](const std::string& key) -> const std::string& {
        const auto* v = get(key);
        if (!v) throw ConfigError(fmt::format("missing required config key '{}'", key));
        return *v;
    };
    auto real_or = [&](const std::string& key, double fallback) {
        const auto* v = get(key);
        return v ? parse_double(key, *v) : fallback;
    };
    auto bool_or = [&](const std::string& key, bool fallback) {
        const auto* v = get(key);
        return v ? parse_bool(key, *v) : fallback;
    };

    SimConfig c;
    c.kappa = mhz_to_angular(parse_double("cavity.kappa_mhz", required("cavity.kappa_mhz")));
    c.g = mhz_to_angular(parse_double("cavity.g_mhz", required("cavity.g_mhz")));
    c.delta_ca = mhz_to_angular(real_or("cavity.delta_ca_mhz", 0.0));

    c.tau = us_to_s(parse_double("beam.tau_us", required("beam.tau_us")));
    c.n_mean = parse_double("beam.n_mean", required("beam.n_mean"));
    // Default residual Doppler width: delta_D / 2pi = 0.1 / tau.
    c.beam.doppler_width = get("beam.doppler_width_mhz")
                               ? mhz_to_angular(parse_double("beam.doppler_width_mhz", *get("beam.doppler_width_mhz")))
                               : (c.tau > 0.0 ? kTwoPi * 0.1 / c.tau : 0.0);
    c.beam.doppler_mean = mhz_to_angular(real_or("beam.doppler_mean_mhz", 0.0));
    if (const auto* v = get("beam.coupling")) c.beam.coupling_mode = parse_enum("beam.coupling", *v, kCouplings);
    if (const auto* v = get("beam.arrival")) c.beam.arrival = parse_enum("beam.arrival", *v, kArrivals);

    c.pump.scheme = parse_enum("pump.scheme", required("pump.scheme"), kSchemes);
    c.pump.omega = mhz_to_angular(parse_double("pump.omega_mhz", required("pump.omega_mhz")));
    const auto* tau_p = get("pump.tau_p_us");
    const auto* area = get("pump.pulse_area_pi");
    if (tau_p && area) throw ConfigError("pump.tau_p_us and pump.pulse_area_pi are mutually exclusive");
    if (tau_p) {
        c.pump.tau_p = us_to_s(parse_double("pump.tau_p_us", *tau_p));
    } else if (area) {
        if (c.pump.omega <= 0.0) throw ConfigError("pump.pulse_area_pi requires pump.omega_mhz > 0");
        c.pump.tau_p = parse_double("pump.pulse_area_pi", *area) * std::numbers::pi / c.pump.omega;
    } else {
        throw ConfigError("one of pump.tau_p_us or pump.pulse_area_pi is required");
    }
    c.pump.delta_pa = mhz_to_angular(real_or("pump.delta_pa_mhz", 0.0));
    c.pump.delta_offset = mhz_to_angular(real_or("pump.delta_offset_mhz", 0.0));
    c.pump.linewidth = khz_to_angular(real_or("pump.linewidth_khz", 20.0));
    c.pump.use_exact = bool_or("pump.use_exact", true);

    c.numerics.dt = ns_to_s(parse_double("numerics.dt_ns", required("numerics.dt_ns")));
    c.numerics.t_burn = get("numerics.t_burn_us") ? us_to_s(parse_double("numerics.t_burn_us", *get("numerics.t_burn_us")))
                                                   : 10.0 * c.tau;
    c.numerics.t_record = us_to_s(parse_double("numerics.t_record_us", required("numerics.t_record_us")));
    if (const auto* v = get("numerics.record_stride")) {
        const auto stride = parse_int("numerics.record_stride", *v);
        if (stride < 1 || stride > 1'000'000) throw ConfigError("numerics.record_stride must be in [1, 1e6]");
        c.numerics.record_stride = static_cast<int>(stride);
    }
    if (const auto* v = get("numerics.seed")) c.numerics.seed = parse_seed("numerics.seed", *v);
    c.numerics.noise_on = bool_or("numerics.noise_on", true);
    c.numerics.paper_literal = bool_or("numerics.paper_literal", false);
    c.numerics.keep_imag_term = bool_or("numerics.keep_imag_term", false);

    c.analysis.max_lag = us_to_s(real_or("analysis.max_lag_us", 0.0));
    if (const auto* v = get("analysis.window")) c.analysis.window = parse_enum("analysis.window", *v, kWindows);
    c.analysis.peak_threshold = real_or("analysis.peak_threshold", 10.0);
    c.analysis.side_window_fraction = real_or("analysis.side_window_fraction", 0.25);
    c.analysis.linewidth_bins = real_or("analysis.linewidth_bins", 16.0);
    return c;
}

std::vector<std::string> validate(const SimConfig& c) {
    std::vector<std::string> warnings;
    auto require = [](bool ok, std::string_view what) {
        if (!ok) throw ConfigError(std::string(what));
    };
    require(c.kappa > 0.0, "cavity.kappa_mhz must be > 0");
    require(c.g > 0.0, "cavity.g_mhz must be > 0");
    require(std::isfinite(c.delta_ca), "cavity.delta_ca_mhz must be finite");
    require(c.tau > 0.0, "beam.tau_us must be > 0");
    require(c.n_mean >= 1.0, "beam.n_mean must be >= 1");
    require(c.beam.doppler_width >= 0.0, "beam.doppler_width_mhz must be >= 0");
    require(c.pump.omega > 0.0, "pump.omega_mhz must be > 0");
    require(c.pump.tau_p > 0.0, "pump interaction time must be > 0");
    require(c.pump.linewidth >= 0.0, "pump.linewidth_khz must be >= 0");
    if (c.pump.scheme == PumpScheme::ModulatedOffset)
        require(std::abs(c.pump.delta_offset) < std::abs(c.pump.delta_pa),
                "modulated_offset requires |delta_offset| < delta_pa");

    const auto& n = c.numerics;
    require(n.dt > 0.0, "numerics.dt_ns must be > 0");
    require(n.dt <= c.tau / 50.0, "numerics.dt_ns must not exceed tau/50");
    require(n.t_burn >= 0.0 && n.t_record >= 0.0, "numerics burn-in and record spans must be >= 0");
    // Fastest retained dynamical scale. The cavity detuning only enters through
    // Gamma_Delta, which never exceeds Gamma_0/2, so it is covered by Gamma_0 N.
    const double gamma_0 = 4.0 * c.g * c.g / c.kappa;
    const double fastest = std::max({gamma_0 * c.n_mean, std::abs(c.pump.delta_pa) + std::abs(c.pump.delta_offset),
                                     c.beam.doppler_width, std::abs(c.beam.doppler_mean)});
    if (n.dt * fastest >= 0.1)
        throw ConfigError(fmt::format("numerics.dt_ns too large: dt * fastest rate = {:.3g} (must be < 0.1)",
                                      n.dt * fastest));

    const auto& a = c.analysis;
    require(a.max_lag >= 0.0, "analysis.max_lag_us must be >= 0");
    require(a.peak_threshold > 0.0, "analysis.peak_threshold must be > 0");
    require(a.linewidth_bins == 0.0 || a.linewidth_bins >= 4.0, "analysis.linewidth_bins must be 0 or >= 4");
    require(a.side_window_fraction > 0.0 && a.side_window_fraction <= 0.5,
            "analysis.side_window_fraction must be in (0, 0.5]");
    if (n.t_record > 0.0) {
        require(c.effective_max_lag() <= n.t_record / 4.0 * (1.0 + 1e-12),
                "analysis.max_lag_us must not exceed t_record/4");
        // The record must resolve the side peaks below Nyquist.
        const double sample = n.dt * n.record_stride;
        const double nyquist = 0.5 / sample;
        const double highest = angular_to_hz(std::abs(c.pump.delta_pa) + std::abs(c.pump.delta_offset));
        if (highest >= nyquist)
            warnings.push_back(fmt::format("side peaks at {:.3g} Hz lie beyond the record Nyquist {:.3g} Hz",
                                           highest, nyquist));
    }

    if (c.kappa < 10.0 * std::sqrt(c.n_mean) * c.g)
        warnings.push_back(fmt::format("bad-cavity condition weak: kappa / (sqrt(N) g) = {:.3g} < 10",
                                       c.kappa / (std::sqrt(c.n_mean) * c.g)));
    if (c.pump.scheme == PumpScheme::DetunedSingle && c.pump.omega < 5.0 * std::abs(c.pump.delta_pa))
        warnings.push_back("detuned_single closed form assumes omega >> delta_pa (omega < 5 delta_pa)");
    if (c.pump.scheme == PumpScheme::ModulatedOffset && c.pump.omega < 5.0 * std::abs(c.pump.delta_offset))
        warnings.push_back("modulated_offset closed form assumes omega >> delta_offset");
    return warnings;
}

std::string canonical_text(const SimConfig& c) {
    std::string out;
    auto line = [&](std::string_view k, const std::string& v) { out += fmt::format("{} = {}\n", k, v); };
    out += "[cavity]\n";
    line("kappa_mhz", num(angular_to_mhz(c.kappa)));
    line("g_mhz", num(angular_to_mhz(c.g)));
    line("delta_ca_mhz", num(angular_to_mhz(c.delta_ca)));
    out += "\n[beam]\n";
    line("tau_us", num(c.tau * 1e6));
    line("n_mean", num(c.n_mean));
    line("doppler_width_mhz", num(angular_to_mhz(c.beam.doppler_width)));
    line("doppler_mean_mhz", num(angular_to_mhz(c.beam.doppler_mean)));
    line("coupling", std::string(to_string(c.beam.coupling_mode)));
    line("arrival", std::string(to_string(c.beam.arrival)));
    out += "\n[pump]\n";
    line("scheme", std::string(to_string(c.pump.scheme)));
    line("omega_mhz", num(angular_to_mhz(c.pump.omega)));
    line("tau_p_us", num(c.pump.tau_p * 1e6));
    line("delta_pa_mhz", num(angular_to_mhz(c.pump.delta_pa)));
    line("delta_offset_mhz", num(angular_to_mhz(c.pump.delta_offset)));
    line("linewidth_khz", num(c.pump.linewidth / kTwoPi * 1e-3));
    line("use_exact", c.pump.use_exact ? "true" : "false");
    out += "\n[numerics]\n";
    line("dt_ns", num(c.numerics.dt * 1e9));
    line("t_burn_us", num(c.numerics.t_burn * 1e6));
    line("t_record_us", num(c.numerics.t_record * 1e6));
    line("record_stride", std::to_string(c.numerics.record_stride));
    line("seed", std::to_string(c.numerics.seed));
    line("noise_on", c.numerics.noise_on ? "true" : "false");
    line("paper_literal", c.numerics.paper_literal ? "true" : "false");
    line("keep_imag_term", c.numerics.keep_imag_term ? "true" : "false");
    out += "\n[analysis]\n";
    line("max_lag_us", num(c.analysis.max_lag * 1e6));
    line("window", std::string(to_string(c.analysis.window)));
    line("peak_threshold", num(c.analysis.peak_threshold));
    line("side_window_fraction", num(c.analysis.side_window_fraction));
    line("linewidth_bins", num(c.analysis.linewidth_bins));
    return out;
}

std::uint64_t config_hash(const SimConfig& cfg) {
    SimConfig unseeded = cfg;
    unseeded.numerics.seed = 0;
    const std::string text = canonical_text(unseeded);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

}  // namespace srlaser
