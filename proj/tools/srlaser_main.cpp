// srlaser: run, sweep and reproduce front end.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "srlaser/config.hpp"
#include "srlaser/error.hpp"
#include "srlaser/io.hpp"
#include "srlaser/presets.hpp"
#include "srlaser/sweep.hpp"

namespace fs = std::filesystem;
using namespace srlaser;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kConfigFailure = 2;
constexpr int kNumericalFailure = 3;
constexpr int kRuntimeFailure = 4;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::vector<std::string> overrides;
    unsigned parallel = 1;
};

ConfigDocument load_with_overrides(const Common& c) {
    ConfigDocument doc = ConfigDocument::load(c.config_path);
    for (const auto& o : c.overrides) doc.apply_override(o);
    if (c.seed) doc.set("numerics.seed", std::to_string(*c.seed));
    return doc;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) fmt::print(stderr, "warning: {}\n", w);
}

int cmd_run(const Common& c, bool keep_field) {
    const ConfigDocument doc = load_with_overrides(c);
    const SimConfig cfg = doc.to_config();
    const auto warnings = validate(cfg);
    print_warnings(warnings);

    RunManifest manifest;
    manifest.code_version = code_version();
    manifest.config_source = c.config_path;
    manifest.overrides = c.overrides;
    if (c.seed) manifest.overrides.push_back(fmt::format("numerics.seed={}", *c.seed));
    manifest.warnings = warnings;
    manifest.start_time = utc_timestamp();
    const auto start = std::chrono::steady_clock::now();

    RunResult run;
    try {
        run = execute_run(cfg);
    } catch (const NumericalError& e) {
        write_diagnostics(c.out, cfg, e.what());
        fmt::print(stderr, "numerical failure: {} (see {}/diagnostics.txt)\n", e.what(), c.out);
        return kNumericalFailure;
    }
    manifest.end_time = utc_timestamp();
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_run_outputs(c.out, run, manifest, {keep_field, true});

    const auto& m = run.metrics;
    fmt::print("config_hash {} seed {}\n", m.config_hash, m.seed);
    fmt::print("central: offset {:.6g} Hz, fwhm {:.6g} Hz{}\n", m.central_offset_hz, m.central_fwhm_hz,
               m.central_resolution_limited ? " (resolution limited)" : "");
    fmt::print("side peaks: {:.8g} Hz, {:.8g} Hz, contrast {:.4g}\n", m.side_lower_freq_hz, m.side_upper_freq_hz,
               m.contrast);
    fmt::print("photon number {:.4g}, outputs in {}\n", m.photon_number_mean, c.out);
    return kOk;
}

// Runs a sweep and writes aggregate.tsv (and pulling.tsv when the detuning
// is swept) into dir. Returns the number of failed points.
std::size_t run_and_write_sweep(const ConfigDocument& doc, const SweepSpec& spec, const fs::path& dir,
                                unsigned parallel, bool keep_field, const std::string& source) {
    fs::create_directories(dir);
    const auto total = spec.point_count();
    std::size_t done = 0;
    SweepOptions opts;
    opts.parallel = parallel;
    opts.point_dir = dir / "points";
    opts.outputs = {keep_field, true};
    opts.on_point_done = [&](const SweepRow& row) {
        ++done;
        fmt::print(stderr, "[{}/{}] point {} {}{}\n", done, total, row.point.index, row.ok ? "ok" : "failed",
                   row.ok ? "" : ": " + row.error);
    };
    const auto start_time = utc_timestamp();
    const auto start = std::chrono::steady_clock::now();
    const auto rows = run_sweep(doc, spec, opts);
    write_text_file(dir / "aggregate.tsv", format_aggregate(spec, rows));
    std::vector<std::string> outputs{"aggregate.tsv", "points/"};
    const auto pulling = pulling_summary(spec, rows);
    if (!pulling.empty()) {
        write_text_file(dir / "pulling.tsv", format_pulling(spec, pulling));
        outputs.push_back("pulling.tsv");
    }

    RunManifest manifest;
    manifest.config_hash = "-";
    manifest.seed = spec.base_seed;
    manifest.code_version = code_version();
    manifest.config_source = source;
    for (const auto& a : spec.axes) {
        std::string values;
        for (const auto& v : a.values) values += (values.empty() ? "" : ",") + v;
        manifest.overrides.push_back(fmt::format("axis {}={}", a.key, values));
    }
    manifest.overrides.push_back(fmt::format("repeats={}", spec.repeats));
    manifest.start_time = start_time;
    manifest.end_time = utc_timestamp();
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.outputs = outputs;
    write_text_file(dir / "base_config.cfg", canonical_text(doc.to_config()));
    write_text_file(dir / "manifest.txt", format_manifest(manifest));

    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.ok ? 0 : 1;
    return failed;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& axes, int repeats, bool keep_field) {
    const ConfigDocument doc = load_with_overrides(c);
    print_warnings(validate(doc.to_config()));
    SweepSpec spec;
    for (const auto& a : axes) spec.axes.push_back(SweepAxis::parse(a));
    spec.repeats = repeats;
    spec.base_seed = doc.to_config().numerics.seed;
    expand(spec);  // rejects an empty or malformed spec before any output
    const auto failed = run_and_write_sweep(doc, spec, c.out, c.parallel, keep_field, c.config_path);
    fmt::print("{} points, {} failed; aggregate in {}/aggregate.tsv\n", spec.point_count(), failed, c.out);
    return failed == 0 ? kOk : kRuntimeFailure;
}

int cmd_reproduce(const Common& c, const std::string& figure, bool desk_scale, bool keep_field) {
    const auto names = figure_presets(figure, desk_scale);
    std::vector<Preset> presets;
    for (const auto& n : names) {
        Preset p = parse_preset(n, find_preset(n).text);
        for (const auto& o : c.overrides) p.config.apply_override(o);
        if (c.seed) p.sweep.base_seed = *c.seed;
        print_warnings(validate(p.config.to_config()));
        presets.push_back(std::move(p));
    }
    std::size_t failed = 0;
    std::string combined_pulling;
    for (const auto& p : presets) {
        fmt::print(stderr, "preset {}: {} points\n", p.name, p.sweep.point_count());
        const fs::path dir = fs::path(c.out) / p.name;
        write_text_file((fs::create_directories(dir), dir / "preset.cfg"), std::string(find_preset(p.name).text));
        failed += run_and_write_sweep(p.config, p.sweep, dir, c.parallel, keep_field, "preset:" + p.name);
        if (fs::exists(dir / "pulling.tsv")) {
            const auto text = read_text_file(dir / "pulling.tsv");
            const auto nl = text.find('\n');
            if (combined_pulling.empty()) combined_pulling = "preset\t" + text.substr(0, nl + 1);
            for (std::size_t pos = nl + 1; pos < text.size();) {
                const auto end = text.find('\n', pos);
                combined_pulling += p.name + "\t" + text.substr(pos, end - pos + 1);
                pos = end + 1;
            }
        }
    }
    if (!combined_pulling.empty() && presets.size() > 1)
        write_text_file(fs::path(c.out) / "pulling.tsv", combined_pulling);
    fmt::print("{}: {} preset(s) written under {}; {} failed point(s)\n", figure, presets.size(), c.out, failed);
    return failed == 0 ? kOk : kRuntimeFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo simulator of a pumped atomic beam lasing in a bad cavity"};
    app.set_version_flag("--version", code_version());
    app.require_subcommand(1);

    Common common;
    bool keep_field = false;
    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", common.config_path, "configuration file");
        if (needs_config) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "base seed (overrides numerics.seed)");
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
        sub->add_option("--override", common.overrides, "section.key=value, applied after the file")->take_all();
    };

    auto* run = app.add_subcommand("run", "simulate one trajectory and analyse its spectrum");
    add_common(run, true);
    run->add_flag("!--no-field", keep_field, "skip the field record table");
    keep_field = true;

    std::vector<std::string> axes;
    int repeats = 1;
    auto* sweep = app.add_subcommand("sweep", "run a cartesian parameter sweep");
    add_common(sweep, true);
    sweep->add_option("--axis", axes, "section.key=v1,v2,... or section.key=start:stop:count")->required();
    sweep->add_option("--repeats", repeats, "replicas per point")->check(CLI::PositiveNumber);
    sweep->add_option("--parallel", common.parallel, "worker threads")->check(CLI::PositiveNumber);
    bool sweep_field = false;
    sweep->add_flag("--keep-field", sweep_field, "write each point's field record");

    std::string figure;
    bool desk_scale = false;
    auto* reproduce = app.add_subcommand("reproduce", "run the preset sweeps behind a figure");
    add_common(reproduce, false);
    reproduce->remove_option(reproduce->get_option("--config"));
    reproduce->add_option("figure", figure, "fig1 .. fig6")->required();
    reproduce->add_flag("--desk-scale", desk_scale, "use the reduced desk-scale presets");
    reproduce->add_option("--parallel", common.parallel, "worker threads")->check(CLI::PositiveNumber);
    bool reproduce_field = false;
    reproduce->add_flag("--keep-field", reproduce_field, "write each point's field record");

    auto* list = app.add_subcommand("presets", "list embedded presets, or print one");
    std::string show;
    list->add_option("name", show, "preset to print");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(common, keep_field);
        if (*sweep) return cmd_sweep(common, axes, repeats, sweep_field);
        if (*reproduce) return cmd_reproduce(common, figure, desk_scale, reproduce_field);
        if (*list) {
            if (!show.empty()) {
                std::cout << find_preset(show).text;
            } else {
                for (const auto& p : preset_files()) std::cout << p.name << "\n";
            }
            return kOk;
        }
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfigFailure;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kRuntimeFailure;
    }
    return kOk;
}
