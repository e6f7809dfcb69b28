#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "srlaser/error.hpp"
#include "srlaser/presets.hpp"

namespace srlaser {

const PresetFile& find_preset(std::string_view name) {
    for (const auto& p : preset_files())
        if (p.name == name) return p;
    throw ConfigError(fmt::format("unknown preset '{}'", name));
}

std::vector<std::string> figure_presets(std::string_view figure, bool desk_scale) {
    static constexpr std::string_view kFigures[] = {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"};
    if (std::find(std::begin(kFigures), std::end(kFigures), figure) == std::end(kFigures))
        throw ConfigError(fmt::format("unknown figure id '{}' (expected fig1 .. fig6)", figure));
    // Names are <figure>[panel]_desk or <figure>[panel]_full, e.g. fig2a_desk.
    const std::string_view suffix = desk_scale ? "_desk" : "_full";
    std::vector<std::string> names;
    for (const auto& p : preset_files()) {
        const auto n = p.name;
        if (n.size() < figure.size() + suffix.size() || n.substr(0, figure.size()) != figure) continue;
        if (n.substr(n.size() - suffix.size()) != suffix) continue;
        const char next = n[figure.size()];
        if (std::isdigit(static_cast<unsigned char>(next))) continue;
        names.emplace_back(n);
    }
    if (names.empty()) throw ConfigError(fmt::format("no presets for {}", figure));
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace srlaser
