#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "srlaser/config.hpp"

namespace srlaser {

/// A versioned preset file, embedded at build time from presets/*.cfg.
struct PresetFile {
    std::string_view name;
    std::string_view text;
};

/// Every embedded preset, ordered by name.
const std::vector<PresetFile>& preset_files();

/// Looks up a preset by name (file stem); throws ConfigError if unknown.
const PresetFile& find_preset(std::string_view name);

/// Names of the presets implementing a figure id ("fig1" .. "fig6") at the
/// given scale, in name order. Throws ConfigError for an unknown id.
std::vector<std::string> figure_presets(std::string_view figure, bool desk_scale);

}  // namespace srlaser
