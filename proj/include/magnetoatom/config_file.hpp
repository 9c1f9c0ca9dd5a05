#pragma once

#include <string>

#include "magnetoatom/units.hpp"

namespace magnetoatom {

/// Shared plain-text configuration: key=value lines, '#' comments.
/// Keys: e, m1, m2 (number or "inf"), B_eff, P_eff, d.
struct RunConfig {
    double e = 1.0;
    double m1 = 1.0;
    double m2 = 1836.15267; ///< finite-mass hydrogen default
    bool m2_infinite = false;
    double B_eff = 0.0;
    double P_eff = 0.0;
    double d = 0.0;

    SystemSpec system() const;
    FieldConfig fields(const SystemSpec& sys) const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Named presets: "hydrogen", "hydrogen-inf", "positronium".
RunConfig preset_config(const std::string& name);

} // namespace magnetoatom
