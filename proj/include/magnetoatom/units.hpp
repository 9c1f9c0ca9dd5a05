#pragma once

#include <optional>

#include "magnetoatom/errors.hpp"

namespace magnetoatom {

/// Two-body neutral system (+e, m1), (-e, m2) and its derived mass ratios.
///
/// Internal unit frame: hbar = c = 1, masses in electron masses, charges in
/// units of |e|. An infinite second mass is an explicit limit, not a large
/// float, so mu and q_w stay exact.
struct SystemSpec {
    double e = 1.0;       ///< elementary charge magnitude
    double m1 = 1.0;      ///< first-particle mass
    double m2 = 1.0;      ///< second-particle mass (ignored when m2_infinite)
    bool m2_infinite = false;

    double M = 2.0;       ///< total mass m1 + m2 (infinity flag applies)
    double m_r = 0.5;     ///< reduced mass m1*m2/M
    double mu1 = 0.5;     ///< m1/M
    double mu2 = 0.5;     ///< m2/M
    double mu = 0.0;      ///< mu1 - mu2
    double q_w = 0.0;     ///< weighted charge e*(mu2 - mu1)

    /// 1/M, zero in the infinite-mass limit. All printed formulas use inverse
    /// powers of M, so the limit stays finite through this accessor.
    double inv_M() const { return m2_infinite ? 0.0 : 1.0 / M; }
};

/// Field/momentum configuration in both the paper's effective units and the
/// internal atomic-like frame.
///
/// B_int = 4 m_r^2 e^3 B_eff; P is the same number in both frames (plain
/// atomic units, no mass rescaling). d in [0,1] places the gauge center.
struct FieldConfig {
    double B_eff = 0.0;
    double P_eff = 0.0;
    double B_int = 0.0;
    double P_int = 0.0;
    double d = 0.0;
};

/// Result of relating two systems by the scale transformation rho -> a*rho.
struct ScaleMap {
    double a = 1.0;            ///< length factor  e~^2 m_r~ / (e^2 m_r)
    SystemSpec source;
    SystemSpec target;
    double B_target = 0.0;     ///< B * (e~^3 m_r~^2)/(e^3 m_r^2)
    double P_target = 0.0;     ///< P * (M~ e~^2)/(M e^2)
    double energy_ratio = 1.0; ///< e~^4 m_r~ / (e^4 m_r)
};

constexpr double kInfiniteMass = -1.0; ///< sentinel accepted by derive_system

/// Builds a SystemSpec from charges and masses. Pass m2 = kInfiniteMass (or
/// use derive_system_infinite) for the static-nucleus limit.
SystemSpec derive_system(double e, double m1, double m2);
SystemSpec derive_system_infinite(double e, double m1);

/// Fills B_int/P_int from the effective-unit fields. Round trip is exact:
/// the struct keeps both representations, nothing is re-derived.
FieldConfig to_internal(const FieldConfig& cfg, const SystemSpec& sys);

/// Convenience constructor: effective-unit inputs -> fully populated config.
FieldConfig make_fields(const SystemSpec& sys, double B_eff, double P_eff, double d = 0.0);

/// Relates (src, B, P) to the target system. B and P are in internal units of
/// the source frame; outputs are in internal units of the target frame.
/// Throws ScalingIncompatible unless |mu2-mu1| matches to 1e-12.
ScaleMap scale_system(const SystemSpec& src, double B, double P, const SystemSpec& tgt);

/// Preset systems used throughout: finite-mass hydrogen (m_p = 1836.15267),
/// infinite-mass hydrogen, positronium.
SystemSpec hydrogen();
SystemSpec hydrogen_infinite();
SystemSpec positronium();

} // namespace magnetoatom
