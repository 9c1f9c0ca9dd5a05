#include "magnetoatom/units.hpp"

#include <cmath>
#include <limits>

namespace magnetoatom {

SystemSpec derive_system(double e, double m1, double m2) {
    if (m2 == kInfiniteMass || std::isinf(m2)) return derive_system_infinite(e, m1);
    if (!(e > 0.0)) throw InvalidParameter("derive_system: charge must be positive");
    if (!(m1 > 0.0) || !(m2 > 0.0))
        throw InvalidParameter("derive_system: masses must be positive");

    SystemSpec s;
    s.e = e;
    s.m1 = m1;
    s.m2 = m2;
    s.m2_infinite = false;
    s.M = m1 + m2;
    s.m_r = m1 * m2 / s.M;
    s.mu1 = m1 / s.M;
    s.mu2 = m2 / s.M;
    s.mu = s.mu1 - s.mu2;
    s.q_w = e * (s.mu2 - s.mu1);
    return s;
}

SystemSpec derive_system_infinite(double e, double m1) {
    if (!(e > 0.0)) throw InvalidParameter("derive_system: charge must be positive");
    if (!(m1 > 0.0)) throw InvalidParameter("derive_system: masses must be positive");

    SystemSpec s;
    s.e = e;
    s.m1 = m1;
    s.m2 = std::numeric_limits<double>::infinity();
    s.m2_infinite = true;
    s.M = std::numeric_limits<double>::infinity();
    s.m_r = m1;
    s.mu1 = 0.0;
    s.mu2 = 1.0;
    s.mu = -1.0;
    s.q_w = e;
    return s;
}

FieldConfig to_internal(const FieldConfig& cfg, const SystemSpec& sys) {
    if (cfg.B_eff < 0.0 || cfg.P_eff < 0.0)
        throw InvalidParameter("to_internal: B_eff and P_eff must be non-negative");
    if (cfg.d < 0.0 || cfg.d > 1.0)
        throw InvalidParameter("to_internal: gauge parameter d must lie in [0,1]");

    FieldConfig out = cfg;
    out.B_int = 4.0 * sys.m_r * sys.m_r * sys.e * sys.e * sys.e * cfg.B_eff;
    out.P_int = cfg.P_eff;
    return out;
}

FieldConfig make_fields(const SystemSpec& sys, double B_eff, double P_eff, double d) {
    FieldConfig cfg;
    cfg.B_eff = B_eff;
    cfg.P_eff = P_eff;
    cfg.d = d;
    return to_internal(cfg, sys);
}

ScaleMap scale_system(const SystemSpec& src, double B, double P, const SystemSpec& tgt) {
    const double w_src = std::abs(src.mu2 - src.mu1);
    const double w_tgt = std::abs(tgt.mu2 - tgt.mu1);
    if (std::abs(w_src - w_tgt) > 1e-12)
        throw ScalingIncompatible("scale_system: |mu2 - mu1| differs between systems");

    ScaleMap map;
    map.source = src;
    map.target = tgt;
    const double e2 = src.e * src.e;
    const double te2 = tgt.e * tgt.e;
    map.a = (te2 * tgt.m_r) / (e2 * src.m_r);
    map.B_target = B * (te2 * tgt.e * tgt.m_r * tgt.m_r) / (e2 * src.e * src.m_r * src.m_r);
    map.energy_ratio = (te2 * te2 * tgt.m_r) / (e2 * e2 * src.m_r);

    // P scales with the total mass; both infinite-mass limits share M = inf,
    // where the ratio M~/M is defined by matching m1-ratios instead.
    double mass_ratio;
    if (src.m2_infinite && tgt.m2_infinite) {
        mass_ratio = tgt.m1 / src.m1;
    } else if (!src.m2_infinite && !tgt.m2_infinite) {
        mass_ratio = tgt.M / src.M;
    } else {
        throw ScalingIncompatible(
            "scale_system: cannot relate finite and infinite total mass");
    }
    map.P_target = P * mass_ratio * te2 / e2;
    return map;
}

SystemSpec hydrogen() { return derive_system(1.0, 1.0, 1836.15267); }
SystemSpec hydrogen_infinite() { return derive_system_infinite(1.0, 1.0); }
SystemSpec positronium() { return derive_system(1.0, 1.0, 1.0); }

} // namespace magnetoatom
