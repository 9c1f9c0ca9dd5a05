#pragma once

#include <optional>

#include "magnetoatom/units.hpp"

namespace magnetoatom {

/// Stationary structure of the on-axis effective potential for P along +y:
/// the magnetic (outer) minimum and barrier maximum on the x > 0 branch.
/// Below the saddle momentum only the Coulomb minimum exists and the
/// optional fields are absent.
struct CriticalPoints {
    double p_saddle = 0.0;  ///< (27 e^3 B M / 4)^(1/3)
    double x_saddle = 0.0;  ///< (2 M / B^2)^(1/3), charge independent
    std::optional<double> x_min;    ///< outer minimum position
    std::optional<double> x_max;    ///< barrier maximum position
    std::optional<double> v_min;    ///< potential at x_min
    std::optional<double> v_max;    ///< potential at x_max
    std::optional<double> barrier;  ///< v_max - v_min
};

/// Leading large-P expansions of the outer extrema and the barrier height.
struct AsymptoticExtrema {
    double x_min_asym = 0.0;   ///< P/(eB) - e^2 M / P^2
    double x_max_asym = 0.0;   ///< sqrt(eM/(PB)) + e^2 M / (2 P^2)
    double barrier_asym = 0.0; ///< P^2/2M - sqrt(4Be^3P/M) + 3Be^3/(2P) + sqrt(B^3e^9M/(16P^5))
};

/// Gauge-invariant effective potential of the relative motion, P = P y-hat:
///   P^2/2M + e^2 B^2 (x^2+y^2)/2M - e B P x / M - e^2/sqrt(x^2+y^2).
/// Fields are taken in internal units. Throws OriginSingularity at (0,0).
double v_eff(double x, double y, const SystemSpec& sys, const FieldConfig& fields);

/// On-axis profile v_eff(x, 0).
double v_eff_axis(double x, const SystemSpec& sys, const FieldConfig& fields);

/// Solves the stationary cubic x^3 - (P/eB) x^2 + M/B^2 = 0 on x > 0 and
/// classifies the roots by the second derivative. Closed-form trigonometric
/// roots polished by one Newton step; bisection fallback. Near the saddle
/// (|P - p_saddle| < 1e-8 p_saddle) the coincident double root is reported.
CriticalPoints stationary_points(const SystemSpec& sys, const FieldConfig& fields);

/// Printed truncations of the large-P expansions. Requires P > p_saddle.
AsymptoticExtrema asymptotic_extrema(const SystemSpec& sys, const FieldConfig& fields);

} // namespace magnetoatom
