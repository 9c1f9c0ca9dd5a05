#pragma once

#include "magnetoatom/units.hpp"

namespace magnetoatom {

/// Nonlinear and linear parameters of the two-term interpolated trial
/// function
///   chi = C1 exp(-phi_c) + C2 exp(-phi_m),
///   phi_c = (A0 + A1 rho + A2 x rho + A3^2 rho^3) / sqrt(1 + A4 x + A5^2 rho^2)
///           - (alpha_c/2) log(1 + A4 x + A5^2 rho^2),
///   phi_m = (D0 + D1 xt^2 + D2 y^2 + D3^2 vr^4) /
///           sqrt(1 + D4 xt^2 + D5 y^2 + D6^2 vr^4),
/// with xt = x - x_m and vr^2 = xt^2 + y^2. phi_c interpolates the Coulomb
/// cusp into the Gaussian far field, phi_m models the magnetic well.
struct TrialParams {
    double A0 = 0.0, A1 = 2.0, A2 = 0.0, A3 = 0.0, A4 = 0.0, A5 = 0.0;
    double alpha_c = 0.0;
    double D0 = 0.0, D1 = 0.0, D2 = 0.0, D3 = 0.0, D4 = 0.0, D5 = 0.0, D6 = 0.0;
    double x_m = 0.0;
    double C1 = 1.0, C2 = 0.0;
    double d = 0.0;

    bool coulomb_active() const { return C1 != 0.0; }
    bool magnetic_active() const { return C2 != 0.0; }

    /// Checks the parameter invariants without throwing.
    bool feasible() const;
    /// Throws InvalidTrial with a reason when infeasible.
    void validate() const;
};

/// Phase value and Cartesian gradient at one point.
struct PhaseValue {
    double value = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};

/// Coulomb-well phase phi_c. At the cusp point rho = 0 the gradient is
/// direction dependent; the +x limit is returned.
PhaseValue coulomb_phase(const TrialParams& p, double x, double y);

/// Magnetic-well phase phi_m (smooth everywhere).
PhaseValue magnetic_phase(const TrialParams& p, double x, double y);

/// Trial value and gradient at one point.
struct TrialValue {
    double chi = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};

/// chi = C1 e^{-phi_c} + C2 e^{-phi_m} with analytic gradient.
/// Throws InvalidTrial when the parameter invariants fail.
TrialValue trial_eval(const TrialParams& p, double x, double y);

/// Taylor data of the phase at the magnetic well x = x0, y = 0, with the
/// frequency-like parameters estimated from the local curvatures of the
/// effective potential combined with the cyclotron scale of the weighted
/// charge. Used to seed the decentered trial family.
struct WellExpansion {
    double x0 = 0.0;
    double E_x = 0.0, E_y = 0.0;     ///< E = E_x + E_y
    double alpha0 = 0.0;
    double alpha2 = 0.0, alpha3 = 0.0, alpha4 = 0.0;
    double beta2 = 0.0, beta4 = 0.0;
    double gamma3 = 0.0;
};

WellExpansion well_expansion(const SystemSpec& sys, const FieldConfig& fields, double x0);

} // namespace magnetoatom
