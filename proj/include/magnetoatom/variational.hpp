#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "magnetoatom/quadrature.hpp"
#include "magnetoatom/trial.hpp"
#include "magnetoatom/units.hpp"

namespace magnetoatom {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Gauge center rho_0 = d P / (e B) x-hat. Throws DegenerateField at B = 0.
Vec2 gauge_center(double d, const SystemSpec& sys, const FieldConfig& fields);

using Mat2 = std::array<std::array<double, 2>, 2>;

/// One evaluation of the gauge-fixed energy functional on the two-element
/// basis {exp(-phi_c), exp(-phi_m)}. The linear coefficients are resolved
/// exactly by the 2x2 generalized eigenproblem; with a single active element
/// the 1x1 Rayleigh quotient is used. Matrices are reported in the
/// internally rescaled (unit-diagonal-S) basis.
struct FunctionalResult {
    double E = 0.0;
    Mat2 S{};
    Mat2 H{};
    double C1 = 1.0, C2 = 0.0; ///< rescaled-basis coefficients, c^T S c = 1
    double weight1 = 1.0;      ///< S-weighted |C1|^2 share
    double rho_mean = 0.0;
    double gauge_residual = 0.0; ///< |<chi|A.grad chi>| / sum |integrand|
    double quad_error = 0.0;     ///< refinement estimate when refined
    bool cross_underflow = false;
};

/// Matrix elements of h_d over the active trial elements:
///   H_ij = <grad u_i . grad u_j>/(2 m_r) + <u_i| V_d |u_j>,
///   V_d  = q_w^2 |A_(rho-rho0)|^2/(2 m_r) + (P y-hat - e B x rho)^2/(2M) - e^2/rho,
/// with A the symmetric-gauge vector potential about rho0 = (d P/eB, 0).
/// The imaginary linear-in-A term has vanishing expectation for real trials
/// and is dropped; gauge_residual reports the quadrature check of that.
FunctionalResult energy_functional(const TrialParams& p, const SystemSpec& sys,
                                   const FieldConfig& fields, const QuadratureSpec& quad);

/// Repeats the evaluation on refined node counts until |dE| < quad.tol or
/// quad.max_refine levels are exhausted (then throws QuadratureError).
FunctionalResult energy_functional_refined(const TrialParams& p, const SystemSpec& sys,
                                           const FieldConfig& fields, QuadratureSpec quad);

enum class StateClass { Centered, Decentered, Mixed };

std::string to_string(StateClass c);

/// centered for weight1 >= 0.9, decentered for <= 0.1, mixed between.
StateClass classify(double weight1);

struct OptimizeOptions {
    enum class Family { Centered, Decentered, Both };
    Family family = Family::Both;
    int restarts = 6;        ///< multi-start count per trial family
    int max_iter = 1100;     ///< simplex iterations per start
    int threads = 1;         ///< parallel restarts (deterministic merge)
    QuadratureSpec quad{};   ///< search-time quadrature
    bool refine_final = true;
    std::optional<TrialParams> warm_start; ///< extra start, e.g. previous scan point
};

struct VariationalResult {
    double E = 0.0;
    TrialParams params;      ///< full parameter vector with resolved C1, C2
    double rho_mean = 0.0;
    StateClass classification = StateClass::Centered;
    Mat2 S{};
    Mat2 H{};
    double C1 = 1.0, C2 = 0.0;
    double weight1 = 1.0;
    double E_centered = 0.0, E_decentered = 0.0; ///< family bests (NaN if unused)
    long functional_evals = 0;
    int restarts_used = 0;
    double quad_error = 0.0;
    double gauge_residual = 0.0;
    SystemSpec sys;
    FieldConfig fields;
    QuadratureSpec quad;
};

/// Seed of the centered family: exact Coulomb cusp slope plus the far-field
/// Gaussian pinned to A3^2/A5 = e B/4 (released during optimization).
TrialParams centered_seed(const SystemSpec& sys, const FieldConfig& fields);

/// Seed of the decentered family from the magnetic-well expansion at the
/// outer minimum; requires P > p_saddle.
TrialParams decentered_seed(const SystemSpec& sys, const FieldConfig& fields);

/// Full solve: multi-start simplex over the nonlinear parameters with the
/// linear pair resolved exactly at every step, per seed family, followed by
/// the joint two-element evaluation (and near-crossing polish).
VariationalResult optimize(const SystemSpec& sys, const FieldConfig& fields,
                           const OptimizeOptions& opts = {});

/// <rho> of the converged state by the same quadrature.
double expectation_rho(const VariationalResult& result);

struct ScanPoint {
    double P = 0.0;
    double E = 0.0;
    StateClass cls = StateClass::Centered;
    double E_centered = 0.0;
    double E_decentered = 0.0; ///< NaN when the family is unavailable
    double d = 0.0;
    double rho_mean = 0.0;
};

struct ScanPcResult {
    double P_c = 0.0;         ///< midpoint of the classification-flip bracket
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double crossing_lo = 0.0; ///< energy-crossing bracket of the seed families
    double crossing_hi = 0.0;
    std::vector<ScanPoint> points;
};

/// Optimizes along an ascending P grid (warm-started) and brackets the
/// centered->decentered transition. Throws NotBracketed if no flip occurs.
ScanPcResult scan_pc(const SystemSpec& sys, double B_eff, const std::vector<double>& P_grid,
                     const OptimizeOptions& opts = {});

} // namespace magnetoatom
