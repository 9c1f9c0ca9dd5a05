#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "magnetoatom/units.hpp"

namespace magnetoatom {

/// Uniform square-cell grid with nodes at half-integer offsets so the
/// Coulomb point never coincides with a node. Dirichlet boundary.
struct GridSpec {
    int Nx = 128;
    int Ny = 128;
    double Lx = 10.0;       ///< half-width in x
    double Ly = 10.0;       ///< half-width in y
    double x_center = 0.0;  ///< domain midpoint along x (y is symmetric)
    bool coulomb_cusp_fix = true;

    double h() const { return 2.0 * Lx / Nx; }
    double x(int i) const { return x_center - Lx + (i + 0.5) * h(); }
    double y(int j) const { return -Ly + (j + 0.5) * h(); }
    std::size_t size() const { return static_cast<std::size_t>(Nx) * Ny; }

    /// Domain sized from the state's localization scales, covering the
    /// magnetic well (plus padding) when P exceeds the saddle momentum.
    static GridSpec auto_sized(const SystemSpec& sys, const FieldConfig& fields, int N);

    /// Nx that puts the fine-level spacing at h_target for this
    /// configuration's auto-sized domain (rounded up to the next power of
    /// two, clamped to [128, 4096]).
    static int suggested_nx(const SystemSpec& sys, const FieldConfig& fields,
                            double h_target = 0.04);

    /// Same domain, half the resolution (for Richardson pairs).
    GridSpec coarsened() const;
};

/// Assembled finite-difference Hamiltonian. Hermitian by construction: the
/// symmetrized gauge coupling uses centered differences with the vector
/// potential evaluated at the row node; A_x depends only on y and A_y only
/// on x, so the two one-sided coefficients agree across each hop.
struct DiscreteOperator {
    Eigen::SparseMatrix<std::complex<double>> H;
    GridSpec grid;
    double d = 0.0;
    double x0 = 0.0; ///< gauge center abscissa d P/(e B)
};

/// Optional replacement of the full scalar potential (test hook).
using PotentialOverride = std::function<double(double, double)>;

/// Builds h_d on the grid: 5-point kinetic stencil, centered-difference
/// gauge coupling, diagonal potential with the Coulomb term cell-averaged
/// replaced near the singularity by a cusp-calibrated effective value.
/// Throws GridTooLarge when the memory estimate exceeds the budget.
DiscreteOperator assemble(const SystemSpec& sys, const FieldConfig& fields,
                          const GridSpec& grid,
                          const PotentialOverride* potential = nullptr);

struct GroundState {
    double E = 0.0;
    double residual = 0.0; ///< ||H v - E v||
    int iterations = 0;
    bool converged = false;
    Eigen::VectorXcd vec;
};

/// Lowest eigenpair. Without a shift hint a restarted full-reorthogonalized
/// Lanczos run is used (small grids); with a hint, shifted inverse power
/// iteration with conjugate-gradient inner solves. Deterministic start.
GroundState ground_state(const DiscreteOperator& op, double tol = 1e-7,
                         std::optional<double> shift_hint = std::nullopt,
                         const Eigen::VectorXcd* start = nullptr);

struct ExtrapolationResult {
    double E = 0.0;          ///< (4 E_half - E_h) / 3
    double correction = 0.0; ///< E - E_half
    bool warning = false;    ///< level gap too large for an O(h^2) pair
};

/// Richardson step for an O(h^2) pair of eigenvalues at spacings h and h/2.
ExtrapolationResult extrapolate(double E_h, double E_half);

struct OracleLevel {
    int N = 0;
    double h = 0.0;
    double E = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

struct OracleSolution {
    std::vector<OracleLevel> levels; ///< the last `report_levels` entries
    double E = 0.0;                  ///< extrapolated when two levels, else final
    bool extrap_warning = false;
};

/// Cascade driver: solves on nested grids from a coarse Lanczos level up to
/// N_target, carrying interpolated start vectors and shift hints. The last
/// report_levels (1 or 2) grids are reported; with 2, E is extrapolated.
OracleSolution solve_ground(const SystemSpec& sys, const FieldConfig& fields, double d,
                            int N_target, int report_levels = 2, double tol = 1e-7);

} // namespace magnetoatom
