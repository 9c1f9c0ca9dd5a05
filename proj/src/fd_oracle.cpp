#include "magnetoatom/fd_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "magnetoatom/effective_potential.hpp"

namespace magnetoatom {

namespace {

using Cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<Cplx>;
using Vec = Eigen::VectorXcd;

constexpr std::size_t kMemoryBudgetBytes = 2ull << 30;
constexpr std::size_t kBytesPerNode = 160; // sparse row + a few work vectors

// Effective Coulomb diagonal near the singularity. The cusp of the true
// state makes the 5-point kinetic stencil locally first-order; requiring the
// discrete operator to be exact on the local solution exp(-2 m_r e^2 rho)
// (eigenvalue -2 m_r e^4 of the pure Coulomb problem) inserts the
// counter-term that cancels that truncation error, restoring O(h^2).
double coulomb_cusp_diagonal(double x, double y, double h, double mr, double e2) {
    const double a = 2.0 * mr * e2;
    const auto psi = [&](double xx, double yy) { return std::exp(-a * std::hypot(xx, yy)); };
    const double t = 1.0 / (2.0 * mr * h * h);
    const double kinetic = t * (4.0 * psi(x, y) - psi(x + h, y) - psi(x - h, y) -
                                psi(x, y + h) - psi(x, y - h));
    return -2.0 * mr * e2 * e2 - kinetic / psi(x, y);
}

// Primitive of 1/sqrt(x^2+y^2) over axis-aligned rectangles.
double coulomb_primitive(double x, double y) {
    const double r = std::hypot(x, y);
    double f = 0.0;
    if (x != 0.0 && y + r != 0.0) f += x * std::log(y + r);
    if (y != 0.0 && x + r != 0.0) f += y * std::log(x + r);
    return f;
}

// Mean of 1/rho over the cell [x-h/2,x+h/2] x [y-h/2,y+h/2]; the midpoint
// value of the singular factor would cost an order of accuracy near origin.
double coulomb_cell_mean(double x, double y, double h) {
    const double x1 = x - 0.5 * h, x2 = x + 0.5 * h;
    const double y1 = y - 0.5 * h, y2 = y + 0.5 * h;
    const double integral = coulomb_primitive(x2, y2) - coulomb_primitive(x1, y2) -
                            coulomb_primitive(x2, y1) + coulomb_primitive(x1, y1);
    return integral / (h * h);
}

double rayleigh(const SpMat& H, const Vec& v) {
    return (v.dot(H * v)).real() / v.squaredNorm();
}

// Conjugate gradient for the Hermitian positive definite (H - sigma I).
// Returns iterations used; x holds the solution (warm-startable).
int cg_solve(const SpMat& H, double sigma, const Vec& b, Vec& x, double rel_tol,
             int max_iter) {
    Vec r = b - (H * x - sigma * x);
    Vec p = r;
    double rs = r.squaredNorm();
    const double target = rel_tol * rel_tol * b.squaredNorm();
    int it = 0;
    for (; it < max_iter && rs > target; ++it) {
        const Vec Ap = H * p - sigma * p;
        const double pAp = (p.dot(Ap)).real();
        if (!(pAp > 0.0)) break; // shift not below the spectrum; bail out
        const double alpha = rs / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        const double rs_new = r.squaredNorm();
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    return it;
}

// Full-reorthogonalization Lanczos with thick restarts from the best Ritz
// vector. Suited to the coarse cascade levels.
GroundState lanczos_ground(const SpMat& H, const Vec& start, double tol, int m_max,
                           int rounds) {
    const auto n = H.rows();
    const int m = std::min<int>(m_max, static_cast<int>(n) - 1);

    Vec v0 = start.normalized();
    GroundState out;
    for (int round = 0; round < rounds; ++round) {
        std::vector<Vec> V;
        V.reserve(m + 1);
        V.push_back(v0);
        Eigen::VectorXd alpha(m), beta(m);
        int k = 0;
        for (; k < m; ++k) {
            Vec w = H * V[k];
            alpha(k) = (V[k].dot(w)).real();
            w -= alpha(k) * V[k];
            if (k > 0) w -= beta(k - 1) * V[k - 1];
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= k; ++i) w -= V[i].dot(w) * V[i];
            beta(k) = w.norm();
            if (beta(k) < 1e-13) { ++k; break; }
            V.push_back(w / beta(k));
        }

        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            T(i, i) = alpha(i);
            if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta(i);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const int lo = 0; // ascending eigenvalues
        Vec ritz = Vec::Zero(n);
        for (int i = 0; i < k; ++i) ritz += es.eigenvectors()(i, lo) * V[i];
        ritz.normalize();

        out.E = es.eigenvalues()(lo);
        out.vec = ritz;
        out.iterations += k;
        out.residual = (H * ritz - out.E * ritz).norm();
        if (out.residual <= tol * std::max(1.0, std::abs(out.E))) {
            out.converged = true;
            return out;
        }
        v0 = ritz;
    }
    return out;
}

GroundState inverse_iteration(const SpMat& H, double sigma, const Vec& start, double tol,
                              int max_outer) {
    GroundState out;
    Vec x = start.normalized();
    Vec y = x;
    double lambda = rayleigh(H, x);
    for (int outer = 0; outer < max_outer; ++outer) {
        const double resid_prev = (H * x - lambda * x).norm();
        const double cg_tol =
            std::clamp(0.03 * resid_prev / (std::abs(lambda) + 1.0), 1e-11, 1e-4);
        out.iterations += cg_solve(H, sigma, x, y, cg_tol, 5000);
        y.normalize();
        x = y;
        lambda = rayleigh(H, x);
        out.residual = (H * x - lambda * x).norm();
        if (out.residual <= tol * std::max(1.0, std::abs(lambda))) {
            out.converged = true;
            break;
        }
    }
    out.E = lambda;
    out.vec = x;
    return out;
}

// Deterministic start: Gaussian bump at the potential minimum node.
Vec default_start(const DiscreteOperator& op) {
    const auto& g = op.grid;
    Vec v(g.size());
    // locate the diagonal minimum
    double vmin = 1e300;
    int imin = 0, jmin = 0;
    for (int j = 0; j < g.Ny; ++j)
        for (int i = 0; i < g.Nx; ++i) {
            const double diag = op.H.coeff(static_cast<long>(j) * g.Nx + i,
                                           static_cast<long>(j) * g.Nx + i).real();
            if (diag < vmin) {
                vmin = diag;
                imin = i;
                jmin = j;
            }
        }
    const double w = std::max(g.Lx, g.Ly) / 6.0;
    for (int j = 0; j < g.Ny; ++j)
        for (int i = 0; i < g.Nx; ++i) {
            const double dx = g.x(i) - g.x(imin);
            const double dy = g.y(j) - g.y(jmin);
            v(static_cast<long>(j) * g.Nx + i) =
                std::exp(-0.5 * (dx * dx + dy * dy) / (w * w)) + 1e-4;
        }
    return v;
}

// Bilinear interpolation of a coarse-grid vector onto a finer grid.
Vec interpolate(const GridSpec& coarse, const Vec& vc, const GridSpec& fine) {
    Vec vf(fine.size());
    const double hc = coarse.h();
    for (int j = 0; j < fine.Ny; ++j) {
        for (int i = 0; i < fine.Nx; ++i) {
            const double x = fine.x(i), y = fine.y(j);
            const double fx = (x - coarse.x(0)) / hc;
            const double fy = (y - coarse.y(0)) / hc;
            const int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, coarse.Nx - 2);
            const int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, coarse.Ny - 2);
            const double tx = std::clamp(fx - i0, 0.0, 1.0);
            const double ty = std::clamp(fy - j0, 0.0, 1.0);
            const auto at = [&](int ii, int jj) {
                return vc(static_cast<long>(jj) * coarse.Nx + ii);
            };
            vf(static_cast<long>(j) * fine.Nx + i) =
                (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) +
                (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
        }
    }
    return vf;
}

} // namespace

GridSpec GridSpec::auto_sized(const SystemSpec& sys, const FieldConfig& fields, int N) {
    const double e2 = sys.e * sys.e;
    double pad = 4.5 / (sys.m_r * e2);
    if (fields.B_int > 0.0)
        pad = std::max(pad, 6.0 * std::sqrt(2.0 / (sys.e * fields.B_int)));

    double x_lo = -pad, x_hi = pad;
    if (fields.B_int > 0.0 && !sys.m2_infinite) {
        const auto cp = stationary_points(sys, fields);
        if (cp.x_min) x_hi = *cp.x_min + pad;
    }

    GridSpec g;
    // Counts divisible by 32 keep nested coarsenings square.
    g.Nx = std::max(32, (N / 32) * 32);
    double h = (x_hi - x_lo) / g.Nx;
    // Snap the left edge onto the cell lattice so the origin sits on a cell
    // corner (nodes at half offsets never hit the singularity).
    x_lo = std::round(x_lo / h) * h;
    g.Lx = 0.5 * g.Nx * h;
    g.x_center = x_lo + g.Lx;
    const int ny = static_cast<int>(std::ceil(2.0 * pad / h / 32.0)) * 32;
    g.Ny = std::max(32, ny);
    g.Ly = 0.5 * g.Ny * h;
    return g;
}

GridSpec GridSpec::coarsened() const {
    GridSpec g = *this;
    g.Nx /= 2;
    g.Ny /= 2;
    return g;
}

int GridSpec::suggested_nx(const SystemSpec& sys, const FieldConfig& fields,
                           double h_target) {
    const GridSpec probe = auto_sized(sys, fields, 128);
    const double span = 2.0 * probe.Lx;
    int n = 128;
    while (n < 4096 && span / n > h_target) n *= 2;
    return n;
}

DiscreteOperator assemble(const SystemSpec& sys, const FieldConfig& fields,
                          const GridSpec& grid, const PotentialOverride* potential) {
    if (grid.size() * kBytesPerNode > kMemoryBudgetBytes) {
        const int suggested = static_cast<int>(
            std::sqrt(static_cast<double>(kMemoryBudgetBytes / kBytesPerNode)));
        throw GridTooLarge("assemble: grid " + std::to_string(grid.Nx) + "x" +
                           std::to_string(grid.Ny) + " over budget; try Nx <= " +
                           std::to_string(suggested));
    }
    if (std::abs(grid.h() - 2.0 * grid.Ly / grid.Ny) > 1e-12 * grid.h())
        throw InvalidParameter("assemble: cells must be square");

    const double h = grid.h();
    const double e = sys.e;
    const double e2 = e * e;
    const double B = fields.B_int;
    const double P = fields.P_int;
    const double mr = sys.m_r;
    const double invM = sys.inv_M();
    const double qw = sys.q_w;
    const double x0 = (B > 0.0) ? fields.d * P / (e * B) : 0.0;

    const double t = 1.0 / (2.0 * mr * h * h);
    const double gauge = qw / (mr * 2.0 * h); // coefficient of i*A*(central diff)

    // Cusp-correction disc: a fixed physical radius (within the Coulomb-
    // dominated zone, below the magnetic length). Fixed so nested grids see
    // the same correction region; the floor only guarantees the innermost
    // stencil ring is always covered.
    const double cusp_scale = 0.25 / (mr * e2);
    double r_fix = cusp_scale;
    if (B > 0.0) r_fix = std::min(r_fix, 0.35 * std::sqrt(2.0 / (e * B)));
    r_fix = std::max(r_fix, 1.5 * h);

    const auto index = [&](int i, int j) { return static_cast<long>(j) * grid.Nx + i; };

    std::vector<Eigen::Triplet<Cplx>> trip;
    trip.reserve(grid.size() * 5);

    for (int j = 0; j < grid.Ny; ++j) {
        for (int i = 0; i < grid.Nx; ++i) {
            const double x = grid.x(i);
            const double y = grid.y(j);
            const long row = index(i, j);

            double v;
            if (potential) {
                v = (*potential)(x, y);
            } else {
                const double rho = std::hypot(x, y);
                const double dxp = x - x0;
                v = qw * qw * B * B * (dxp * dxp + y * y) / (8.0 * mr) +
                    0.5 * invM * (P * P - 2.0 * e * B * P * x + e2 * B * B * rho * rho);
                if (grid.coulomb_cusp_fix && rho < r_fix) {
                    v += coulomb_cusp_diagonal(x, y, h, mr, e2);
                } else {
                    v += -e2 * coulomb_cell_mean(x, y, h);
                }
            }
            trip.emplace_back(row, row, Cplx(4.0 * t + v, 0.0));

            const double ax = -0.5 * B * y;      // depends on y only
            const double ay = 0.5 * B * (x - x0); // depends on x only
            if (i + 1 < grid.Nx) {
                trip.emplace_back(row, index(i + 1, j), Cplx(-t, gauge * ax));
                trip.emplace_back(index(i + 1, j), row, Cplx(-t, -gauge * ax));
            }
            if (j + 1 < grid.Ny) {
                trip.emplace_back(row, index(i, j + 1), Cplx(-t, gauge * ay));
                trip.emplace_back(index(i, j + 1), row, Cplx(-t, -gauge * ay));
            }
        }
    }

    DiscreteOperator op;
    op.H.resize(static_cast<long>(grid.size()), static_cast<long>(grid.size()));
    op.H.setFromTriplets(trip.begin(), trip.end());
    op.H.makeCompressed();
    op.grid = grid;
    op.d = fields.d;
    op.x0 = x0;
    return op;
}

GroundState ground_state(const DiscreteOperator& op, double tol,
                         std::optional<double> shift_hint, const Eigen::VectorXcd* start) {
    const Vec v0 = start ? *start : default_start(op);
    if (!shift_hint) {
        return lanczos_ground(op.H, v0, tol, 180, 8);
    }
    return inverse_iteration(op.H, *shift_hint, v0, tol, 40);
}

ExtrapolationResult extrapolate(double E_h, double E_half) {
    ExtrapolationResult r;
    const double gap = std::abs(E_half - E_h);
    if (gap > 0.1 * std::max(1.0, std::abs(E_half))) {
        r.E = E_half;
        r.correction = 0.0;
        r.warning = true;
        return r;
    }
    r.E = (4.0 * E_half - E_h) / 3.0;
    r.correction = r.E - E_half;
    return r;
}

OracleSolution solve_ground(const SystemSpec& sys, const FieldConfig& fields, double d,
                            int N_target, int report_levels, double tol) {
    if (report_levels < 1 || report_levels > 2)
        throw InvalidParameter("solve_ground: report_levels must be 1 or 2");
    FieldConfig f = fields;
    f.d = d;

    // Nested grid sizes from a Lanczos-friendly coarse level.
    std::vector<int> sizes;
    for (int n = N_target; n >= 48; n /= 2) sizes.push_back(n);
    if (sizes.empty()) sizes.push_back(N_target);
    std::reverse(sizes.begin(), sizes.end());

    const GridSpec target = GridSpec::auto_sized(sys, f, N_target);

    OracleSolution out;
    std::optional<GroundState> prev;
    GridSpec prev_grid;
    double prev_E = 0.0, prev_prev_E = 0.0;
    int solved = 0;

    for (int n : sizes) {
        GridSpec g = target;
        for (int shrink = N_target; shrink > n; shrink /= 2) g = g.coarsened();
        const auto op = assemble(sys, f, g);

        GroundState gs;
        if (!prev) {
            gs = ground_state(op, tol);
        } else {
            const Vec start = interpolate(prev_grid, prev->vec, g);
            const double margin =
                (solved >= 2) ? std::max(0.05, 3.0 * std::abs(prev_E - prev_prev_E)) : 0.5;
            gs = ground_state(op, tol, prev_E - margin, &start);
        }

        prev_prev_E = prev_E;
        prev_E = gs.E;
        prev_grid = g;
        ++solved;

        OracleLevel level;
        level.N = g.Nx;
        level.h = g.h();
        level.E = gs.E;
        level.residual = gs.residual;
        level.iterations = gs.iterations;
        out.levels.push_back(level);
        prev = std::move(gs);
    }

    if (static_cast<int>(out.levels.size()) > report_levels)
        out.levels.erase(out.levels.begin(), out.levels.end() - report_levels);

    if (report_levels == 2 && out.levels.size() == 2) {
        const auto ex = extrapolate(out.levels[0].E, out.levels[1].E);
        out.E = ex.E;
        out.extrap_warning = ex.warning;
    } else {
        out.E = out.levels.back().E;
    }
    return out;
}

} // namespace magnetoatom
