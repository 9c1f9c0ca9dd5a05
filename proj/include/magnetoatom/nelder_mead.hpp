#pragma once

#include <functional>
#include <vector>

namespace magnetoatom {

struct NelderMeadOptions {
    int max_iter = 2000;
    double ftol_rel = 1e-9;  ///< stop when the simplex f-spread falls below this
    double xtol = 0.0;       ///< optional simplex-size stop (0 disables)
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization with dimension-adaptive expansion and
/// contraction coefficients. Deterministic for identical inputs. Infeasible
/// regions are handled by the objective returning a large finite value.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const std::vector<double>& steps,
                             const NelderMeadOptions& opts = {});

} // namespace magnetoatom
