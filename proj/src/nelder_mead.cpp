#include "magnetoatom/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace magnetoatom {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const std::vector<double>& steps,
                             const NelderMeadOptions& opts) {
    const int n = static_cast<int>(x0.size());

    // Gao-Han adaptive coefficients.
    const double alpha = 1.0;
    const double gamma = 1.0 + 2.0 / n;
    const double beta = 0.75 - 0.5 / n;
    const double delta = 1.0 - 1.0 / n;

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (int i = 0; i < n; ++i) {
        double step = steps[i];
        if (step == 0.0) step = 0.02 * std::max(1.0, std::abs(x0[i]));
        simplex[i + 1][i] += step;
    }
    std::vector<double> fv(n + 1);
    for (int i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

    std::vector<int> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);

    NelderMeadResult result;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });

        const int best = order[0], worst = order[n], second = order[n - 1];
        const double spread = fv[worst] - fv[best];
        if (spread <= opts.ftol_rel * (std::abs(fv[best]) + 1e-12)) {
            result.converged = true;
            break;
        }
        if (opts.xtol > 0.0) {
            double size = 0.0;
            for (int i = 0; i < n; ++i)
                size = std::max(size, std::abs(simplex[worst][i] - simplex[best][i]));
            if (size < opts.xtol) {
                result.converged = true;
                break;
            }
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (int i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (int j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (int j = 0; j < n; ++j) centroid[j] /= n;

        for (int j = 0; j < n; ++j) xr[j] = centroid[j] + alpha * (centroid[j] - simplex[worst][j]);
        const double fr = f(xr);

        if (fr < fv[best]) {
            for (int j = 0; j < n; ++j) xe[j] = centroid[j] + gamma * (xr[j] - centroid[j]);
            const double fe = f(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            simplex[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const auto& base = outside ? xr : simplex[worst];
            for (int j = 0; j < n; ++j) xc[j] = centroid[j] + beta * (base[j] - centroid[j]);
            const double fc = f(xc);
            if (fc < std::min(fr, fv[worst])) {
                simplex[worst] = xc;
                fv[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (int j = 0; j < n; ++j)
                        simplex[i][j] = simplex[best][j] + delta * (simplex[i][j] - simplex[best][j]);
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }

    const int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    result.x = simplex[best];
    result.f = fv[best];
    result.iterations = iter;
    return result;
}

} // namespace magnetoatom
