#include "magnetoatom/effective_potential.hpp"

#include <algorithm>
#include <cmath>

namespace magnetoatom {

namespace {


// d^2/dx^2 of v_eff(x,0) on x > 0.
double axis_second_derivative(double x, double e, double B, double M) {
    return e * e * B * B / M - 2.0 * e * e / (x * x * x);
}

double cubic_residual(double x, double c, double K) {
    return x * x * x - c * x * x + K;
}

double newton_polish(double x, double c, double K) {
    for (int i = 0; i < 3; ++i) {
        const double f = cubic_residual(x, c, K);
        const double fp = 3.0 * x * x - 2.0 * c * x;
        if (fp == 0.0) break;
        const double step = f / fp;
        x -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

double bisect_cubic(double lo, double hi, double c, double K) {
    double flo = cubic_residual(lo, c, K);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = cubic_residual(mid, c, K);
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double v_eff(double x, double y, const SystemSpec& sys, const FieldConfig& fields) {
    const double rho = std::hypot(x, y);
    if (rho == 0.0)
        throw OriginSingularity("v_eff: Coulomb point (0,0)");
    const double e = sys.e;
    const double B = fields.B_int;
    const double P = fields.P_int;
    const double invM = sys.inv_M();
    return 0.5 * P * P * invM + 0.5 * e * e * B * B * rho * rho * invM -
           e * B * P * x * invM - e * e / rho;
}

double v_eff_axis(double x, const SystemSpec& sys, const FieldConfig& fields) {
    return v_eff(x, 0.0, sys, fields);
}

CriticalPoints stationary_points(const SystemSpec& sys, const FieldConfig& fields) {
    const double e = sys.e;
    const double B = fields.B_int;
    const double P = fields.P_int;
    const double M = sys.M;
    if (!(B > 0.0))
        throw DegenerateField("stationary_points: requires B > 0");
    if (sys.m2_infinite)
        throw InvalidParameter("stationary_points: infinite total mass has no magnetic well");

    CriticalPoints cp;
    cp.p_saddle = std::cbrt(27.0 * e * e * e * B * M / 4.0);
    cp.x_saddle = std::cbrt(2.0 * M / (B * B));

    if (P <= cp.p_saddle * (1.0 - 1e-8)) return cp;

    const double c = P / (e * B);   // cubic: x^3 - c x^2 + K = 0
    const double K = M / (B * B);

    if (std::abs(P - cp.p_saddle) < 1e-8 * cp.p_saddle) {
        // Double root: minimum and maximum coincide at the saddle.
        cp.x_min = cp.x_saddle;
        cp.x_max = cp.x_saddle;
        cp.v_min = v_eff_axis(cp.x_saddle, sys, fields);
        cp.v_max = cp.v_min;
        cp.barrier = 0.0;
        return cp;
    }

    // Depressed form t^3 + p t + q with x = t + c/3.
    const double p = -c * c / 3.0;
    const double q = K - 2.0 * c * c * c / 27.0;
    const double trig = std::clamp(1.5 * q / p * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double theta = std::acos(trig) / 3.0;
    const double amp = 2.0 * std::sqrt(-p / 3.0);

    double roots[3];
    for (int k = 0; k < 3; ++k)
        roots[k] = amp * std::cos(theta - 2.0 * M_PI * k / 3.0) + c / 3.0;
    std::sort(roots, roots + 3);

    // roots[0] < 0 is unphysical (the x < 0 branch obeys a different cubic).
    double x_max = newton_polish(roots[1], c, K);
    double x_min = newton_polish(roots[2], c, K);

    const auto bad = [&](double x) {
        return !(x > 0.0) ||
               std::abs(cubic_residual(x, c, K)) > 1e-9 * std::max(1.0, x * x * x);
    };
    if (bad(x_max)) x_max = bisect_cubic(1e-12 * cp.x_saddle, cp.x_saddle, c, K);
    if (bad(x_min)) x_min = bisect_cubic(cp.x_saddle, c, c, K);

    if (axis_second_derivative(x_max, e, B, M) > axis_second_derivative(x_min, e, B, M))
        std::swap(x_min, x_max);

    cp.x_min = x_min;
    cp.x_max = x_max;
    cp.v_min = v_eff_axis(x_min, sys, fields);
    cp.v_max = v_eff_axis(x_max, sys, fields);
    cp.barrier = *cp.v_max - *cp.v_min;
    return cp;
}

AsymptoticExtrema asymptotic_extrema(const SystemSpec& sys, const FieldConfig& fields) {
    const double e = sys.e;
    const double B = fields.B_int;
    const double P = fields.P_int;
    const double M = sys.M;
    if (!(B > 0.0))
        throw DegenerateField("asymptotic_extrema: requires B > 0");
    if (sys.m2_infinite)
        throw InvalidParameter("asymptotic_extrema: infinite total mass");

    const double p_saddle = std::cbrt(27.0 * e * e * e * B * M / 4.0);
    if (P <= p_saddle)
        throw OutOfRegime("asymptotic_extrema: requires P > p_saddle");

    AsymptoticExtrema a;
    a.x_min_asym = P / (e * B) - e * e * M / (P * P);
    a.x_max_asym = std::sqrt(e * M / (P * B)) + e * e * M / (2.0 * P * P);
    const double e3 = e * e * e;
    a.barrier_asym = 0.5 * P * P / M - std::sqrt(4.0 * B * e3 * P / M) +
                     1.5 * B * e3 / P +
                     std::sqrt(B * B * B * e3 * e3 * e3 * M / (16.0 * std::pow(P, 5)));
    return a;
}

} // namespace magnetoatom
