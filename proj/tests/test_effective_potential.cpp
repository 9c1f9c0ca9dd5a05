#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "magnetoatom/effective_potential.hpp"
#include "magnetoatom/units.hpp"

using namespace magnetoatom;

namespace {

// Independent oracle: locate on-axis stationary points by scanning the sign
// of a central-difference derivative of v_eff(x,0) and bisecting, without
// touching the cubic.
std::vector<double> bisection_stationary_points(const SystemSpec& sys,
                                                const FieldConfig& f) {
    const auto deriv = [&](double x) {
        const double h = 1e-6 * x;
        return (v_eff_axis(x + h, sys, f) - v_eff_axis(x - h, sys, f)) / (2.0 * h);
    };
    std::vector<double> roots;
    const double lo = 1e-3, hi = 10.0 * f.P_int / (sys.e * f.B_int) + 10.0;
    double prev_x = lo, prev_d = deriv(lo);
    for (int i = 1; i <= 4000; ++i) {
        const double x = lo * std::pow(hi / lo, i / 4000.0);
        const double d = deriv(x);
        if ((prev_d < 0.0) != (d < 0.0)) {
            double a = prev_x, b = x;
            for (int j = 0; j < 100; ++j) {
                const double m = 0.5 * (a + b);
                if ((deriv(a) < 0.0) == (deriv(m) < 0.0)) a = m; else b = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_d = d;
    }
    return roots;
}

} // namespace

TEST_CASE("v_eff: P=0 is azimuthally symmetric") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 1.0, 0.0);
    for (double rho : {0.3, 1.0, 5.0}) {
        const double v0 = v_eff(rho, 0.0, s, f);
        for (double ang : {0.4, 1.5, 3.0}) {
            CHECK(v_eff(rho * std::cos(ang), rho * std::sin(ang), s, f) ==
                  doctest::Approx(v0).epsilon(1e-13));
        }
        const double expected =
            0.5 * f.B_int * f.B_int * rho * rho / s.M - 1.0 / rho;
        CHECK(v0 == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("v_eff: B=P=0 is pure Coulomb") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 0.0, 0.0);
    CHECK(v_eff(2.0, 0.0, s, f) == doctest::Approx(-0.5));
    CHECK(v_eff(0.6, 0.8, s, f) == doctest::Approx(-1.0));
}

TEST_CASE("v_eff: origin rejected, y-parity holds") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 1.0, 50.0);
    CHECK_THROWS_AS(v_eff(0.0, 0.0, s, f), OriginSingularity);
    for (double x : {-3.0, 0.5, 8.0})
        for (double y : {0.25, 2.0})
            CHECK(v_eff(x, y, s, f) == doctest::Approx(v_eff(x, -y, s, f)));
}

TEST_CASE("stationary_points: hydrogen saddle momentum is 36.7") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 1.0, 0.0);
    const auto cp = stationary_points(s, f);
    CHECK(cp.p_saddle == doctest::Approx(36.7).epsilon(0.1 / 36.7));
    CHECK_FALSE(cp.x_min.has_value());
    CHECK_FALSE(cp.x_max.has_value());
}

TEST_CASE("stationary_points: double root at the saddle") {
    const auto s = hydrogen();
    auto f = make_fields(s, 1.0, 0.0);
    f.P_int = std::cbrt(27.0 * f.B_int * s.M / 4.0);
    const auto cp = stationary_points(s, f);
    REQUIRE(cp.x_min.has_value());
    CHECK(*cp.x_min == doctest::Approx(cp.x_saddle));
    CHECK(*cp.x_max == doctest::Approx(cp.x_saddle));
    CHECK(cp.x_saddle == doctest::Approx(std::cbrt(2.0 * s.M / (f.B_int * f.B_int))));
    CHECK(*cp.barrier == doctest::Approx(0.0));
}

TEST_CASE("stationary_points: roots match the bisection oracle at P=50") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 1.0, 50.0);
    const auto cp = stationary_points(s, f);
    REQUIRE(cp.x_min.has_value());
    REQUIRE(cp.x_max.has_value());
    CHECK(0.0 < *cp.x_max);
    CHECK(*cp.x_max < cp.x_saddle);
    CHECK(cp.x_saddle < *cp.x_min);

    // Cubic residual bound.
    const double c = f.P_int / (s.e * f.B_int);
    const double K = s.M / (f.B_int * f.B_int);
    for (double x : {*cp.x_min, *cp.x_max}) {
        const double res = x * x * x - c * x * x + K;
        CHECK(std::abs(res) < 1e-9 * std::max(1.0, x * x * x));
    }

    const auto oracle = bisection_stationary_points(s, f);
    REQUIRE(oracle.size() == 2);
    CHECK(*cp.x_max == doctest::Approx(oracle[0]).epsilon(1e-5));
    CHECK(*cp.x_min == doctest::Approx(oracle[1]).epsilon(1e-5));

    // Classification by curvature of the axis profile.
    const auto curv = [&](double x) {
        const double h = 1e-4;
        return (v_eff_axis(x + h, s, f) - 2.0 * v_eff_axis(x, s, f) +
                v_eff_axis(x - h, s, f)) / (h * h);
    };
    CHECK(curv(*cp.x_min) > 0.0);
    CHECK(curv(*cp.x_max) < 0.0);

    // On-axis value consistency between the 2D and 1D forms.
    CHECK(v_eff(*cp.x_min, 0.0, s, f) == doctest::Approx(*cp.v_min));
}

TEST_CASE("stationary_points: B=0 degenerate") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 0.0, 10.0);
    CHECK_THROWS_AS(stationary_points(s, f), DegenerateField);
}

TEST_CASE("p_saddle cube-root homogeneity: p_saddle(8B) = 2 p_saddle(B)") {
    const auto s = hydrogen();
    const auto f1 = make_fields(s, 1.0, 0.0);
    const auto f8 = make_fields(s, 8.0, 0.0);
    CHECK(stationary_points(s, f8).p_saddle ==
          doctest::Approx(2.0 * stationary_points(s, f1).p_saddle).epsilon(1e-12));
}

TEST_CASE("x_saddle is independent of charge at fixed internal field") {
    const auto s1 = derive_system(1.0, 1.0, 1836.15267);
    const auto s2 = derive_system(2.0, 1.0, 1836.15267);
    FieldConfig f1 = make_fields(s1, 1.0, 0.0);
    FieldConfig f2 = f1; // same B_int by construction
    CHECK(stationary_points(s1, f1).x_saddle ==
          doctest::Approx(stationary_points(s2, f2).x_saddle).epsilon(1e-14));
}

TEST_CASE("asymptotic_extrema: leading term and Table IV scale") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 0.1, 100.0);
    const auto a = asymptotic_extrema(s, f);
    CHECK(a.x_min_asym == doctest::Approx(250.0).epsilon(2e-3));
}

TEST_CASE("asymptotic_extrema: error shrinks as P grows") {
    const auto s = hydrogen();
    auto f = make_fields(s, 1.0, 0.0);
    const double ps = stationary_points(s, f).p_saddle;
    double prev_err = 1e300;
    for (double mult : {2.0, 4.0, 8.0}) {
        f.P_int = mult * ps;
        const auto cp = stationary_points(s, f);
        const auto a = asymptotic_extrema(s, f);
        const double err = std::abs(a.x_min_asym - *cp.x_min) / *cp.x_min;
        CHECK(err < prev_err);
        prev_err = err;
    }
}

TEST_CASE("asymptotic_extrema: barrier dominated by P^2/2M") {
    const auto s = hydrogen();
    auto f = make_fields(s, 1.0, 0.0);
    const double ps = stationary_points(s, f).p_saddle;
    f.P_int = 50.0 * ps;
    const auto a = asymptotic_extrema(s, f);
    CHECK(a.barrier_asym / (0.5 * f.P_int * f.P_int / s.M) ==
          doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("asymptotic_extrema: out of regime below the saddle") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 1.0, 10.0);
    CHECK_THROWS_AS(asymptotic_extrema(s, f), OutOfRegime);
}
