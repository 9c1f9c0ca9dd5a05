#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "magnetoatom/perturbation.hpp"
#include "magnetoatom/units.hpp"

using namespace magnetoatom;

TEST_CASE("derive_system: infinite-mass limit") {
    const auto s = derive_system(1.0, 1.0, kInfiniteMass);
    CHECK(s.m2_infinite);
    CHECK(s.m_r == 1.0);
    CHECK(s.mu == -1.0);
    CHECK(s.q_w == 1.0);
    CHECK(s.mu1 == 0.0);
    CHECK(s.mu2 == 1.0);
    CHECK(s.inv_M() == 0.0);
}

TEST_CASE("derive_system: equal masses") {
    const auto s = derive_system(1.0, 1.0, 1.0);
    CHECK(s.m_r == doctest::Approx(0.5));
    CHECK(s.M == doctest::Approx(2.0));
    CHECK(s.mu == doctest::Approx(0.0));
    CHECK(s.q_w == doctest::Approx(0.0));
}

TEST_CASE("derive_system: finite-mass hydrogen") {
    const auto s = hydrogen();
    CHECK(s.m_r == doctest::Approx(0.999455).epsilon(1e-5));
    CHECK(s.M == doctest::Approx(1837.15267).epsilon(1e-10));
    // Zeroth series coefficient -2 m_r matches the reference -1.9989.
    CHECK(-2.0 * s.m_r == doctest::Approx(-1.9989).epsilon(5e-4));
}

TEST_CASE("derive_system: invariants") {
    for (const auto& s : {hydrogen(), positronium(), derive_system(2.0, 3.0, 7.0)}) {
        CHECK(s.mu1 + s.mu2 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(s.m_r <= std::min(s.m1, s.m2) + 1e-14);
        CHECK(s.q_w == doctest::Approx(s.e * (s.mu2 - s.mu1)));
    }
}

TEST_CASE("derive_system: rejects non-positive input") {
    CHECK_THROWS_AS(derive_system(0.0, 1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(derive_system(1.0, -1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(derive_system(1.0, 1.0, 0.0), InvalidParameter);
}

TEST_CASE("q_w flips sign under particle exchange, m_r and M invariant") {
    const auto a = derive_system(1.0, 2.0, 5.0);
    const auto b = derive_system(1.0, 5.0, 2.0);
    CHECK(a.q_w == doctest::Approx(-b.q_w));
    CHECK(a.m_r == doctest::Approx(b.m_r));
    CHECK(a.M == doctest::Approx(b.M));
}

TEST_CASE("to_internal: hydrogen field conversion") {
    const auto s = hydrogen();
    const auto f = make_fields(s, 1.0, 0.0);
    // Independent oracle: B_int/B_eff = 4 m_r^2 with m_r = 0.999455.
    CHECK(f.B_int == doctest::Approx(3.99564).epsilon(1e-5));
    CHECK(f.B_int == 4.0 * s.m_r * s.m_r * s.e * s.e * s.e * f.B_eff);
    CHECK(f.P_int == f.P_eff);
}

TEST_CASE("to_internal: zero field and round trip") {
    const auto s = positronium();
    const auto f = make_fields(s, 0.0, 3.0);
    CHECK(f.B_int == 0.0);
    // Round trip is exact: both representations live in the struct.
    CHECK(f.B_eff == 0.0);
    CHECK(f.P_eff == 3.0);
    CHECK_THROWS_AS(make_fields(s, -1.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(make_fields(s, 1.0, 0.0, 2.0), InvalidParameter);
}

TEST_CASE("scale_system: identity map") {
    const auto h = hydrogen();
    const auto map = scale_system(h, 2.0, 5.0, h);
    CHECK(map.a == doctest::Approx(1.0));
    CHECK(map.energy_ratio == doctest::Approx(1.0));
    CHECK(map.B_target == doctest::Approx(2.0));
    CHECK(map.P_target == doctest::Approx(5.0));
}

TEST_CASE("scale_system: charge doubling") {
    const auto h = hydrogen();
    const auto h2 = derive_system(2.0, 1.0, 1836.15267);
    const auto map = scale_system(h, 1.0, 1.0, h2);
    CHECK(map.a == doctest::Approx(4.0));
    CHECK(map.B_target == doctest::Approx(8.0));
    CHECK(map.P_target == doctest::Approx(4.0));
    CHECK(map.energy_ratio == doctest::Approx(16.0));
}

TEST_CASE("scale_system: mass-ratio mismatch rejected") {
    CHECK_THROWS_AS(scale_system(hydrogen(), 1.0, 1.0, positronium()), ScalingIncompatible);
}

TEST_CASE("scale_system: round trip composes to identity") {
    const auto src = hydrogen();
    const auto tgt = derive_system(3.0, 2.0, 2.0 * 1836.15267);
    const double B = 0.7, P = 12.0;
    const auto fwd = scale_system(src, B, P, tgt);
    const auto back = scale_system(tgt, fwd.B_target, fwd.P_target, src);
    CHECK(back.B_target == doctest::Approx(B).epsilon(1e-12));
    CHECK(back.P_target == doctest::Approx(P).epsilon(1e-12));
    CHECK(fwd.a * back.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fwd.energy_ratio * back.energy_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scale_system: perturbation series respects the energy ratio") {
    const auto src = positronium();
    const auto tgt = derive_system(2.0, 3.0, 3.0); // same |mu2-mu1| = 0
    const double B = 0.02, P = 0.05;
    const auto map = scale_system(src, B, P, tgt);

    const auto e_src = energy_series_eval(energy_coefficients(src), B, P);
    const auto e_tgt = energy_series_eval(energy_coefficients(tgt), map.B_target, map.P_target);
    CHECK(e_tgt.E_hat == doctest::Approx(map.energy_ratio * e_src.E_hat).epsilon(1e-10));
}
