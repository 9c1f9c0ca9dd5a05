#include "magnetoatom/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace magnetoatom {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double angular_value(Angular ang, double phi) {
    switch (ang) {
        case Angular::One: return 1.0;
        case Angular::Cos: return std::cos(phi);
        case Angular::Sin: return std::sin(phi);
        case Angular::Cos2: return std::cos(2.0 * phi);
    }
    return 0.0;
}

double angular_derivative(Angular ang, double phi) {
    switch (ang) {
        case Angular::One: return 0.0;
        case Angular::Cos: return -std::sin(phi);
        case Angular::Sin: return std::cos(phi);
        case Angular::Cos2: return -2.0 * std::sin(2.0 * phi);
    }
    return 0.0;
}

bool is_known_zero_order(int n, int k) {
    return (n == 1 && k == 0) || (n == 0 && k == 1) || (n == 0 && k == 2) ||
           (n == 1 && k == 2);
}

std::string order_str(int n, int k) {
    return "(" + std::to_string(n) + "," + std::to_string(k) + ")";
}

// Quasi-random sample point i of the rho/phi rectangle (R2 sequence).
std::pair<double, double> sample_point(int i) {
    constexpr double a1 = 0.75487766624669276;
    constexpr double a2 = 0.56984029099805327;
    double u = 0.5 + a1 * (i + 1);
    double v = 0.5 + a2 * (i + 1);
    u -= std::floor(u);
    v -= std::floor(v);
    return {0.1 + 9.9 * u, kTwoPi * v};
}

} // namespace

int harmonic_index(Angular ang) {
    switch (ang) {
        case Angular::One: return 0;
        case Angular::Cos: return 1;
        case Angular::Sin: return 1;
        case Angular::Cos2: return 2;
    }
    return 0;
}

Complex PhaseTerm::eval(double rho, double phi) const {
    Complex sum = 0.0;
    for (const auto& m : parts)
        sum += m.coeff * std::pow(rho, m.rho_pow) * angular_value(m.ang, phi);
    return sum;
}

Complex PhaseTerm::d_rho(double rho, double phi) const {
    Complex sum = 0.0;
    for (const auto& m : parts) {
        if (m.rho_pow == 0) continue;
        sum += m.coeff * static_cast<double>(m.rho_pow) * std::pow(rho, m.rho_pow - 1) *
               angular_value(m.ang, phi);
    }
    return sum;
}

Complex PhaseTerm::d_phi(double rho, double phi) const {
    Complex sum = 0.0;
    for (const auto& m : parts)
        sum += m.coeff * std::pow(rho, m.rho_pow) * angular_derivative(m.ang, phi);
    return sum;
}

Complex PhaseTerm::laplacian(double rho, double phi) const {
    Complex sum = 0.0;
    for (const auto& m : parts) {
        const int p = m.rho_pow;
        const int h = harmonic_index(m.ang);
        const int factor = p * p - h * h;
        if (factor == 0) continue;
        sum += m.coeff * static_cast<double>(factor) * std::pow(rho, p - 2) *
               angular_value(m.ang, phi);
    }
    return sum;
}

std::pair<Complex, Complex> PhaseTerm::grad_cartesian(double rho, double phi) const {
    const Complex dr = d_rho(rho, phi);
    const Complex dp = d_phi(rho, phi);
    const double c = std::cos(phi), s = std::sin(phi);
    return {c * dr - s * dp / rho, s * dr + c * dp / rho};
}

bool PhaseTerm::is_real() const {
    return std::all_of(parts.begin(), parts.end(),
                       [](const PhaseMonomial& m) { return m.coeff.imag() == 0.0; });
}

bool PhaseTerm::is_imaginary() const {
    return std::all_of(parts.begin(), parts.end(),
                       [](const PhaseMonomial& m) { return m.coeff.real() == 0.0; });
}

bool PhaseTerm::is_zero() const {
    return std::all_of(parts.begin(), parts.end(),
                       [](const PhaseMonomial& m) { return m.coeff == Complex(0.0); });
}

Complex grad_dot(const PhaseTerm& a, const PhaseTerm& b, double rho, double phi) {
    return a.d_rho(rho, phi) * b.d_rho(rho, phi) +
           a.d_phi(rho, phi) * b.d_phi(rho, phi) / (rho * rho);
}

std::pair<int, int> phase_order_alias(int n, int k) {
    if (n == 0 && k == 2) return {2, 2};
    return {n, k};
}

namespace {

// Builds Phi for a true order: closed forms for {(0,0),(1,1),(2,1),(2,0),
// (2,2)}, empty terms for the orders that vanish identically.
PhaseTerm build_phase(const SystemSpec& sys, int tn, int tk) {
    const double mr = sys.m_r;
    const double mu = sys.mu;
    const double e = sys.e;
    const double invM = sys.inv_M();
    const Complex i_unit(0.0, 1.0);

    PhaseTerm t;
    t.n = tn;
    t.k = tk;

    if (tn == 0 && tk == 0) {
        t.parts = {{2.0 * mr * e * e, 1, Angular::One}};
        return t;
    }
    if (tn == 1 && tk == 1) {
        const double e3 = e * e * e;
        t.parts = {{-3.0 / (16.0 * mr * e3) * invM, 1, Angular::Sin},
                   {-1.0 / (4.0 * e) * invM, 2, Angular::Sin}};
        return t;
    }
    if (tn == 2 && tk == 1) {
        const double e2 = e * e;
        const double base = mu * invM / 1536.0;
        t.parts = {{-i_unit * base * 51.0 / (mr * mr * mr * e2 * e2 * e2), 1, Angular::Cos},
                   {-i_unit * base * 68.0 / (mr * mr * e2 * e2), 2, Angular::Cos},
                   {-i_unit * base * 32.0 / (mr * e2), 3, Angular::Cos}};
        return t;
    }
    if (tn == 2 && tk == 0) {
        // (4 m_r + M mu^2)/M reduces to 1 identically; written out so the
        // infinite-mass limit carries the same closed form.
        const double mass_factor = 4.0 * mr * invM + mu * mu;
        t.parts = {{mass_factor * 9.0 / (384.0 * mr * mr * e * e), 2, Angular::One},
                   {mass_factor * 8.0 / (384.0 * mr), 3, Angular::One}};
        return t;
    }
    if (tn == 2 && tk == 2) {
        const double e4 = e * e * e * e;
        const double e6 = e4 * e * e;
        const double base = invM * invM / 3072.0;
        t.parts = {{-base * 99.0 / (mr * mr * e6), 2, Angular::One},
                   {-base * 40.0 / (mr * e4), 3, Angular::One},
                   {base * 33.0 / (mr * mr * e6), 2, Angular::Cos2},
                   {base * 24.0 / (mr * e4), 3, Angular::Cos2}};
        return t;
    }
    if (is_known_zero_order(tn, tk)) {
        return t; // empty: identically zero
    }
    throw UnsupportedOrder("phase_term: no closed form for order " + order_str(tn, tk));
}

} // namespace

PhaseTerm phase_term(const SystemSpec& sys, int n, int k) {
    // The public label (0,2) refers to the published closed form, which solves
    // the (2,2) equation; the true zero-field P^2 correction vanishes.
    const auto [tn, tk] = phase_order_alias(n, k);
    return build_phase(sys, tn, tk);
}

Complex phase_eval(const SystemSpec& sys, int n, int k, double rho, double phi) {
    return phase_term(sys, n, k).eval(rho, phi);
}

std::pair<Complex, Complex> phase_gradient(const SystemSpec& sys, int n, int k,
                                           double rho, double phi) {
    return phase_term(sys, n, k).grad_cartesian(rho, phi);
}

double PTCoefficient::value(const SystemSpec& sys) const {
    const double invM = sys.inv_M();
    double sum = 0.0;
    for (const auto& t : terms) {
        double v = t.c.to_double();
        v *= std::pow(sys.m_r, t.mr_pow);
        v *= (t.M_pow >= 0) ? std::pow(sys.M, t.M_pow) : std::pow(invM, -t.M_pow);
        if (t.mu_pow != 0) v *= std::pow(sys.mu, t.mu_pow);
        if (t.e_pow != 0) v *= std::pow(sys.e, t.e_pow);
        sum += v;
    }
    return sum;
}

std::optional<RationalSystem> rational_system(const SystemSpec& sys) {
    const auto as_small_int = [](double x) -> std::optional<std::int64_t> {
        const double r = std::nearbyint(x);
        if (r == x && std::abs(r) <= 1e6 && r > 0) return static_cast<std::int64_t>(r);
        return std::nullopt;
    };
    const auto e = as_small_int(sys.e);
    const auto m1 = as_small_int(sys.m1);
    if (!e || !m1) return std::nullopt;

    RationalSystem rs;
    rs.e = Rational(*e);
    if (sys.m2_infinite) {
        rs.infinite_M = true;
        rs.m_r = Rational(*m1);
        rs.mu = Rational(-1);
        return rs;
    }
    const auto m2 = as_small_int(sys.m2);
    if (!m2) return std::nullopt;
    const Rational M = Rational(*m1) + Rational(*m2);
    rs.M = M;
    rs.m_r = Rational(*m1) * Rational(*m2) / M;
    rs.mu = (Rational(*m1) - Rational(*m2)) / M;
    return rs;
}

Rational pt_coefficient_exact(const PTCoefficient& coeff, const RationalSystem& rs) {
    Rational sum(0);
    for (const auto& t : coeff.terms) {
        if (rs.infinite_M) {
            if (t.M_pow < 0) continue;
            if (t.M_pow > 0) throw UnsupportedOrder("pt_coefficient_exact: diverging term");
        }
        Rational v = t.c;
        v = v * rs.m_r.pow(t.mr_pow);
        if (!rs.infinite_M && t.M_pow != 0) v = v * rs.M.pow(t.M_pow);
        if (t.mu_pow != 0) v = v * rs.mu.pow(t.mu_pow);
        if (t.e_pow != 0) v = v * rs.e.pow(t.e_pow);
        sum = sum + v;
    }
    return sum;
}

PTTable energy_coefficients(const SystemSpec& sys) {
    PTTable table;
    table.sys = sys;

    table.coeffs.push_back({0, 0, {{Rational(-2), 1, 0, 0, 4}}});
    table.coeffs.push_back({2, 0, {{Rational(3, 64), -3, 0, 0, -2}}});
    table.coeffs.push_back({2, 2, {{Rational(-21, 256), -3, -2, 0, -6}}});
    // -159 (4 m_r + M mu^2)^2 / (65536 m_r^7 M^2), expanded in monomials.
    table.coeffs.push_back({4, 0,
                            {{Rational(-159 * 16, 65536), -5, -2, 0, -8},
                             {Rational(-159 * 8, 65536), -6, -1, 2, -8},
                             {Rational(-159, 65536), -7, 0, 4, -8}}});
    // 3 (115 M mu^2 - 2062 m_r) / (131072 m_r^7 M^3)
    table.coeffs.push_back({4, 2,
                            {{Rational(345, 131072), -7, -2, 2, -12},
                             {Rational(-6186, 131072), -6, -3, 0, -12}}});
    table.coeffs.push_back({4, 4, {{Rational(17877, 1048576), -7, -4, 0, -16}}});
    // -(1293475 M^2 mu^4 + 1624212 m_r M mu^2 - 1816848 m_r^2)
    //   / (805306368 m_r^11 M^4)
    table.coeffs.push_back({6, 2,
                            {{Rational(-1293475, 805306368), -11, -2, 4, -18},
                             {Rational(-1624212, 805306368), -10, -3, 2, -18},
                             {Rational(1816848, 805306368), -9, -4, 0, -18}}});
    return table;
}

const PTCoefficient* PTTable::find(int n, int k) const {
    for (const auto& c : coeffs)
        if (c.n == n && c.k == k) return &c;
    return nullptr;
}

double PTTable::value(int n, int k) const {
    if (const auto* c = find(n, k)) return c->value(sys);
    if (n + k <= max_total_order && (n % 2 == 1 || k % 2 == 1)) return 0.0;
    throw UnsupportedOrder("PTTable: coefficient " + order_str(n, k) + " not stored");
}

SeriesEval energy_series_eval(const PTTable& table, double B, double P, int max_order) {
    if (B < 0.0)
        throw InvalidParameter("energy_series_eval: B must be non-negative");
    // Only even powers of P are present; the sign of P is immaterial.

    SeriesEval out;
    int top_order = 0;
    double top_term = 0.0;
    for (const auto& c : table.coeffs) {
        if (c.n + c.k > max_order) continue;
        const double term = c.value(table.sys) * std::pow(B, c.n) * std::pow(P, c.k);
        out.E_hat += term;
        if (c.n + c.k > top_order && term != 0.0) {
            top_order = c.n + c.k;
            top_term = std::abs(term);
        } else if (c.n + c.k == top_order) {
            top_term = std::max(top_term, std::abs(term));
        }
    }
    if (top_order > 0 && top_term > 0.1 * std::abs(out.E_hat)) out.truncation_warning = true;
    out.E = out.E_hat + 0.5 * P * P * table.sys.inv_M();
    return out;
}

Complex q_eval(const SystemSpec& sys, int n, int k, double rho, double phi) {
    std::tie(n, k) = phase_order_alias(n, k);

    Complex q = 0.0;
    // Potential seeds: the B^2 rho^2 and B P coupling pieces of the order
    // expansion. The coupling coordinate is rho*sin(phi) (series frame).
    if (n == 2 && k == 0) q += sys.e * sys.e * rho * rho / (8.0 * sys.m_r);
    if (n == 1 && k == 1) q += -sys.e * rho * std::sin(phi) * sys.inv_M();

    if (n + k > 2) {
        Complex conv = 0.0;
        for (int m = 0; m <= n; ++m) {
            for (int p = 0; p <= k; ++p) {
                if (m + p == 0 || m + p >= n + k) continue;
                // True orders here: the convolution must see the genuinely
                // vanishing (0,2) term, not its printed-label alias.
                const PhaseTerm a = build_phase(sys, m, p); // throws if unknown
                const PhaseTerm b = build_phase(sys, n - m, k - p);
                if (a.is_zero() || b.is_zero()) continue;
                conv += grad_dot(a, b, rho, phi);
            }
        }
        q += -conv / (2.0 * sys.m_r);
    }
    return q;
}

double riccati_residual(const SystemSpec& sys, int n, int k, int samples,
                        AngularCoupling coupling) {
    std::tie(n, k) = phase_order_alias(n, k);
    const PhaseTerm phi_nk = phase_term(sys, n, k);
    const PhaseTerm phi_00 = phase_term(sys, 0, 0);
    const PTTable table = energy_coefficients(sys);
    const double mr = sys.m_r;
    const double e = sys.e;
    const Complex i_unit(0.0, 1.0);

    const double w = (coupling == AngularCoupling::Signed) ? (sys.mu2 - sys.mu1)
                                                           : std::abs(sys.mu2 - sys.mu1);

    double max_res = 0.0;
    for (int i = 0; i < samples; ++i) {
        const auto [rho, ang] = sample_point(i);
        Complex resid;
        if (n == 0 && k == 0) {
            resid = phi_00.laplacian(rho, ang) / (2.0 * mr) -
                    grad_dot(phi_00, phi_00, rho, ang) / (2.0 * mr) -
                    table.value(0, 0) - e * e / rho;
        } else {
            const PhaseTerm phi_prev = build_phase(sys, n - 1, k);
            resid = phi_nk.laplacian(rho, ang) / (2.0 * mr) -
                    i_unit * e * w / (2.0 * mr) * phi_prev.d_phi(rho, ang) -
                    grad_dot(phi_00, phi_nk, rho, ang) / mr -
                    table.value(n, k) + q_eval(sys, n, k, rho, ang);
        }
        max_res = std::max(max_res, std::abs(resid));
    }
    return max_res;
}

} // namespace magnetoatom
