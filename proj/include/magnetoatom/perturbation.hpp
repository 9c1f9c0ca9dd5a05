#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "magnetoatom/rational.hpp"
#include "magnetoatom/units.hpp"

namespace magnetoatom {

using Complex = std::complex<double>;

/// Angular factor of a phase monomial.
enum class Angular { One, Cos, Sin, Cos2 };

/// Harmonic index m of the angular factor (T'' = -m^2 T).
int harmonic_index(Angular ang);

/// One term  coeff * rho^p * T(phi)  of a phase correction.
struct PhaseMonomial {
    Complex coeff;
    int rho_pow = 0;
    Angular ang = Angular::One;
};

/// Closed-form phase correction Phi_{n,k} of the double series in B and P,
/// with analytic polar derivatives.
///
/// Orientation: the momentum coupling coordinate is rho*sin(phi), i.e. the
/// magnetic well of the series frame lies on the phi = pi/2 ray. This is the
/// frame in which the closed forms hold; energy coefficients are rotation
/// invariant and unaffected.
struct PhaseTerm {
    int n = 0; ///< power of B
    int k = 0; ///< power of P
    std::vector<PhaseMonomial> parts;

    Complex eval(double rho, double phi) const;
    Complex d_rho(double rho, double phi) const;
    Complex d_phi(double rho, double phi) const;
    Complex laplacian(double rho, double phi) const;
    /// Cartesian gradient (d/dx, d/dy) in the series frame.
    std::pair<Complex, Complex> grad_cartesian(double rho, double phi) const;

    bool is_real() const;
    bool is_imaginary() const;
    bool is_zero() const;
};

/// Gradient dot product of two phase corrections (no conjugation):
///   da/drho db/drho + da/dphi db/dphi / rho^2.
Complex grad_dot(const PhaseTerm& a, const PhaseTerm& b, double rho, double phi);

/// Builds the phase correction for one of the closed-form orders
/// {(0,0),(1,1),(2,1),(2,0),(2,2)} or an order known to vanish
/// {(1,0),(0,1),(0,2),(1,2)}. The label (0,2) is accepted as an alias for
/// the B^2 P^2 term (see phase_order_alias). Throws UnsupportedOrder
/// otherwise.
PhaseTerm phase_term(const SystemSpec& sys, int n, int k);

/// Maps an order label to the order whose equation the stored form solves.
/// Identity for every label except (0,2) -> (2,2): the pure-P^2 correction
/// vanishes identically (the B = 0 problem is exactly solvable), and the
/// published closed form carrying cos(2 phi) structure is the B^2 P^2 term.
std::pair<int, int> phase_order_alias(int n, int k);

/// Evaluates Phi_{n,k} at one point.
Complex phase_eval(const SystemSpec& sys, int n, int k, double rho, double phi);

/// Cartesian gradient of Phi_{n,k} at one point.
std::pair<Complex, Complex> phase_gradient(const SystemSpec& sys, int n, int k,
                                           double rho, double phi);

/// One exact-rational monomial  c * m_r^a M^b mu^g e^q  of an energy
/// coefficient.
struct CoeffMonomial {
    Rational c;
    int mr_pow = 0;
    int M_pow = 0;
    int mu_pow = 0;
    int e_pow = 0;
};

/// Energy coefficient E_hat_{n,k} as a sum of exact-rational monomials.
struct PTCoefficient {
    int n = 0;
    int k = 0;
    std::vector<CoeffMonomial> terms;

    double value(const SystemSpec& sys) const;
};

/// Exactly representable system parameters for rational evaluation.
struct RationalSystem {
    Rational m_r;
    Rational M;  ///< ignored when infinite_M
    Rational mu;
    Rational e;
    bool infinite_M = false;
};

/// Detects whether a SystemSpec admits exact rational evaluation (integer
/// charge and masses, or the infinite-mass limit with integer m1).
std::optional<RationalSystem> rational_system(const SystemSpec& sys);

/// Exact value of one coefficient; monomials carrying negative powers of M
/// drop in the infinite-mass limit.
Rational pt_coefficient_exact(const PTCoefficient& coeff, const RationalSystem& rs);

/// Table of all closed-form energy coefficients
/// {(0,0),(2,0),(2,2),(4,0),(4,2),(4,4),(6,2)} for a given system.
struct PTTable {
    SystemSpec sys;
    std::vector<PTCoefficient> coeffs;
    int max_total_order = 8; ///< orders n+k beyond the stored set are unknown

    /// Value of E_hat_{n,k}; exact zero for odd n or odd k in range.
    double value(int n, int k) const;
    const PTCoefficient* find(int n, int k) const;
};

PTTable energy_coefficients(const SystemSpec& sys);

/// Result of summing the double series at one (B, P).
struct SeriesEval {
    double E_hat = 0.0; ///< E - P^2 / 2M
    double E = 0.0;
    bool truncation_warning = false; ///< top-order term exceeds 10% of the sum
};

/// Sums E_hat_{n,k} B^n P^k over stored orders with n + k <= max_order.
/// B, P in internal units. The series in B is asymptotic, not convergent:
/// a large top-order term only sets the warning flag.
SeriesEval energy_series_eval(const PTTable& table, double B, double P, int max_order = 8);

/// Sign convention for the angular derivative term of the order equations.
enum class AngularCoupling {
    Signed,  ///< coefficient e*(mu2 - mu1); holds for either mass ordering
    Absolute ///< coefficient e*|mu2 - mu1|; requires m2 >= m1
};

/// Effective perturbation potential Q_{n,k}: the order-(2,0)/(1,1) potential
/// seeds plus the gradient-product convolution of lower phases.
Complex q_eval(const SystemSpec& sys, int n, int k, double rho, double phi);

/// Maximum |LHS - RHS| of the order-(n,k) equation over deterministic
/// quasi-random sample points with rho in [0.1, 10], phi in [0, 2pi).
double riccati_residual(const SystemSpec& sys, int n, int k, int samples = 100,
                        AngularCoupling coupling = AngularCoupling::Signed);

} // namespace magnetoatom
