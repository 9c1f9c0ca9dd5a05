#include "magnetoatom/trial.hpp"

#include <cmath>

namespace magnetoatom {

bool TrialParams::feasible() const {
    if (!coulomb_active() && !magnetic_active()) return false;
    if (coulomb_active()) {
        if (A4 == 0.0 && A5 == 0.0) {
            // Bare-exponential family: needs a growing phase.
            if (!(A3 != 0.0 || A1 > 0.0)) return false;
        } else {
            // Denominator 1 + A4 x + A5^2 rho^2 > 0 everywhere.
            if (!(A4 * A4 < 4.0 * A5 * A5)) return false;
            // Gaussian far field requires the cubic numerator term.
            if (A3 == 0.0) return false;
        }
    }
    if (magnetic_active()) {
        if (D4 < 0.0 || D5 < 0.0) return false;
        if (D6 == 0.0 || D3 == 0.0) return false;
    }
    return true;
}

void TrialParams::validate() const {
    if (!coulomb_active() && !magnetic_active())
        throw InvalidTrial("trial: C1 = C2 = 0");
    if (coulomb_active()) {
        if (A4 == 0.0 && A5 == 0.0) {
            if (!(A3 != 0.0 || A1 > 0.0))
                throw InvalidTrial("trial: phi_c does not grow at infinity");
        } else {
            if (!(A4 * A4 < 4.0 * A5 * A5))
                throw InvalidTrial("trial: A4^2 must stay below 4 A5^2");
            if (A3 == 0.0)
                throw InvalidTrial("trial: A3 = 0 with A5 != 0 loses normalizability");
        }
    }
    if (magnetic_active()) {
        if (D4 < 0.0 || D5 < 0.0)
            throw InvalidTrial("trial: D4, D5 must be non-negative");
        if (D6 == 0.0) throw InvalidTrial("trial: D6 must be nonzero");
        if (D3 == 0.0) throw InvalidTrial("trial: D3 must be nonzero");
    }
}

PhaseValue coulomb_phase(const TrialParams& p, double x, double y) {
    const double rho2 = x * x + y * y;
    const double rho = std::sqrt(rho2);
    const double N = p.A0 + p.A1 * rho + p.A2 * x * rho + p.A3 * p.A3 * rho2 * rho;
    const double D = 1.0 + p.A4 * x + p.A5 * p.A5 * rho2;
    const double sqrtD = std::sqrt(D);

    PhaseValue out;
    out.value = N / sqrtD - 0.5 * p.alpha_c * std::log(D);

    double Nx, Ny;
    if (rho == 0.0) {
        // Cusp limit: |grad(A1 rho)| -> A1, reported along +x.
        Nx = p.A1;
        Ny = 0.0;
    } else {
        Nx = p.A1 * x / rho + p.A2 * (rho + x * x / rho) + 3.0 * p.A3 * p.A3 * rho * x;
        Ny = p.A1 * y / rho + p.A2 * x * y / rho + 3.0 * p.A3 * p.A3 * rho * y;
    }
    const double Dx = p.A4 + 2.0 * p.A5 * p.A5 * x;
    const double Dy = 2.0 * p.A5 * p.A5 * y;

    out.dx = Nx / sqrtD - 0.5 * N * Dx / (D * sqrtD) - 0.5 * p.alpha_c * Dx / D;
    out.dy = Ny / sqrtD - 0.5 * N * Dy / (D * sqrtD) - 0.5 * p.alpha_c * Dy / D;
    return out;
}

PhaseValue magnetic_phase(const TrialParams& p, double x, double y) {
    const double xt = x - p.x_m;
    const double vr2 = xt * xt + y * y;
    const double N = p.D0 + p.D1 * xt * xt + p.D2 * y * y + p.D3 * p.D3 * vr2 * vr2;
    const double D = 1.0 + p.D4 * xt * xt + p.D5 * y * y + p.D6 * p.D6 * vr2 * vr2;
    const double sqrtD = std::sqrt(D);

    const double Nx = 2.0 * p.D1 * xt + 4.0 * p.D3 * p.D3 * vr2 * xt;
    const double Ny = 2.0 * p.D2 * y + 4.0 * p.D3 * p.D3 * vr2 * y;
    const double Dx = 2.0 * p.D4 * xt + 4.0 * p.D6 * p.D6 * vr2 * xt;
    const double Dy = 2.0 * p.D5 * y + 4.0 * p.D6 * p.D6 * vr2 * y;

    PhaseValue out;
    out.value = N / sqrtD;
    out.dx = Nx / sqrtD - 0.5 * N * Dx / (D * sqrtD);
    out.dy = Ny / sqrtD - 0.5 * N * Dy / (D * sqrtD);
    return out;
}

TrialValue trial_eval(const TrialParams& p, double x, double y) {
    p.validate();
    TrialValue out;
    if (p.coulomb_active()) {
        const auto ph = coulomb_phase(p, x, y);
        const double w = p.C1 * std::exp(-ph.value);
        out.chi += w;
        out.dx += -w * ph.dx;
        out.dy += -w * ph.dy;
    }
    if (p.magnetic_active()) {
        const auto ph = magnetic_phase(p, x, y);
        const double w = p.C2 * std::exp(-ph.value);
        out.chi += w;
        out.dx += -w * ph.dx;
        out.dy += -w * ph.dy;
    }
    return out;
}

WellExpansion well_expansion(const SystemSpec& sys, const FieldConfig& fields, double x0) {
    if (!(x0 > 0.0)) throw InvalidParameter("well_expansion: x0 must be positive");
    const double e = sys.e;
    const double B = fields.B_int;
    const double mr = sys.m_r;
    const double invM = sys.inv_M();
    const double e2 = e * e;
    const double x3 = x0 * x0 * x0;

    // On-axis curvatures of the effective potential at the well.
    const double vxx = e2 * B * B * invM - 2.0 * e2 / x3;
    const double vyy = e2 * B * B * invM + e2 / x3;
    const double wx2 = std::max(vxx, 0.0) / mr;
    const double wy2 = std::max(vyy, 0.0) / mr;
    const double wc = std::abs(sys.q_w) * B / mr;

    WellExpansion w;
    w.x0 = x0;
    w.E_x = 0.5 * std::sqrt(wx2 + 0.25 * wc * wc);
    w.E_y = 0.5 * std::sqrt(wy2 + 0.25 * wc * wc);
    w.alpha0 = 0.0;
    w.alpha2 = w.E_x * mr;
    w.alpha3 = (w.E_x > 0.0) ? e2 / (6.0 * w.E_x * x0 * x0 * x0 * x0) : 0.0;
    w.alpha4 = mr / 6.0 * (2.0 * w.E_x * w.E_x * mr - 0.5 * e2 * B * B * invM + e2 / x3);
    w.beta2 = w.E_y * mr;
    w.beta4 = mr / 6.0 * (2.0 * w.E_y * w.E_y * mr - 0.5 * e2 * B * B * invM - 0.5 * e2 / x3);
    w.gamma3 = (w.E_x > 0.0) ? -e2 / (2.0 * w.E_x * x0 * x0 * x0 * x0) : 0.0;
    return w;
}

} // namespace magnetoatom
