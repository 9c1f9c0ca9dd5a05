#include "magnetoatom/variational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>

#include "magnetoatom/effective_potential.hpp"
#include "magnetoatom/nelder_mead.hpp"

namespace magnetoatom {

namespace {

constexpr double kBig = 1e8;

double qnan() { return std::numeric_limits<double>::quiet_NaN(); }

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double uniform_pm1(std::uint64_t& state) {
    return 2.0 * (splitmix64(state) >> 11) * 0x1.0p-53 - 1.0;
}

struct NodeData {
    double w, x, y;
    double fc, fcx, fcy;
    double fm, fmx, fmy;
};

struct Eig2 {
    double E;
    double c1, c2;
    bool degenerate;
};

// Lower eigenpair of the symmetric pencil (H, S) with unit diagonal S and
// off-diagonal s. Falls back to the dominant single element when S is
// numerically singular.
Eig2 lower_generalized_eig(double h11, double h12, double h22, double s) {
    Eig2 out{};
    const double a = 1.0 - s * s;
    // Near-parallel elements make the pencil amplify quadrature noise by
    // 1/(1-s^2); fall back to the dominant single element well before that.
    if (a < 2e-2) {
        out.degenerate = true;
        if (h11 <= h22) {
            out.E = h11;
            out.c1 = 1.0;
            out.c2 = 0.0;
        } else {
            out.E = h22;
            out.c1 = 0.0;
            out.c2 = 1.0;
        }
        return out;
    }
    const double b = -(h11 + h22 - 2.0 * s * h12);
    const double c = h11 * h22 - h12 * h12;
    const double disc = std::max(b * b - 4.0 * a * c, 0.0);
    out.E = (-b - std::sqrt(disc)) / (2.0 * a);

    const double r1x = h11 - out.E, r1y = h12 - out.E * s;
    const double r2x = r1y, r2y = h22 - out.E;
    double c1, c2;
    if (r1x * r1x + r1y * r1y >= r2x * r2x + r2y * r2y) {
        c1 = -r1y;
        c2 = r1x;
    } else {
        c1 = -r2y;
        c2 = r2x;
    }
    double n2 = c1 * c1 + 2.0 * s * c1 * c2 + c2 * c2;
    if (n2 <= 0.0) n2 = c1 * c1 + c2 * c2;
    const double n = 1.0 / std::sqrt(n2);
    c1 *= n;
    c2 *= n;
    if (std::abs(c1) >= std::abs(c2) ? c1 < 0.0 : c2 < 0.0) {
        c1 = -c1;
        c2 = -c2;
    }
    out.c1 = c1;
    out.c2 = c2;
    return out;
}

} // namespace

Vec2 gauge_center(double d, const SystemSpec& sys, const FieldConfig& fields) {
    if (!(fields.B_int > 0.0))
        throw DegenerateField("gauge_center: requires B > 0");
    return {d * fields.P_int / (sys.e * fields.B_int), 0.0};
}

FunctionalResult energy_functional(const TrialParams& p, const SystemSpec& sys,
                                   const FieldConfig& fields, const QuadratureSpec& quad) {
    p.validate();
    const bool use_c = p.coulomb_active();
    const bool use_m = p.magnetic_active();

    const double e = sys.e;
    const double e2 = e * e;
    const double B = fields.B_int;
    const double P = fields.P_int;
    const double mr = sys.m_r;
    const double invM = sys.inv_M();
    const double qw2 = sys.q_w * sys.q_w;
    const double x0 = (B > 0.0) ? p.d * P / (e * B) : 0.0;

    const auto patches = build_patches(p, quad);

    std::vector<NodeData> nodes;
    size_t total = 0;
    for (const auto& patch : patches) total += patch.nodes.size();
    nodes.reserve(total);

    double min_fc = 1e300, min_fm = 1e300;
    for (const auto& patch : patches) {
        for (const auto& qn : patch.nodes) {
            NodeData nd{};
            nd.w = qn.w;
            nd.x = qn.x;
            nd.y = qn.y;
            if (use_c) {
                const auto ph = coulomb_phase(p, qn.x, qn.y);
                nd.fc = ph.value;
                nd.fcx = ph.dx;
                nd.fcy = ph.dy;
                min_fc = std::min(min_fc, ph.value);
            }
            if (use_m) {
                const auto ph = magnetic_phase(p, qn.x, qn.y);
                nd.fm = ph.value;
                nd.fmx = ph.dx;
                nd.fmy = ph.dy;
                min_fm = std::min(min_fm, ph.value);
            }
            nodes.push_back(nd);
        }
    }

    double S11 = 0, S12 = 0, S22 = 0;
    double T11 = 0, T12 = 0, T22 = 0;
    double V11 = 0, V12 = 0, V22 = 0;
    double R11 = 0, R12 = 0, R22 = 0;
    double G11 = 0, Gx = 0, G22 = 0;
    double Ga11 = 0, Gax = 0, Ga22 = 0;
    bool cross_underflow = use_c && use_m;

    for (const auto& nd : nodes) {
        const double rho = std::hypot(nd.x, nd.y);
        if (rho == 0.0) continue;
        const double dxp = nd.x - x0;
        double vd = -e2 / rho;
        vd += qw2 * B * B * (dxp * dxp + nd.y * nd.y) / (8.0 * mr);
        vd += 0.5 * invM * (P * P - 2.0 * e * B * P * nd.x + e2 * B * B * rho * rho);

        const double ax = -0.5 * B * nd.y;
        const double ay = 0.5 * B * dxp;

        if (use_c) {
            const double u2 = nd.w * std::exp(-2.0 * (nd.fc - min_fc));
            const double adot = ax * nd.fcx + ay * nd.fcy;
            S11 += u2;
            T11 += u2 * (nd.fcx * nd.fcx + nd.fcy * nd.fcy);
            V11 += u2 * vd;
            R11 += u2 * rho;
            G11 += u2 * (-adot);
            Ga11 += u2 * std::abs(adot);
        }
        if (use_m) {
            const double v2 = nd.w * std::exp(-2.0 * (nd.fm - min_fm));
            const double adot = ax * nd.fmx + ay * nd.fmy;
            S22 += v2;
            T22 += v2 * (nd.fmx * nd.fmx + nd.fmy * nd.fmy);
            V22 += v2 * vd;
            R22 += v2 * rho;
            G22 += v2 * (-adot);
            Ga22 += v2 * std::abs(adot);
        }
        if (use_c && use_m) {
            const double t = (nd.fc - min_fc) + (nd.fm - min_fm);
            if (t < 700.0) {
                cross_underflow = false;
                const double uv = nd.w * std::exp(-t);
                const double adot = ax * (nd.fcx + nd.fmx) + ay * (nd.fcy + nd.fmy);
                S12 += uv;
                T12 += uv * (nd.fcx * nd.fmx + nd.fcy * nd.fmy);
                V12 += uv * vd;
                R12 += uv * rho;
                Gx += uv * (-adot);
                Gax += uv * std::abs(adot);
            }
        }
    }

    // Separated wells: drop the cross element, keep S away from exact
    // singularity.
    if (cross_underflow) {
        S12 = T12 = V12 = R12 = 0.0;
        S11 += 1e-300;
        S22 += 1e-300;
    }

    FunctionalResult out;
    out.cross_underflow = cross_underflow;

    const double H11 = use_c ? T11 / (2.0 * mr) + V11 : 0.0;
    const double H22 = use_m ? T22 / (2.0 * mr) + V22 : 0.0;
    const double H12 = (use_c && use_m) ? T12 / (2.0 * mr) + V12 : 0.0;

    if (use_c && !use_m) {
        if (!(S11 > 0.0)) throw QuadratureError("energy_functional: vanishing norm");
        out.E = H11 / S11;
        out.S = {{{1.0, 0.0}, {0.0, 0.0}}};
        out.H = {{{out.E, 0.0}, {0.0, 0.0}}};
        out.C1 = 1.0;
        out.C2 = 0.0;
        out.weight1 = 1.0;
        out.rho_mean = R11 / S11;
        out.gauge_residual = std::abs(G11) / (Ga11 + 1e-300);
        return out;
    }
    if (use_m && !use_c) {
        if (!(S22 > 0.0)) throw QuadratureError("energy_functional: vanishing norm");
        out.E = H22 / S22;
        out.S = {{{0.0, 0.0}, {0.0, 1.0}}};
        out.H = {{{0.0, 0.0}, {0.0, out.E}}};
        out.C1 = 0.0;
        out.C2 = 1.0;
        out.weight1 = 0.0;
        out.rho_mean = R22 / S22;
        out.gauge_residual = std::abs(G22) / (Ga22 + 1e-300);
        return out;
    }

    if (!(S11 > 0.0) || !(S22 > 0.0))
        throw QuadratureError("energy_functional: vanishing norm");

    const double s1 = std::sqrt(S11), s2 = std::sqrt(S22);
    const double sn = S12 / (s1 * s2);
    const double h11 = H11 / S11, h22 = H22 / S22, h12 = H12 / (s1 * s2);

    const auto eig = lower_generalized_eig(h11, h12, h22, sn);
    out.E = eig.E;
    out.S = {{{1.0, sn}, {sn, 1.0}}};
    out.H = {{{h11, h12}, {h12, h22}}};
    out.C1 = eig.c1;
    out.C2 = eig.c2;
    const double w1 = eig.c1 * eig.c1;
    const double w2 = eig.c2 * eig.c2;
    out.weight1 = w1 / (w1 + w2);

    const double r11 = R11 / S11, r22 = R22 / S22, r12 = R12 / (s1 * s2);
    const double norm = eig.c1 * eig.c1 + 2.0 * sn * eig.c1 * eig.c2 + eig.c2 * eig.c2;
    out.rho_mean = (eig.c1 * eig.c1 * r11 + 2.0 * eig.c1 * eig.c2 * r12 +
                    eig.c2 * eig.c2 * r22) / norm;

    const double g = eig.c1 * eig.c1 * G11 / S11 + eig.c1 * eig.c2 * Gx / (s1 * s2) +
                     eig.c2 * eig.c2 * G22 / S22;
    const double ga = eig.c1 * eig.c1 * Ga11 / S11 +
                      std::abs(eig.c1 * eig.c2) * Gax / (s1 * s2) +
                      eig.c2 * eig.c2 * Ga22 / S22;
    out.gauge_residual = std::abs(g) / (ga + 1e-300);
    return out;
}

FunctionalResult energy_functional_refined(const TrialParams& p, const SystemSpec& sys,
                                           const FieldConfig& fields, QuadratureSpec quad) {
    FunctionalResult prev = energy_functional(p, sys, fields, quad);
    for (int level = 0; level < quad.max_refine; ++level) {
        quad = quad.refined();
        FunctionalResult next = energy_functional(p, sys, fields, quad);
        next.quad_error = std::abs(next.E - prev.E);
        if (next.quad_error < quad.tol) return next;
        prev = next;
    }
    throw QuadratureError("energy_functional_refined: tolerance " +
                          std::to_string(quad.tol) + " not reached, residual " +
                          std::to_string(prev.quad_error));
}

std::string to_string(StateClass c) {
    switch (c) {
        case StateClass::Centered: return "centered";
        case StateClass::Decentered: return "decentered";
        case StateClass::Mixed: return "mixed";
    }
    return "?";
}

StateClass classify(double weight1) {
    if (weight1 >= 0.9) return StateClass::Centered;
    if (weight1 <= 0.1) return StateClass::Decentered;
    return StateClass::Mixed;
}

TrialParams centered_seed(const SystemSpec& sys, const FieldConfig& fields) {
    TrialParams p;
    p.A0 = 0.0;
    p.A1 = 2.0 * sys.m_r * sys.e * sys.e;
    p.A2 = 0.0;
    p.alpha_c = 0.0;
    p.C1 = 1.0;
    p.C2 = 0.0;
    p.d = 0.0;
    const double B = fields.B_int;
    if (B > 0.0) {
        // Crossover where the Gaussian tail e B rho^2/4 overtakes the cusp
        // slope; A3^2/A5 pinned to e B/4 as the seed.
        const double crossover = 4.0 * p.A1 / (sys.e * B);
        p.A5 = 1.0 / crossover;
        p.A3 = std::sqrt(sys.e * B * p.A5 / 4.0);
        if (fields.P_int > 0.0)
            p.A2 = -std::min(B * fields.P_int * sys.inv_M() / (4.0 * sys.e), 0.5 * p.A1);
    }
    return p;
}

TrialParams decentered_seed(const SystemSpec& sys, const FieldConfig& fields) {
    if (!(fields.B_int > 0.0))
        throw DegenerateField("decentered_seed: requires B > 0");
    const auto cp = stationary_points(sys, fields);
    if (!cp.x_min)
        throw OutOfRegime("decentered_seed: P <= p_saddle, no magnetic well");

    const auto w = well_expansion(sys, fields, *cp.x_min);
    TrialParams p;
    p.C1 = 0.0;
    p.C2 = 1.0;
    p.x_m = *cp.x_min;
    p.d = 1.0;
    p.D0 = 0.0;
    p.D1 = std::max(w.alpha2, 1e-8);
    p.D2 = std::max(w.beta2, 1e-8);
    p.D6 = 2.0 * std::max(p.D1, p.D2) / 9.0;
    p.D3 = std::sqrt(sys.e * fields.B_int * p.D6 / 4.0);
    p.D4 = 0.5 * p.D6;
    p.D5 = 0.5 * p.D6;
    return p;
}

namespace {

enum class Family { Centered, Decentered, Joint };

std::vector<double> pack(const TrialParams& p, Family fam, bool with_d) {
    std::vector<double> v;
    if (fam != Family::Decentered) {
        v.insert(v.end(), {p.A0, p.A1, p.A2, p.A3, p.A4, p.A5, p.alpha_c});
    }
    if (fam != Family::Centered) {
        v.insert(v.end(), {p.D0, p.D1, p.D2, p.D3, p.D4, p.D5, p.D6, p.x_m});
    }
    if (with_d) v.push_back(p.d);
    return v;
}

// Unpacks a parameter vector; returns the out-of-box penalty for d.
double unpack(const std::vector<double>& v, Family fam, bool with_d,
              const TrialParams& base, TrialParams& out) {
    out = base;
    size_t i = 0;
    if (fam != Family::Decentered) {
        out.A0 = v[i++];
        out.A1 = v[i++];
        out.A2 = v[i++];
        out.A3 = v[i++];
        out.A4 = v[i++];
        out.A5 = v[i++];
        out.alpha_c = v[i++];
    }
    if (fam != Family::Centered) {
        out.D0 = v[i++];
        // The well element is a deformed Gaussian: positive curvature at its
        // center. Sign-folding keeps the search smooth while excluding
        // multi-scale shapes the base quadrature level cannot certify.
        out.D1 = std::abs(v[i++]);
        out.D2 = std::abs(v[i++]);
        out.D3 = v[i++];
        out.D4 = std::abs(v[i++]);
        out.D5 = std::abs(v[i++]);
        out.D6 = v[i++];
        out.x_m = v[i++];
    }
    double penalty = 0.0;
    if (with_d) {
        const double d_raw = v[i++];
        out.d = std::clamp(d_raw, 0.0, 1.0);
        const double excess = std::abs(d_raw - out.d);
        penalty = 50.0 * excess * excess;
    }
    return penalty;
}

std::vector<double> family_steps(const TrialParams& seed, Family fam, bool with_d) {
    std::vector<double> s;
    if (fam != Family::Decentered) {
        s.insert(s.end(), {0.15, 0.08 * seed.A1, std::max(0.05, 0.2 * std::abs(seed.A2)),
                           0.2 * seed.A3 + 0.01, 0.3 * std::abs(seed.A5) + 0.01,
                           0.2 * seed.A5 + 0.005, 0.08});
    }
    if (fam != Family::Centered) {
        const double width = 1.0 / std::sqrt(2.0 * std::max(seed.D1, 1e-8));
        s.insert(s.end(), {0.15, 0.15 * seed.D1 + 1e-4, 0.15 * seed.D2 + 1e-4,
                           0.15 * seed.D3 + 1e-4, 0.3 * seed.D6 + 1e-5,
                           0.3 * seed.D6 + 1e-5, 0.3 * seed.D6 + 1e-5, 0.4 * width});
    }
    if (with_d) s.push_back(0.03);
    return s;
}

struct FamilyBest {
    TrialParams params;
    double E = qnan();
    long evals = 0;
    int restarts = 0;
};

// The magnetic element must stay in the outer-well region; drifting across
// the barrier toward the Coulomb well collapses the basis onto one ray.
// It must also be exponentially small at the Coulomb point: the magnetic
// patch cannot resolve an interior 1/rho spike, and a fat-tailed element
// reaching the singularity turns quadrature error into fake binding.
double well_floor_penalty(const TrialParams& p, double x_m_floor) {
    if (x_m_floor <= 0.0 || !p.magnetic_active()) return 0.0;
    if (p.x_m <= 0.0) return kBig;
    double pen = 0.0;
    const double deficit = (x_m_floor - p.x_m) / std::max(1.0, x_m_floor);
    if (deficit > 0.0) pen += 200.0 * deficit * deficit;

    const double rise =
        2.0 * (magnetic_phase(p, 0.0, 0.0).value - magnetic_phase(p, p.x_m, 0.0).value);
    if (rise < 12.0) return kBig;
    if (rise < 25.0) pen += 2.0 * (25.0 - rise) * (25.0 - rise);
    return pen;
}

FamilyBest optimize_family(const TrialParams& seed, Family fam, bool with_d,
                           const SystemSpec& sys, const FieldConfig& fields,
                           const OptimizeOptions& opts, double x_m_floor,
                           const std::optional<TrialParams>& extra_start) {
    const auto objective = [&](const std::vector<double>& v, long& evals) {
        TrialParams p;
        double penalty = unpack(v, fam, with_d, seed, p);
        if (!p.feasible()) return kBig;
        penalty += well_floor_penalty(p, x_m_floor);
        if (penalty >= kBig) return kBig;
        ++evals;
        try {
            return energy_functional(p, sys, fields, opts.quad).E + penalty;
        } catch (const Error&) {
            return kBig;
        }
    };

    const auto run_start = [&](int restart) {
        std::vector<double> x0 = pack(seed, fam, with_d);
        if (restart == 1 && extra_start) {
            x0 = pack(*extra_start, fam, with_d);
        } else if (restart > 0) {
            std::uint64_t rng = 0xC0FFEEull * 131 + static_cast<std::uint64_t>(restart) +
                                (fam == Family::Centered ? 7u : 11u);
            const auto steps = family_steps(seed, fam, with_d);
            for (size_t i = 0; i < x0.size(); ++i)
                x0[i] += 2.5 * steps[i] * uniform_pm1(rng);
        }
        long evals = 0;
        NelderMeadOptions nm;
        nm.max_iter = opts.max_iter;
        nm.ftol_rel = 1e-10;
        const auto r = nelder_mead([&](const std::vector<double>& v) { return objective(v, evals); },
                                   x0, family_steps(seed, fam, with_d), nm);
        return std::tuple<NelderMeadResult, long>(r, evals);
    };

    const int n_starts = std::max(1, opts.restarts);
    std::vector<std::tuple<NelderMeadResult, long>> results(n_starts);
    if (opts.threads > 1) {
        std::vector<std::future<std::tuple<NelderMeadResult, long>>> futs;
        futs.reserve(n_starts);
        for (int r = 0; r < n_starts; ++r)
            futs.push_back(std::async(std::launch::async, run_start, r));
        for (int r = 0; r < n_starts; ++r) results[r] = futs[r].get();
    } else {
        for (int r = 0; r < n_starts; ++r) results[r] = run_start(r);
    }

    FamilyBest best;
    best.params = seed;
    best.E = std::numeric_limits<double>::infinity();
    for (int r = 0; r < n_starts; ++r) {
        const auto& [nm, evals] = results[r];
        best.evals += evals;
        if (nm.f < best.E) {
            TrialParams p;
            unpack(nm.x, fam, with_d, seed, p);
            if (!p.feasible()) continue;
            best.E = nm.f;
            best.params = p;
        }
    }
    best.restarts = n_starts;
    return best;
}

} // namespace

VariationalResult optimize(const SystemSpec& sys, const FieldConfig& fields,
                           const OptimizeOptions& opts) {
    using Fam = OptimizeOptions::Family;

    const bool want_centered = opts.family != Fam::Decentered;
    bool want_decentered = opts.family != Fam::Centered;

    // gauge optimization is meaningful only when the gauge term acts
    const bool with_d = (sys.q_w != 0.0) && (fields.B_int > 0.0) && (fields.P_int > 0.0);

    std::optional<TrialParams> dec_seed;
    double x_m_floor = 0.0;
    if (want_decentered) {
        try {
            dec_seed = decentered_seed(sys, fields);
            x_m_floor = *stationary_points(sys, fields).x_max;
        } catch (const Error&) {
            if (opts.family == Fam::Decentered) throw;
            want_decentered = false;
        }
    }

    VariationalResult res;
    res.sys = sys;
    res.fields = fields;
    res.quad = opts.quad;
    res.E_centered = qnan();
    res.E_decentered = qnan();

    // Family bests are re-evaluated on refined nodes: the search-level value
    // is only trusted once refinement confirms it.
    const auto confirmed = [&](FamilyBest& fb) {
        try {
            fb.E = energy_functional_refined(fb.params, sys, fields, opts.quad).E;
        } catch (const Error&) {
            fb.E = energy_functional(fb.params, sys, fields, opts.quad).E;
        }
    };

    std::optional<FamilyBest> cen, dec;
    if (want_centered) {
        std::optional<TrialParams> warm;
        if (opts.warm_start && opts.warm_start->coulomb_active()) warm = opts.warm_start;
        cen = optimize_family(centered_seed(sys, fields), Family::Centered, with_d, sys,
                              fields, opts, 0.0, warm);
        confirmed(*cen);
        res.E_centered = cen->E;
        res.functional_evals += cen->evals;
        res.restarts_used += cen->restarts;
    }
    if (want_decentered) {
        std::optional<TrialParams> warm;
        if (opts.warm_start && opts.warm_start->magnetic_active()) warm = opts.warm_start;
        dec = optimize_family(*dec_seed, Family::Decentered, with_d, sys, fields, opts,
                              x_m_floor, warm);
        confirmed(*dec);
        res.E_decentered = dec->E;
        res.functional_evals += dec->evals;
        res.restarts_used += dec->restarts;
    }

    if (!cen && !dec) throw InvalidParameter("optimize: no seed family available");

    std::vector<TrialParams> candidates;
    if (cen) candidates.push_back(cen->params);
    if (dec) candidates.push_back(dec->params);
    if (cen && dec) {
        // Joint two-element state. A single gauge parameter serves both
        // elements, so both family gauges are tried.
        TrialParams joint = cen->params;
        joint.D0 = dec->params.D0;
        joint.D1 = dec->params.D1;
        joint.D2 = dec->params.D2;
        joint.D3 = dec->params.D3;
        joint.D4 = dec->params.D4;
        joint.D5 = dec->params.D5;
        joint.D6 = dec->params.D6;
        joint.x_m = dec->params.x_m;
        joint.C1 = 1.0;
        joint.C2 = 1.0;
        joint.d = cen->params.d;
        candidates.push_back(joint);
        if (dec->params.d != cen->params.d) {
            joint.d = dec->params.d;
            candidates.push_back(joint);
        }

        // Near-crossing polish of the full nonlinear vector.
        const double scale = std::abs(cen->E) + std::abs(dec->E) + 0.1;
        if (std::abs(cen->E - dec->E) < 0.2 * scale) {
            TrialParams start = joint;
            start.d = (cen->E <= dec->E) ? cen->params.d : dec->params.d;
            long evals = 0;
            const auto objective = [&](const std::vector<double>& v) {
                TrialParams p;
                double penalty = unpack(v, Family::Joint, with_d, start, p);
                if (!p.feasible()) return kBig;
                penalty += well_floor_penalty(p, x_m_floor);
                if (penalty >= kBig) return kBig;
                ++evals;
                try {
                    return energy_functional(p, sys, fields, opts.quad).E + penalty;
                } catch (const Error&) {
                    return kBig;
                }
            };
            NelderMeadOptions nm;
            nm.max_iter = opts.max_iter / 2;
            nm.ftol_rel = 1e-10;
            const auto r = nelder_mead(objective, pack(start, Family::Joint, with_d),
                                       family_steps(start, Family::Joint, with_d), nm);
            res.functional_evals += evals;
            TrialParams polished;
            unpack(r.x, Family::Joint, with_d, start, polished);
            if (polished.feasible() && well_floor_penalty(polished, x_m_floor) < 1.0)
                candidates.push_back(polished);
        }
    }

    // Best candidate at refined quadrature wins.
    FunctionalResult fr;
    TrialParams final_params;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cand : candidates) {
        try {
            FunctionalResult r = opts.refine_final
                                     ? energy_functional_refined(cand, sys, fields, opts.quad)
                                     : energy_functional(cand, sys, fields, opts.quad);
            if (r.E < best) {
                best = r.E;
                fr = r;
                final_params = cand;
            }
        } catch (const Error&) {
            continue;
        }
    }
    if (!std::isfinite(best))
        throw QuadratureError("optimize: no candidate evaluated successfully");

    res.E = fr.E;
    res.params = final_params;
    res.params.C1 = fr.C1;
    res.params.C2 = fr.C2;
    res.rho_mean = fr.rho_mean;
    res.classification = classify(fr.weight1);
    res.S = fr.S;
    res.H = fr.H;
    res.C1 = fr.C1;
    res.C2 = fr.C2;
    res.weight1 = fr.weight1;
    res.quad_error = fr.quad_error;
    res.gauge_residual = fr.gauge_residual;
    return res;
}

double expectation_rho(const VariationalResult& result) {
    TrialParams p = result.params;
    // Only the activity of each element matters; the functional re-resolves
    // the linear pair.
    p.C1 = (p.C1 != 0.0) ? 1.0 : 0.0;
    p.C2 = (p.C2 != 0.0) ? 1.0 : 0.0;
    if (p.C1 == 0.0 && p.C2 == 0.0) p.C1 = 1.0;
    return energy_functional(p, result.sys, result.fields, result.quad).rho_mean;
}

ScanPcResult scan_pc(const SystemSpec& sys, double B_eff, const std::vector<double>& P_grid,
                     const OptimizeOptions& opts) {
    if (P_grid.size() < 2)
        throw InvalidParameter("scan_pc: need at least two P values");
    for (size_t i = 1; i < P_grid.size(); ++i)
        if (P_grid[i] <= P_grid[i - 1])
            throw InvalidParameter("scan_pc: P grid must be ascending");

    ScanPcResult out;
    out.crossing_lo = qnan();
    out.crossing_hi = qnan();
    std::optional<TrialParams> warm;

    for (double P : P_grid) {
        const auto fields = make_fields(sys, B_eff, P, 0.0);
        OptimizeOptions o = opts;
        o.warm_start = warm;
        const auto r = optimize(sys, fields, o);
        warm = r.params;

        ScanPoint pt;
        pt.P = P;
        pt.E = r.E;
        pt.cls = r.classification;
        pt.E_centered = r.E_centered;
        pt.E_decentered = r.E_decentered;
        pt.d = r.params.d;
        pt.rho_mean = r.rho_mean;
        out.points.push_back(pt);
    }

    bool flipped = false;
    for (size_t i = 1; i < out.points.size(); ++i) {
        if (!flipped && out.points[i - 1].cls == StateClass::Centered &&
            out.points[i].cls == StateClass::Decentered) {
            out.bracket_lo = out.points[i - 1].P;
            out.bracket_hi = out.points[i].P;
            out.P_c = 0.5 * (out.bracket_lo + out.bracket_hi);
            flipped = true;
        }
        const auto gap = [](const ScanPoint& p) { return p.E_centered - p.E_decentered; };
        if (std::isnan(out.crossing_lo) && !std::isnan(gap(out.points[i - 1])) &&
            !std::isnan(gap(out.points[i])) && gap(out.points[i - 1]) < 0.0 &&
            gap(out.points[i]) >= 0.0) {
            out.crossing_lo = out.points[i - 1].P;
            out.crossing_hi = out.points[i].P;
        }
    }
    if (!flipped) {
        throw NotBracketed("scan_pc: no centered->decentered flip in grid (ends " +
                           to_string(out.points.front().cls) + " / " +
                           to_string(out.points.back().cls) + ")");
    }
    return out;
}

} // namespace magnetoatom
