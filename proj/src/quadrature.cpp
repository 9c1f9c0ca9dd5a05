#include "magnetoatom/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace magnetoatom {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Smooth C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

// Phase of the well a patch is centered on, relative to its center value.
double phase_rise(const TrialParams& p, bool coulomb, double x, double y) {
    if (coulomb) {
        return coulomb_phase(p, x, y).value - coulomb_phase(p, 0.0, 0.0).value;
    }
    return magnetic_phase(p, x, y).value - magnetic_phase(p, p.x_m, 0.0).value;
}

// Smallest phase rise over probe rays at radius R.
double ring_rise(const TrialParams& p, bool coulomb, double R) {
    const double cx = coulomb ? 0.0 : p.x_m;
    double min_rise = 1e300;
    for (int a = 0; a < 8; ++a) {
        const double ang = kTwoPi * a / 8.0;
        min_rise = std::min(min_rise,
                            phase_rise(p, coulomb, cx + R * std::cos(ang), R * std::sin(ang)));
    }
    return min_rise;
}

// Grows the patch radius until the phase rise along every probe ray exceeds
// tail_log/2 at the rim and beyond it (so exp(-2 phase) stays below ~1e-16
// of the peak outside the patch, non-monotone phases included).
double patch_radius(const TrialParams& p, bool coulomb, double scale, double tail_log) {
    double R = std::max(scale, 1e-3);
    const double cap = 2000.0 * R;
    for (int iter = 0; iter < 200; ++iter) {
        if (2.0 * ring_rise(p, coulomb, R) > tail_log &&
            2.0 * ring_rise(p, coulomb, 1.3 * R) > tail_log)
            return R;
        R *= 1.3;
        if (R > cap)
            throw QuadratureError(
                "patch_radius: tail spans >2000x the core width; phase shape "
                "not resolvable at this node budget");
    }
    return R;
}

} // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    std::vector<double> x(order), w(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration from the Chebyshev estimate.
        double z = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = order * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[order - 1 - i] = w[i];
    }
    return cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first->second;
}

std::vector<QuadPatch> build_patches(const TrialParams& p, const QuadratureSpec& spec) {
    p.validate();
    const bool two = p.coulomb_active() && p.magnetic_active();

    struct Center {
        double cx;
        bool coulomb;
        double scale;
    };
    std::vector<Center> centers;
    if (p.coulomb_active()) {
        double scale = 1.0 / std::max(p.A1, 0.1);
        if (p.A5 != 0.0) scale = std::min(scale, std::sqrt(std::abs(p.A5 / (p.A3 * p.A3 + 1e-300))));
        centers.push_back({0.0, true, scale});
    }
    if (p.magnetic_active()) {
        const double d1 = std::max({p.D1, p.D2, 1e-6});
        centers.push_back({p.x_m, false, 1.0 / std::sqrt(2.0 * d1)});
    }

    const double sep = two ? std::abs(p.x_m) : 0.0;
    const double tau = std::max(std::min(2.0, 0.25 * sep), 1e-6);

    const auto& [gx, gw] = gauss_legendre(spec.radial_order);

    std::vector<QuadPatch> patches;
    for (const auto& c : centers) {
        QuadPatch patch;
        patch.cx = c.cx;
        patch.cy = 0.0;
        patch.radius = patch_radius(p, c.coulomb, c.scale, spec.tail_log);

        const int np = spec.radial_panels;
        const int na = spec.angular;
        // Panel clustering adapts to the patch-radius/core-width ratio so a
        // wide tail never starves the core of radial nodes.
        const double gamma = std::clamp(
            std::log(std::max(2.0 * patch.radius / c.scale, 8.0)) / std::log(double(np)),
            spec.cluster, 6.0);
        patch.nodes.reserve(static_cast<size_t>(np) * spec.radial_order * na);
        for (int panel = 0; panel < np; ++panel) {
            const double r0 = patch.radius * std::pow(double(panel) / np, gamma);
            const double r1 = patch.radius * std::pow(double(panel + 1) / np, gamma);
            for (int i = 0; i < spec.radial_order; ++i) {
                const double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * gx[i];
                const double wr = 0.5 * (r1 - r0) * gw[i] * r; // polar measure r dr
                for (int a = 0; a < na; ++a) {
                    const double ang = kTwoPi * (a + 0.5) / na;
                    QuadNode node;
                    node.x = c.cx + r * std::cos(ang);
                    node.y = r * std::sin(ang);
                    node.w = wr * kTwoPi / na;
                    if (two) {
                        // Partition of unity between the two well centers.
                        const double da = std::hypot(node.x, node.y);
                        const double db = std::hypot(node.x - p.x_m, node.y);
                        const double s = 0.5 * (da - db);
                        const double to_b = smooth_step((s + tau) / (2.0 * tau));
                        node.w *= c.coulomb ? (1.0 - to_b) : to_b;
                        if (node.w == 0.0) continue;
                    }
                    patch.nodes.push_back(node);
                }
            }
        }
        patches.push_back(std::move(patch));
    }
    return patches;
}

} // namespace magnetoatom
