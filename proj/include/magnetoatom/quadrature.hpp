#pragma once

#include <vector>

#include "magnetoatom/trial.hpp"
#include "magnetoatom/units.hpp"

namespace magnetoatom {

/// Node-count and tolerance settings of the two-patch polar quadrature.
/// Each patch is a disk with panelled Gauss-Legendre radial nodes (power-law
/// clustering toward the center) and a uniform trapezoid angular rule; when
/// both wells are active the patches are blended by a smooth partition of
/// unity. Cutoffs are grown until the phase rises by tail_log over the patch
/// center, keeping the dropped Gaussian tail below ~1e-16 of the norm.
struct QuadratureSpec {
    int radial_panels = 12;
    int radial_order = 10;
    int angular = 40;
    double cluster = 2.2;    ///< panel-edge exponent toward the center
    double tail_log = 37.0;
    double tol = 1e-7;       ///< refinement target for the refined functional
    int max_refine = 3;

    QuadratureSpec refined() const {
        QuadratureSpec q = *this;
        q.radial_panels = radial_panels + radial_panels / 2;
        q.radial_order = radial_order + radial_order / 2;
        q.angular = angular * 2;
        return q;
    }
};

struct QuadNode {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0; ///< area weight including the partition of unity
};

/// One polar patch with assembled nodes.
struct QuadPatch {
    double cx = 0.0, cy = 0.0;
    double radius = 0.0;
    std::vector<QuadNode> nodes;
};

/// Builds the quadrature patches for a trial configuration. One patch per
/// active well; weights sum to the plane measure where the integrands live.
std::vector<QuadPatch> build_patches(const TrialParams& p, const QuadratureSpec& spec);

/// Gauss-Legendre nodes/weights on [-1, 1] (cached per order).
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order);

} // namespace magnetoatom
