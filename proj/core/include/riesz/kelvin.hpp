#pragma once

#include <Eigen/Dense>

#include "riesz/geometry.hpp"
#include "riesz/kernel.hpp"
#include "riesz/measure.hpp"

namespace riesz {

/// Inversion in the unit sphere centered at `center` (radius fixed at 1).
struct InversionSpec {
    Point center;
};

/// x* on the ray from the center through x with |x - c| * |x* - c| = 1.
/// Throws pole_error at x == center.
Point invert_point(const Point& x, const InversionSpec& inv);

/// Relative residual of |x*-y*| = |x-y| / (|c-x| |c-y|).
double check_distance_identity(const Point& x, const Point& y, const InversionSpec& inv);

/// Atom x_i -> x_i*, weight w_i -> w_i |x_i - c|^(alpha-n).
DiscreteMeasure kelvin_measure(const DiscreteMeasure& mu, const InversionSpec& inv,
                               const KernelSpec& spec);
SignedMeasure kelvin_measure(const SignedMeasure& mu, const InversionSpec& inv,
                             const KernelSpec& spec);

/// Relative residual of U^(mu*)(x*) = |x - c|^(n-alpha) U^mu(x).
/// Exact mode only.
double check_potential_transform(const DiscreteMeasure& mu, const Point& x,
                                 const InversionSpec& inv, const KernelSpec& spec);

/// Relative residual of the off-diagonal mutual energy before/after the
/// transform (term-by-term identity). Exact mode only.
double check_energy_preservation(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const InversionSpec& inv, const KernelSpec& spec);

/// Kelvin image of a touching condenser (inversion centered at the declared
/// touch point). The image validates as a standard separated condenser and
/// vector measures transport componentwise through kelvin_measure.
struct TransformedCondenser {
    std::shared_ptr<const CondenserGeometry> geometry;
    InversionSpec inversion;

    VectorMeasure transport(const VectorMeasure& nu, const KernelSpec& spec) const;
};

TransformedCondenser transform_condenser(const CondenserGeometry& geom, const InversionSpec& inv);

/// Relative residual of the condenser-metric isometry under transport,
/// computed with off-diagonal sums (the diagonal convention is calibration
/// data and is not Kelvin-covariant). Exact mode only.
double check_metric_preservation(const VectorMeasure& nu, const VectorMeasure& nu1,
                                 const TransformedCondenser& tc, const KernelSpec& spec);

} // namespace riesz
