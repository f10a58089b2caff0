#include "riesz/kelvin.hpp"

#include <cmath>

namespace riesz {

namespace {

Eigen::MatrixXd invert_points(const Eigen::MatrixXd& pts, const Point& c) {
    Eigen::MatrixXd out(pts.rows(), pts.cols());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const Eigen::RowVectorXd d = pts.row(i) - c.transpose();
        const double r2 = d.squaredNorm();
        if (r2 == 0.0) throw pole_error("kelvin: point at the inversion pole");
        out.row(i) = c.transpose() + d / r2;
    }
    return out;
}

Eigen::VectorXd pole_distances(const Eigen::MatrixXd& pts, const Point& c) {
    Eigen::VectorXd d(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        d[i] = (pts.row(i) - c.transpose()).norm();
    return d;
}

void require_exact(const KernelSpec& spec, const char* who) {
    if (spec.mode != KernelMode::ExactOffdiag)
        throw mode_misuse_error(std::string(who) +
                                ": Kelvin identities hold for the exact kernel only");
}

} // namespace

Point invert_point(const Point& x, const InversionSpec& inv) {
    if (x.size() != inv.center.size())
        throw dimension_mismatch_error("invert_point: dimension mismatch");
    const Point d = x - inv.center;
    const double r2 = d.squaredNorm();
    if (r2 == 0.0) throw pole_error("invert_point: x equals the inversion pole");
    return inv.center + d / r2;
}

double check_distance_identity(const Point& x, const Point& y, const InversionSpec& inv) {
    const Point xs = invert_point(x, inv);
    const Point ys = invert_point(y, inv);
    const double lhs = (xs - ys).norm();
    const double rhs = (x - y).norm() / ((inv.center - x).norm() * (inv.center - y).norm());
    const double scale = std::max({lhs, rhs, 1e-300});
    return std::abs(lhs - rhs) / scale;
}

DiscreteMeasure kelvin_measure(const DiscreteMeasure& mu, const InversionSpec& inv,
                               const KernelSpec& spec) {
    spec.check();
    const double e = spec.alpha - spec.dimension;
    auto cloud = std::make_shared<PointCloud>();
    cloud->points = invert_points(mu.cloud->points, inv.center);
    const Eigen::VectorXd r = pole_distances(mu.cloud->points, inv.center);
    // quadrature volumes pick up the inversion Jacobian r^(-2n)
    cloud->cell_weights = mu.cloud->cell_weights.array() *
                          r.array().pow(-2.0 * spec.dimension);
    cloud->cell_size = mu.cloud->cell_size;
    cloud->label = mu.cloud->label;
    cloud->uniform_cells = false; // post-inversion, non-uniform

    DiscreteMeasure out;
    out.cloud = std::move(cloud);
    out.weights = mu.weights.array() * r.array().pow(e);
    return out;
}

SignedMeasure kelvin_measure(const SignedMeasure& mu, const InversionSpec& inv,
                             const KernelSpec& spec) {
    spec.check();
    SignedMeasure out;
    out.points = invert_points(mu.points, inv.center);
    const Eigen::VectorXd r = pole_distances(mu.points, inv.center);
    out.weights = mu.weights.array() * r.array().pow(spec.alpha - spec.dimension);
    out.cell_sizes = mu.cell_sizes;
    out.n_pos = mu.n_pos;
    return out;
}

double check_potential_transform(const DiscreteMeasure& mu, const Point& x,
                                 const InversionSpec& inv, const KernelSpec& spec) {
    require_exact(spec, "check_potential_transform");
    const DiscreteMeasure mus = kelvin_measure(mu, inv, spec);
    const Point xs = invert_point(x, inv);
    const double lhs = potential(mus, xs, spec);
    const double rhs =
        std::pow((x - inv.center).norm(), spec.dimension - spec.alpha) * potential(mu, x, spec);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return std::abs(lhs - rhs) / scale;
}

double check_energy_preservation(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const InversionSpec& inv, const KernelSpec& spec) {
    require_exact(spec, "check_energy_preservation");
    const DiscreteMeasure mus = kelvin_measure(mu, inv, spec);
    const DiscreteMeasure nus = kelvin_measure(nu, inv, spec);

    // off-diagonal double sums only: the diagonal convention is calibration
    // data and is not Kelvin-covariant
    auto offdiag = [&](const DiscreteMeasure& p, const DiscreteMeasure& q) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < p.cloud->size(); ++i)
            for (Eigen::Index j = 0; j < q.cloud->size(); ++j) {
                if (i == j && p.cloud->points.row(i) == q.cloud->points.row(j)) continue;
                acc += p.weights[i] * q.weights[j] *
                       kernel_value(p.cloud->points.row(i).transpose(),
                                    q.cloud->points.row(j).transpose(), spec);
            }
        return acc;
    };
    const double before = offdiag(mu, nu);
    const double after = offdiag(mus, nus);
    const double scale = std::max({std::abs(before), std::abs(after), 1e-300});
    return std::abs(before - after) / scale;
}

VectorMeasure TransformedCondenser::transport(const VectorMeasure& nu,
                                              const KernelSpec& spec) const {
    const Eigen::VectorXd rp = pole_distances(nu.geometry->plate_pos.points, inversion.center);
    const Eigen::VectorXd rn = pole_distances(nu.geometry->plate_neg.points, inversion.center);
    const double e = spec.alpha - spec.dimension;
    VectorMeasure out;
    out.geometry = geometry;
    out.pos_weights = nu.pos_weights.array() * rp.array().pow(e);
    out.neg_weights = nu.neg_weights.array() * rn.array().pow(e);
    return out;
}

TransformedCondenser transform_condenser(const CondenserGeometry& geom, const InversionSpec& inv) {
    if (!geom.touch_point.has_value() || *geom.touch_point != inv.center)
        throw invalid_condenser_error(
            "transform_condenser: inversion center must be the declared touch point");

    auto image = std::make_shared<CondenserGeometry>();
    image->dimension = geom.dimension;
    auto transform_plate = [&](const PointCloud& plate) {
        PointCloud out;
        out.points = invert_points(plate.points, inv.center);
        const Eigen::VectorXd r = pole_distances(plate.points, inv.center);
        out.cell_weights =
            plate.cell_weights.array() * r.array().pow(-2.0 * geom.dimension);
        out.cell_size = plate.cell_size;
        out.label = plate.label;
        out.uniform_cells = false;
        return out;
    };
    image->plate_pos = transform_plate(geom.plate_pos);
    image->plate_neg = transform_plate(geom.plate_neg);
    image->min_separation = compute_min_separation(image->plate_pos, image->plate_neg);
    if (!(image->min_separation > 0.0))
        throw invalid_condenser_error("transform_condenser: image plates are not separated");

    TransformedCondenser out;
    out.geometry = std::move(image);
    out.inversion = inv;
    return out;
}

double check_metric_preservation(const VectorMeasure& nu, const VectorMeasure& nu1,
                                 const TransformedCondenser& tc, const KernelSpec& spec) {
    require_exact(spec, "check_metric_preservation");

    auto offdiag_norm2 = [&](const SignedMeasure& s) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < s.points.rows(); ++i)
            for (Eigen::Index j = 0; j < s.points.rows(); ++j) {
                if (i == j) continue;
                acc += s.weights[i] * s.weights[j] *
                       kernel_value(s.points.row(i).transpose(), s.points.row(j).transpose(),
                                    spec);
            }
        return acc;
    };

    VectorMeasure delta = nu;
    delta.pos_weights -= nu1.pos_weights;
    delta.neg_weights -= nu1.neg_weights;
    VectorMeasure delta_star = tc.transport(nu, spec);
    const VectorMeasure nu1_star = tc.transport(nu1, spec);
    delta_star.pos_weights -= nu1_star.pos_weights;
    delta_star.neg_weights -= nu1_star.neg_weights;
    delta_star.geometry = tc.geometry;

    const double before = offdiag_norm2(r_map(delta));
    SignedMeasure s_after = r_map(delta_star);
    const double after = offdiag_norm2(s_after);
    const double scale = std::max({std::abs(before), std::abs(after), 1e-300});
    return std::abs(before - after) / scale;
}

} // namespace riesz
