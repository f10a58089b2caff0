#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "riesz/errors.hpp"

namespace riesz {

using Point = Eigen::VectorXd;

/// Discretized plate: quadrature point cloud with one positive cell weight
/// (volume) per point. Immutable by convention after construction.
struct PointCloud {
    Eigen::MatrixXd points;       // N x n, row per point
    Eigen::VectorXd cell_weights; // N, all > 0
    double cell_size = 0.0;       // characteristic linear size h
    std::string label;
    bool uniform_cells = true;    // false after Kelvin inversion

    Eigen::Index size() const { return points.rows(); }
    int dimension() const { return static_cast<int>(points.cols()); }
    double total_weight() const { return cell_weights.sum(); }
};

/// Two-plate condenser; plate_pos carries sign +1, plate_neg sign -1.
struct CondenserGeometry {
    int dimension = 0;
    PointCloud plate_pos;
    PointCloud plate_neg;
    std::optional<Point> touch_point;
    double min_separation = 0.0; // computed, see compute_min_separation

    double cell_size() const { return std::max(plate_pos.cell_size, plate_neg.cell_size); }
};

struct ValidationReport {
    bool disjoint = false;
    double min_separation = 0.0;
    bool touch_declared = false;
    bool touch_realized = false;    // both plates approach the declared x0
    bool touch_point_excluded = false; // no plate point coincides with x0
    bool standard_condenser = false;   // separated, no declared touch point
    bool ok = false;
    std::string detail;
};

/// Uniform-grid discretization of the closed ball: spacing h = 2r/resolution,
/// a cell contributes iff its center lies strictly inside the ball,
/// weight h^n per cell.
PointCloud generate_ball_cloud(const Point& center, double radius, int dimension,
                               int resolution, std::string label = {});

/// Removes all points within distance eps of x0 (eps = 0 removes exact
/// matches only). Surviving weights are untouched.
PointCloud exclude_near(const PointCloud& cloud, const Point& x0, double eps);

double compute_min_separation(const PointCloud& a, const PointCloud& b);

ValidationReport validate_condenser(const CondenserGeometry& geom);

/// Convenience constructor: fills dimension and min_separation and checks
/// basic invariants. Throws invalid_condenser_error on overlap.
CondenserGeometry make_condenser(PointCloud plate_pos, PointCloud plate_neg,
                                 std::optional<Point> touch_point = std::nullopt);

/// CSV plate format: optional '#' comment lines, then a header
/// x1,...,xn,weight; data rows are decimal with up to 17 significant digits.
PointCloud load_cloud_csv(const std::string& path);
void save_cloud_csv(const PointCloud& cloud, const std::string& path);

} // namespace riesz
