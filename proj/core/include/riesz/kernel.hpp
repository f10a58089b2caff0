#pragma once

#include <Eigen/Dense>

#include "riesz/geometry.hpp"

namespace riesz {

enum class KernelMode {
    ExactOffdiag, // |x-y|^(alpha-n), diagonal via the cell calibration rule
    Regularized   // (|x-y|^2 + eps^2)^((alpha-n)/2), inverse multiquadric
};

struct KernelSpec {
    double alpha = 2.0;
    int dimension = 3;
    KernelMode mode = KernelMode::Regularized;
    double eps = 0.0; // regularized mode only, > 0

    void check() const;
    bool exact() const { return mode == KernelMode::ExactOffdiag; }
};

inline KernelSpec regularized_kernel(double alpha, int dimension, double eps) {
    return KernelSpec{alpha, dimension, KernelMode::Regularized, eps};
}
inline KernelSpec exact_kernel(double alpha, int dimension) {
    return KernelSpec{alpha, dimension, KernelMode::ExactOffdiag, 0.0};
}

/// Mean of |x-y|^(alpha-n) over a unit-cube cell pair, from the stored
/// calibration table (linear interpolation in alpha). Exact-mode diagonal
/// entries are d = cell_self_energy_constant(n, alpha) * h^(alpha-n).
double cell_self_energy_constant(int dimension, double alpha);

/// Diagonal entry of an exact-mode self matrix for cell size h.
double diag_rule(const KernelSpec& spec, double h);

/// Pointwise kernel. Exact mode returns +infinity at x == y.
double kernel_value(const Point& x, const Point& y, const KernelSpec& spec);

struct KernelMatrix {
    Eigen::MatrixXd entries;
    bool self = false; // rows == cols (diagonal handled per mode)
};

/// Cross matrix between two clouds; a coincident pair yields +infinity in
/// exact mode (the clouds of a condenser are disjoint, so this is benign).
KernelMatrix assemble_matrix(const PointCloud& a, const PointCloud& b, const KernelSpec& spec);

/// Self matrix of one cloud; in exact mode the diagonal follows diag_rule.
KernelMatrix assemble_matrix(const PointCloud& a, const KernelSpec& spec);

/// Generic weighted-cloud bilinear form machinery shared by the measure
/// module: the bilinear form w1' K(points) w2 on one point set (diagonal
/// handled per mode, exact-mode diagonal from per-point cell sizes), and
/// the cross form between two weighted clouds.
double weighted_bilinear_self(const Eigen::MatrixXd& points, const Eigen::VectorXd& w1,
                              const Eigen::VectorXd& w2, const Eigen::VectorXd& cell_sizes,
                              const KernelSpec& spec);
double weighted_cross_energy(const Eigen::MatrixXd& pa, const Eigen::VectorXd& wa,
                             const Eigen::MatrixXd& pb, const Eigen::VectorXd& wb,
                             const KernelSpec& spec);

} // namespace riesz
