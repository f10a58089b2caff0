#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <optional>
#include <string>

#include "riesz/geometry.hpp"
#include "riesz/kernel.hpp"

namespace riesz {

/// Nonnegative weights on one plate cloud.
struct DiscreteMeasure {
    std::shared_ptr<const PointCloud> cloud;
    Eigen::VectorXd weights;

    double total_mass() const { return weights.sum(); }
};

/// Pair of nonnegative measures on the two plates of a condenser.
struct VectorMeasure {
    std::shared_ptr<const CondenserGeometry> geometry;
    Eigen::VectorXd pos_weights;
    Eigen::VectorXd neg_weights;

    DiscreteMeasure pos() const {
        return {std::shared_ptr<const PointCloud>(geometry, &geometry->plate_pos), pos_weights};
    }
    DiscreteMeasure neg() const {
        return {std::shared_ptr<const PointCloud>(geometry, &geometry->plate_neg), neg_weights};
    }
};

VectorMeasure zero_measure(std::shared_ptr<const CondenserGeometry> geometry);

/// Signed scalar measure on an explicit point list. cell_sizes feed the
/// exact-mode diagonal; a NaN entry means "no cell attached" (point atom),
/// for which exact-mode self energies are undefined.
struct SignedMeasure {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;
    Eigen::VectorXd cell_sizes;
    Eigen::Index n_pos = 0; // leading rows that came from the positive plate
};

SignedMeasure make_point_atoms(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights);

/// R-map: +pos weights on plate_pos points, -neg weights on plate_neg points.
SignedMeasure r_map(const VectorMeasure& nu);

// ---- scalar-measure operations ----

/// Potential sum w_j kappa(x, y_j); +infinity when x is an atom in exact mode.
double potential(const DiscreteMeasure& mu, const Point& x, const KernelSpec& spec);
double potential(const SignedMeasure& mu, const Point& x, const KernelSpec& spec);

double energy(const DiscreteMeasure& mu, const KernelSpec& spec);
double mutual_energy(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const KernelSpec& spec);

double energy(const SignedMeasure& mu, const KernelSpec& spec);
/// Requires both measures to live on the same point list (as r_map images of
/// one geometry do).
double mutual_energy(const SignedMeasure& mu, const SignedMeasure& nu, const KernelSpec& spec);

// ---- vector-measure operations ----

/// Block form sum_{i,j} s_i s_j E(nu^i, nu1^j).
double vector_energy(const VectorMeasure& nu, const VectorMeasure& nu1, const KernelSpec& spec);

/// sqrt of the block form applied to the componentwise difference. Radicand
/// below -1e-10 signals an indefinite kernel mode -> mode_misuse_error;
/// small negative values clamp to zero.
double condenser_metric(const VectorMeasure& nu, const VectorMeasure& nu1, const KernelSpec& spec);

// ---- external fields and problem data ----

enum class FieldCase { CaseI, CaseII };

/// Per-point field samples; +infinity entries are representable (they force
/// weight zero in any finite-objective measure). Case II remembers zeta so
/// the identities based on it stay available.
struct ExternalField {
    FieldCase kind = FieldCase::CaseI;
    Eigen::VectorXd pos_values;
    Eigen::VectorXd neg_values;
    std::optional<SignedMeasure> zeta;

    static ExternalField zero(const CondenserGeometry& geom);
};

/// Case II field: f_i(x) = s_i U^zeta(x), sampled at every plate point.
ExternalField field_from_zeta(const SignedMeasure& zeta, const CondenserGeometry& geom,
                              const KernelSpec& spec);

/// <f, nu>; +infinity if an infinite sample carries positive weight.
double field_inner(const ExternalField& field, const VectorMeasure& nu);

struct ProblemData {
    std::shared_ptr<const CondenserGeometry> geometry;
    KernelSpec kernel;
    Eigen::VectorXd g_pos, g_neg;       // positive samples of g_i
    std::array<double, 2> a{1.0, 1.0};  // mass targets
    Eigen::VectorXd sigma_pos, sigma_neg; // upper bounds; +infinity = none
    ExternalField field;

    bool constrained() const;
    /// Throws on violated type-level invariants (g > 0, sigma > 0 where
    /// finite, <g, sigma> > a on constrained plates).
    void check() const;
};

/// Gauss functional E(nu) + 2<f, nu>; +infinity when the field is infinite
/// on the support (a signal, not an error).
double gauss_functional(const VectorMeasure& nu, const ProblemData& problem);

struct FeasibilityReport {
    std::array<double, 2> mass_residual{0, 0};   // |<g_i, nu^i> - a_i|
    std::array<double, 2> max_violation{0, 0};   // max(nu - sigma, 0)
    bool feasible = false;
    double tau = 0.0;
};

/// tau_feas < 0 selects the default 1e-9 * a_i per plate.
FeasibilityReport check_feasible(const VectorMeasure& nu, const ProblemData& problem,
                                 double tau_feas = -1.0);

// ---- serialization ----

/// Columns: index,plate,weight with plate in {pos,neg}; 17 significant digits.
void save_weights_csv(const VectorMeasure& nu, const std::string& path);
Eigen::VectorXd load_weights_csv(const std::string& path, Eigen::Index n_pos, Eigen::Index n_neg);

} // namespace riesz
