#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "riesz/measure.hpp"

namespace riesz {

enum class Algorithm { ProjectedGradient, FrankWolfe };
enum class SolveStatus { Optimal, IterationLimit, Infeasible };

struct StepRule {
    enum class Kind { Fixed, Backtracking } kind = Kind::Backtracking;
    double eta = 0.0;      // fixed step
    double beta = 0.5;     // backtracking shrink factor
    double c = 1e-4;       // Armijo constant
};

struct SolveOptions {
    Algorithm algorithm = Algorithm::ProjectedGradient;
    int max_iter = 50000;
    double tol_kkt = 1e-9;
    StepRule step_rule;
    std::uint64_t seed = 0;
    bool random_start = false; // default start: feasibility projection of zero
    int trace_stride = 0;      // 0 = auto (~50 snapshots)
};

struct TracePoint {
    int iteration = 0;
    double objective = 0.0;
    double kkt_residual = 0.0;
};

struct SolveResult {
    VectorMeasure weights;
    double objective = 0.0;
    double kkt_residual = 0.0;
    std::vector<Eigen::Index> active_lower; // concatenated indexing, pos then neg
    std::vector<Eigen::Index> active_upper;
    std::array<double, 2> multipliers{0.0, 0.0};
    std::vector<TracePoint> trace;
    std::vector<Eigen::VectorXd> trace_weights; // sampled iterates (concatenated)
    SolveStatus status = SolveStatus::IterationLimit;
    int iterations = 0;
};

struct KktReport {
    std::array<double, 2> multipliers{0.0, 0.0};
    double max_stationarity_violation = 0.0; // scaled by 1 + |grad|_inf
    double max_complementarity_violation = 0.0;
    double residual = 0.0; // max of the two
};

struct CapacityResult {
    double estimate = 0.0;
    DiscreteMeasure equilibrium_weights;
    double min_energy = 0.0;
};

struct ProbeLevel {
    int level = 0;                  // resolution
    double objective = 0.0;
    std::array<double, 2> near_pole_mass_fraction{0.0, 0.0};
    int upper_active_count = 0;     // within radius rho of the pole
    SolveStatus status = SolveStatus::IterationLimit;
};

struct ProbeReport {
    std::vector<ProbeLevel> levels;
    double rho = 0.0;          // near-pole radius, fixed across levels
    bool constrained = false;
    bool objective_monotone = false;     // unconstrained contract
    bool near_mass_monotone = false;     // unconstrained contract
    bool differences_decreasing = false; // constrained contract
    bool upper_active_near_pole = false; // constrained contract
};

struct ProblemValidationReport {
    bool touch_ok = false;        // (a') at most one declared touch point
    bool field_finite_ok = false; // (b') field finite except flagged points
    std::vector<Eigen::Index> infinite_field_points; // concatenated indexing
    bool sigma_energy_finite = false; // (c')
    double sigma_energy = 0.0;
    bool mass_margin_ok = false;  // (d') <g, sigma> finite and > a
    std::array<double, 2> sigma_mass{0.0, 0.0};
    bool all_ok = false;
};

/// Euclidean projection onto {0 <= w <= sigma, <g, w> = a} by bisection on
/// the single dual variable. Throws infeasible_error if <g, sigma> < a.
Eigen::VectorXd project_knapsack(const Eigen::VectorXd& w, const Eigen::VectorXd& g, double a,
                                 const Eigen::VectorXd& sigma);

SolveResult solve_constrained(const ProblemData& problem, const SolveOptions& opts);

/// Same program with the upper bounds dropped.
SolveResult solve_unconstrained(ProblemData problem, const SolveOptions& opts);

KktReport kkt_check(const ProblemData& problem, const VectorMeasure& weights,
                    double active_tol = -1.0);

CapacityResult capacity_estimate(const PointCloud& cloud, const KernelSpec& spec,
                                 const SolveOptions& opts);

/// Refinement study on two unit balls touching at a point: one solve per level,
/// pole-exclusion radius = one cell. rho < 0 selects 5 coarsest cells.
ProbeReport short_circuit_probe(const std::vector<int>& levels, double alpha, bool constrained,
                                const SolveOptions& opts, double sigma_multiple = 3.0,
                                double rho = -1.0);

ProblemValidationReport validate_problem(const ProblemData& problem);

} // namespace riesz
