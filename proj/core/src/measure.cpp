#include "riesz/measure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace riesz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_points(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

double inner_or_inf(const Eigen::VectorXd& f, const Eigen::VectorXd& w) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (std::isinf(f[i])) {
            if (w[i] > 0.0) return kInf;
            continue; // zero weight carries no field energy
        }
        acc += f[i] * w[i];
    }
    return acc;
}

} // namespace

VectorMeasure zero_measure(std::shared_ptr<const CondenserGeometry> geometry) {
    VectorMeasure nu;
    nu.pos_weights = Eigen::VectorXd::Zero(geometry->plate_pos.size());
    nu.neg_weights = Eigen::VectorXd::Zero(geometry->plate_neg.size());
    nu.geometry = std::move(geometry);
    return nu;
}

SignedMeasure make_point_atoms(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights) {
    SignedMeasure s;
    s.points = points;
    s.weights = weights;
    s.cell_sizes = Eigen::VectorXd::Constant(points.rows(), std::numeric_limits<double>::quiet_NaN());
    s.n_pos = 0;
    return s;
}

SignedMeasure r_map(const VectorMeasure& nu) {
    const auto& gp = nu.geometry->plate_pos;
    const auto& gn = nu.geometry->plate_neg;
    SignedMeasure s;
    s.n_pos = gp.size();
    s.points.resize(gp.size() + gn.size(), nu.geometry->dimension);
    s.points.topRows(gp.size()) = gp.points;
    s.points.bottomRows(gn.size()) = gn.points;
    s.weights.resize(s.points.rows());
    s.weights.head(gp.size()) = nu.pos_weights;
    s.weights.tail(gn.size()) = -nu.neg_weights;
    s.cell_sizes.resize(s.points.rows());
    s.cell_sizes.head(gp.size()).setConstant(gp.cell_size);
    s.cell_sizes.tail(gn.size()).setConstant(gn.cell_size);
    return s;
}

double potential(const DiscreteMeasure& mu, const Point& x, const KernelSpec& spec) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < mu.cloud->size(); ++j)
        acc += mu.weights[j] * kernel_value(x, mu.cloud->points.row(j).transpose(), spec);
    return acc;
}

double potential(const SignedMeasure& mu, const Point& x, const KernelSpec& spec) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < mu.points.rows(); ++j)
        acc += mu.weights[j] * kernel_value(x, mu.points.row(j).transpose(), spec);
    return acc;
}

double energy(const DiscreteMeasure& mu, const KernelSpec& spec) {
    return mutual_energy(mu, mu, spec);
}

double mutual_energy(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const KernelSpec& spec) {
    if (mu.cloud.get() == nu.cloud.get() || same_points(mu.cloud->points, nu.cloud->points)) {
        const Eigen::VectorXd h =
            Eigen::VectorXd::Constant(mu.cloud->size(), mu.cloud->cell_size);
        return weighted_bilinear_self(mu.cloud->points, mu.weights, nu.weights, h, spec);
    }
    return weighted_cross_energy(mu.cloud->points, mu.weights, nu.cloud->points, nu.weights, spec);
}

double energy(const SignedMeasure& mu, const KernelSpec& spec) {
    return mutual_energy(mu, mu, spec);
}

double mutual_energy(const SignedMeasure& mu, const SignedMeasure& nu, const KernelSpec& spec) {
    if (mu.points.rows() == nu.points.rows() &&
        (&mu == &nu || same_points(mu.points, nu.points))) {
        if (spec.exact() && mu.cell_sizes.hasNaN())
            throw mode_misuse_error(
                "mutual_energy: exact-mode self energy of point atoms is undefined");
        return weighted_bilinear_self(mu.points, mu.weights, nu.weights, mu.cell_sizes, spec);
    }
    return weighted_cross_energy(mu.points, mu.weights, nu.points, nu.weights, spec);
}

double vector_energy(const VectorMeasure& nu, const VectorMeasure& nu1, const KernelSpec& spec) {
    if (nu.geometry.get() != nu1.geometry.get())
        throw dimension_mismatch_error("vector_energy: measures on different geometries");
    const auto& gp = nu.geometry->plate_pos;
    const auto& gn = nu.geometry->plate_neg;
    const Eigen::VectorXd hp = Eigen::VectorXd::Constant(gp.size(), gp.cell_size);
    const Eigen::VectorXd hn = Eigen::VectorXd::Constant(gn.size(), gn.cell_size);

    const double e11 = weighted_bilinear_self(gp.points, nu.pos_weights, nu1.pos_weights, hp, spec);
    const double e22 = weighted_bilinear_self(gn.points, nu.neg_weights, nu1.neg_weights, hn, spec);
    const double e12 =
        weighted_cross_energy(gp.points, nu.pos_weights, gn.points, nu1.neg_weights, spec);
    const double e21 =
        weighted_cross_energy(gn.points, nu.neg_weights, gp.points, nu1.pos_weights, spec);
    return e11 + e22 - e12 - e21;
}

double condenser_metric(const VectorMeasure& nu, const VectorMeasure& nu1, const KernelSpec& spec) {
    if (nu.geometry.get() != nu1.geometry.get())
        throw dimension_mismatch_error("condenser_metric: measures on different geometries");
    VectorMeasure delta = nu;
    delta.pos_weights -= nu1.pos_weights;
    delta.neg_weights -= nu1.neg_weights;
    const double rad = vector_energy(delta, delta, spec);
    if (rad < -1e-10)
        throw mode_misuse_error("condenser_metric: negative radicand (indefinite kernel mode?)");
    return rad > 0.0 ? std::sqrt(rad) : 0.0;
}

ExternalField ExternalField::zero(const CondenserGeometry& geom) {
    ExternalField f;
    f.kind = FieldCase::CaseI;
    f.pos_values = Eigen::VectorXd::Zero(geom.plate_pos.size());
    f.neg_values = Eigen::VectorXd::Zero(geom.plate_neg.size());
    return f;
}

ExternalField field_from_zeta(const SignedMeasure& zeta, const CondenserGeometry& geom,
                              const KernelSpec& spec) {
    ExternalField f;
    f.kind = FieldCase::CaseII;
    f.zeta = zeta;
    f.pos_values.resize(geom.plate_pos.size());
    f.neg_values.resize(geom.plate_neg.size());
    for (Eigen::Index i = 0; i < geom.plate_pos.size(); ++i)
        f.pos_values[i] = potential(zeta, geom.plate_pos.points.row(i).transpose(), spec);
    for (Eigen::Index i = 0; i < geom.plate_neg.size(); ++i)
        f.neg_values[i] = -potential(zeta, geom.plate_neg.points.row(i).transpose(), spec);
    return f;
}

double field_inner(const ExternalField& field, const VectorMeasure& nu) {
    const double p = inner_or_inf(field.pos_values, nu.pos_weights);
    const double q = inner_or_inf(field.neg_values, nu.neg_weights);
    return p + q;
}

bool ProblemData::constrained() const {
    return (sigma_pos.size() > 0 && sigma_pos.allFinite()) ||
           (sigma_neg.size() > 0 && sigma_neg.allFinite());
}

void ProblemData::check() const {
    kernel.check();
    const auto np = geometry->plate_pos.size();
    const auto nn = geometry->plate_neg.size();
    if (g_pos.size() != np || g_neg.size() != nn)
        throw dimension_mismatch_error("ProblemData: g sample count mismatch");
    if (sigma_pos.size() != np || sigma_neg.size() != nn)
        throw dimension_mismatch_error("ProblemData: sigma sample count mismatch");
    if (field.pos_values.size() != np || field.neg_values.size() != nn)
        throw dimension_mismatch_error("ProblemData: field sample count mismatch");
    if (!(g_pos.minCoeff() > 0.0) || !(g_neg.minCoeff() > 0.0))
        throw invalid_geometry_error("ProblemData: g must be strictly positive");
    if (!(a[0] > 0.0) || !(a[1] > 0.0))
        throw invalid_geometry_error("ProblemData: masses a must be positive");
    auto check_plate = [](const Eigen::VectorXd& sigma, const Eigen::VectorXd& g, double ai,
                          const char* which) {
        if (!(sigma.minCoeff() > 0.0))
            throw invalid_geometry_error(std::string("ProblemData: sigma must be positive on ") +
                                         which);
        if (sigma.allFinite()) {
            const double cap = g.dot(sigma);
            if (!(cap > ai))
                throw infeasible_error(std::string("ProblemData: <g, sigma> <= a on ") + which);
        }
    };
    check_plate(sigma_pos, g_pos, a[0], "plate_pos");
    check_plate(sigma_neg, g_neg, a[1], "plate_neg");
}

double gauss_functional(const VectorMeasure& nu, const ProblemData& problem) {
    const double lin = field_inner(problem.field, nu);
    if (std::isinf(lin)) return kInf;
    return vector_energy(nu, nu, problem.kernel) + 2.0 * lin;
}

FeasibilityReport check_feasible(const VectorMeasure& nu, const ProblemData& problem,
                                 double tau_feas) {
    FeasibilityReport rep;
    rep.mass_residual[0] = std::abs(problem.g_pos.dot(nu.pos_weights) - problem.a[0]);
    rep.mass_residual[1] = std::abs(problem.g_neg.dot(nu.neg_weights) - problem.a[1]);
    rep.max_violation[0] =
        std::max(0.0, (nu.pos_weights - problem.sigma_pos).maxCoeff());
    rep.max_violation[1] =
        std::max(0.0, (nu.neg_weights - problem.sigma_neg).maxCoeff());
    const double lower = std::min(std::min(nu.pos_weights.minCoeff(), nu.neg_weights.minCoeff()), 0.0);
    rep.feasible = true;
    for (int i = 0; i < 2; ++i) {
        const double tau = tau_feas < 0.0 ? 1e-9 * problem.a[static_cast<std::size_t>(i)] : tau_feas;
        rep.tau = tau;
        if (rep.mass_residual[static_cast<std::size_t>(i)] > tau ||
            rep.max_violation[static_cast<std::size_t>(i)] > tau || -lower > tau)
            rep.feasible = false;
    }
    return rep;
}

void save_weights_csv(const VectorMeasure& nu, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("save_weights_csv: cannot open " + path);
    std::string buf = "index,plate,weight\n";
    char num[40];
    for (Eigen::Index i = 0; i < nu.pos_weights.size(); ++i) {
        std::snprintf(num, sizeof(num), "%lld,pos,%.17g\n", static_cast<long long>(i),
                      nu.pos_weights[i]);
        buf += num;
    }
    for (Eigen::Index i = 0; i < nu.neg_weights.size(); ++i) {
        std::snprintf(num, sizeof(num), "%lld,neg,%.17g\n", static_cast<long long>(i),
                      nu.neg_weights[i]);
        buf += num;
    }
    out << buf;
}

Eigen::VectorXd load_weights_csv(const std::string& path, Eigen::Index n_pos, Eigen::Index n_neg) {
    std::ifstream in(path);
    if (!in) throw parse_error("load_weights_csv: cannot open " + path);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_pos + n_neg);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("index", 0) == 0) continue;
        std::stringstream ss(line);
        std::string sidx, plate, sval;
        if (!std::getline(ss, sidx, ',') || !std::getline(ss, plate, ',') ||
            !std::getline(ss, sval, ','))
            throw parse_error("load_weights_csv: " + path + ":" + std::to_string(lineno) +
                              ": bad row");
        const Eigen::Index idx = std::stoll(sidx);
        const double v = std::stod(sval);
        if (plate == "pos" && idx >= 0 && idx < n_pos)
            w[idx] = v;
        else if (plate == "neg" && idx >= 0 && idx < n_neg)
            w[n_pos + idx] = v;
        else
            throw parse_error("load_weights_csv: " + path + ":" + std::to_string(lineno) +
                              ": index out of range");
    }
    return w;
}

} // namespace riesz
