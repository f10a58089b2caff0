#include "riesz/geometry.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace riesz {

namespace {

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

} // namespace

PointCloud generate_ball_cloud(const Point& center, double radius, int dimension,
                               int resolution, std::string label) {
    if (radius <= 0.0)
        throw invalid_geometry_error("generate_ball_cloud: radius must be positive");
    if (dimension < 2)
        throw invalid_geometry_error("generate_ball_cloud: dimension must be >= 2");
    if (resolution < 2)
        throw invalid_geometry_error("generate_ball_cloud: resolution must be >= 2");
    if (center.size() != dimension)
        throw dimension_mismatch_error("generate_ball_cloud: center dimension mismatch");

    const double h = 2.0 * radius / resolution;
    const double cell_volume = std::pow(h, dimension);
    const double r2 = radius * radius;

    std::vector<Eigen::VectorXd> pts;
    Eigen::VectorXd x(dimension);
    std::vector<int> idx(dimension, 0);
    // odometer over the n-dimensional grid
    for (;;) {
        double d2 = 0.0;
        for (int k = 0; k < dimension; ++k) {
            x[k] = center[k] - radius + h * (idx[k] + 0.5);
            const double d = x[k] - center[k];
            d2 += d * d;
        }
        if (d2 < r2) pts.push_back(x);
        int k = dimension - 1;
        while (k >= 0 && ++idx[k] == resolution) idx[k--] = 0;
        if (k < 0) break;
    }
    if (pts.empty())
        throw degenerate_plate_error("generate_ball_cloud: no cell centers inside ball");

    PointCloud cloud;
    cloud.points.resize(static_cast<Eigen::Index>(pts.size()), dimension);
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i)
        cloud.points.row(i) = pts[static_cast<std::size_t>(i)].transpose();
    cloud.cell_weights = Eigen::VectorXd::Constant(cloud.points.rows(), cell_volume);
    cloud.cell_size = h;
    cloud.label = std::move(label);
    return cloud;
}

PointCloud exclude_near(const PointCloud& cloud, const Point& x0, double eps) {
    if (eps < 0.0)
        throw invalid_geometry_error("exclude_near: eps must be nonnegative");
    if (x0.size() != cloud.dimension())
        throw dimension_mismatch_error("exclude_near: point dimension mismatch");

    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(cloud.size()));
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const double d = (cloud.points.row(i).transpose() - x0).norm();
        const bool drop = (eps == 0.0) ? (d == 0.0) : (d < eps);
        if (!drop) keep.push_back(i);
    }
    if (keep.empty())
        throw degenerate_plate_error("exclude_near: all points removed");

    PointCloud out;
    out.points.resize(static_cast<Eigen::Index>(keep.size()), cloud.dimension());
    out.cell_weights.resize(static_cast<Eigen::Index>(keep.size()));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.points.row(i) = cloud.points.row(keep[static_cast<std::size_t>(i)]);
        out.cell_weights[i] = cloud.cell_weights[keep[static_cast<std::size_t>(i)]];
    }
    out.cell_size = cloud.cell_size;
    out.label = cloud.label;
    out.uniform_cells = cloud.uniform_cells;
    return out;
}

double compute_min_separation(const PointCloud& a, const PointCloud& b) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j)
            best = std::min(best, (a.points.row(i) - b.points.row(j)).norm());
    return best;
}

ValidationReport validate_condenser(const CondenserGeometry& geom) {
    ValidationReport rep;
    if (geom.plate_pos.size() == 0 || geom.plate_neg.size() == 0)
        throw degenerate_plate_error("validate_condenser: empty plate");

    rep.min_separation = compute_min_separation(geom.plate_pos, geom.plate_neg);
    rep.disjoint = rep.min_separation > 0.0;
    if (!rep.disjoint)
        throw invalid_condenser_error("validate_condenser: plates share a point");

    rep.touch_declared = geom.touch_point.has_value();
    if (rep.touch_declared) {
        const Point& x0 = *geom.touch_point;
        rep.touch_point_excluded = true;
        bool near_pos = false, near_neg = false;
        const double reach = 3.0 * geom.cell_size();
        for (Eigen::Index i = 0; i < geom.plate_pos.size(); ++i) {
            const double d = (geom.plate_pos.points.row(i).transpose() - x0).norm();
            if (d == 0.0) rep.touch_point_excluded = false;
            if (d <= reach) near_pos = true;
        }
        for (Eigen::Index i = 0; i < geom.plate_neg.size(); ++i) {
            const double d = (geom.plate_neg.points.row(i).transpose() - x0).norm();
            if (d == 0.0) rep.touch_point_excluded = false;
            if (d <= reach) near_neg = true;
        }
        rep.touch_realized = near_pos && near_neg;
        rep.standard_condenser = false;
        rep.ok = rep.touch_point_excluded && rep.touch_realized;
        if (!rep.ok)
            rep.detail = rep.touch_point_excluded
                             ? "declared touch point not approached by both plates"
                             : "a plate point coincides with the declared touch point";
    } else {
        rep.standard_condenser = rep.min_separation > 0.0;
        rep.ok = rep.standard_condenser;
    }
    return rep;
}

CondenserGeometry make_condenser(PointCloud plate_pos, PointCloud plate_neg,
                                 std::optional<Point> touch_point) {
    if (plate_pos.dimension() != plate_neg.dimension())
        throw dimension_mismatch_error("make_condenser: plate dimensions differ");
    CondenserGeometry geom;
    geom.dimension = plate_pos.dimension();
    geom.plate_pos = std::move(plate_pos);
    geom.plate_neg = std::move(plate_neg);
    geom.touch_point = std::move(touch_point);
    if (geom.touch_point && geom.touch_point->size() != geom.dimension)
        throw dimension_mismatch_error("make_condenser: touch point dimension mismatch");
    geom.min_separation = compute_min_separation(geom.plate_pos, geom.plate_neg);
    if (geom.min_separation == 0.0)
        throw invalid_condenser_error("make_condenser: plates share a point");
    return geom;
}

PointCloud load_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("load_cloud_csv: cannot open " + path);

    std::string line;
    int lineno = 0;
    int n = -1;
    std::vector<double> values; // row-major coords
    std::vector<double> weights;

    auto fail = [&](const std::string& what) {
        std::ostringstream os;
        os << "load_cloud_csv: " << path << ":" << lineno << ": " << what;
        throw parse_error(os.str());
    };

    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!header_seen) {
            // header: x1,...,xn,weight
            if (fields.size() < 2 || fields.back() != "weight")
                fail("header must be x1,...,xn,weight");
            n = static_cast<int>(fields.size()) - 1;
            header_seen = true;
            continue;
        }
        if (static_cast<int>(fields.size()) != n + 1) fail("row width does not match header");
        for (int k = 0; k <= n; ++k) {
            const std::string& s = fields[static_cast<std::size_t>(k)];
            double v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size()) fail("bad number '" + s + "'");
            if (k < n)
                values.push_back(v);
            else {
                if (v <= 0.0) fail("nonpositive weight");
                weights.push_back(v);
            }
        }
    }
    if (!header_seen) throw parse_error("load_cloud_csv: " + path + ": missing header");
    if (weights.empty()) throw parse_error("load_cloud_csv: " + path + ": no data rows");

    PointCloud cloud;
    const auto N = static_cast<Eigen::Index>(weights.size());
    cloud.points.resize(N, n);
    cloud.cell_weights.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (int k = 0; k < n; ++k)
            cloud.points(i, k) = values[static_cast<std::size_t>(i) * n + k];
        cloud.cell_weights[i] = weights[static_cast<std::size_t>(i)];
    }
    // characteristic size from the mean cell volume
    cloud.cell_size = std::pow(cloud.cell_weights.mean(), 1.0 / n);
    return cloud;
}

void save_cloud_csv(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw parse_error("save_cloud_csv: cannot open " + path);
    std::string buf;
    for (int k = 0; k < cloud.dimension(); ++k) {
        buf += 'x';
        buf += std::to_string(k + 1);
        buf += ',';
    }
    buf += "weight\n";
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        for (int k = 0; k < cloud.dimension(); ++k) {
            format_double(buf, cloud.points(i, k));
            buf += ',';
        }
        format_double(buf, cloud.cell_weights[i]);
        buf += '\n';
    }
    out << buf;
}

} // namespace riesz
