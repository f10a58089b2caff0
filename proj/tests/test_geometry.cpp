#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <riesz/geometry.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace riesz;

TEST_CASE("ball cloud: centers inside, uniform weights, expected count scaling") {
    const Point c = Eigen::Vector3d(0.5, -1.0, 2.0);
    const PointCloud cloud = generate_ball_cloud(c, 1.0, 3, 10, "b");
    const double h = 2.0 / 10;
    CHECK(cloud.size() > 0);
    CHECK(cloud.cell_size == doctest::Approx(h));
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        CHECK((cloud.points.row(i).transpose() - c).norm() < 1.0);
        CHECK(cloud.cell_weights[i] == doctest::Approx(h * h * h));
    }
    // boundary cells stick out, so the total weight brackets 4/3 pi loosely
    CHECK(cloud.total_weight() == doctest::Approx(4.18879).epsilon(0.1));
}

TEST_CASE("ball cloud dimension 2 and 4") {
    const PointCloud d2 = generate_ball_cloud(Eigen::Vector2d(0, 0), 1.0, 2, 20);
    CHECK(d2.dimension() == 2);
    CHECK(d2.total_weight() == doctest::Approx(3.14159).epsilon(0.05));
    Point c4(4);
    c4.setZero();
    const PointCloud d4 = generate_ball_cloud(c4, 1.0, 4, 8);
    CHECK(d4.dimension() == 4);
    CHECK(d4.total_weight() == doctest::Approx(4.9348).epsilon(0.15)); // pi^2/2
}

TEST_CASE("exclude_near removes points within radius, weights untouched") {
    const PointCloud cloud = generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, 8);
    const Point x0 = Eigen::Vector3d(1, 0, 0);
    const PointCloud cut = exclude_near(cloud, x0, 0.3);
    CHECK(cut.size() < cloud.size());
    for (Eigen::Index i = 0; i < cut.size(); ++i)
        CHECK((cut.points.row(i).transpose() - x0).norm() >= 0.3);
    CHECK(cut.cell_weights.minCoeff() == doctest::Approx(cloud.cell_weights.minCoeff()));
}

TEST_CASE("touching-ball condenser validates; touch realized, not standard") {
    const Point pole = Eigen::Vector3d(1, 0, 0);
    const double h = 2.0 / 8;
    PointCloud p1 =
        exclude_near(generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, 8, "pos"), pole, h);
    PointCloud p2 =
        exclude_near(generate_ball_cloud(Eigen::Vector3d(2, 0, 0), 1.0, 3, 8, "neg"), pole, h);
    const CondenserGeometry geom = make_condenser(p1, p2, pole);
    const ValidationReport rep = validate_condenser(geom);
    CHECK(rep.disjoint);
    CHECK(rep.touch_declared);
    CHECK(rep.touch_realized);
    CHECK(rep.touch_point_excluded);
    CHECK_FALSE(rep.standard_condenser);
    CHECK(rep.ok);
}

TEST_CASE("separated condenser is standard") {
    PointCloud p1 = generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, 6, "pos");
    PointCloud p2 = generate_ball_cloud(Eigen::Vector3d(3, 0, 0), 1.0, 3, 6, "neg");
    const CondenserGeometry geom = make_condenser(p1, p2);
    const ValidationReport rep = validate_condenser(geom);
    CHECK(rep.standard_condenser);
    CHECK(rep.min_separation > 0.9);
    CHECK(rep.ok);
}

TEST_CASE("plates sharing a point are rejected") {
    // centers one grid-multiple apart: the balls overlap and grid nodes in
    // the lens coincide exactly
    PointCloud p1 = generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, 6, "pos");
    PointCloud p2 = generate_ball_cloud(Eigen::Vector3d(1.0, 0, 0), 1.0, 3, 6, "neg");
    CHECK_THROWS_AS(make_condenser(p1, p2), invalid_condenser_error);
}

TEST_CASE("cloud CSV round trip is exact") {
    const PointCloud cloud = generate_ball_cloud(Eigen::Vector3d(0.1, 0.2, 0.3), 0.7, 3, 5, "rt");
    const std::string path = (std::filesystem::temp_directory_path() / "rt_cloud.csv").string();
    save_cloud_csv(cloud, path);
    const PointCloud back = load_cloud_csv(path);
    REQUIRE(back.size() == cloud.size());
    CHECK((back.points - cloud.points).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.cell_weights - cloud.cell_weights).lpNorm<Eigen::Infinity>() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("cloud CSV parse errors carry line numbers") {
    const auto dir = std::filesystem::temp_directory_path();

    SUBCASE("wrong column count") {
        const std::string path = (dir / "bad_cols.csv").string();
        std::ofstream(path) << "x1,x2,x3,weight\n0,0,0,1\n0,1,2\n";
        CHECK_THROWS_WITH_AS(load_cloud_csv(path), doctest::Contains(":3"), parse_error);
        std::remove(path.c_str());
    }
    SUBCASE("nonpositive weight") {
        const std::string path = (dir / "bad_w.csv").string();
        std::ofstream(path) << "x1,x2,x3,weight\n0,0,0,0.0\n";
        CHECK_THROWS_AS(load_cloud_csv(path), parse_error);
        std::remove(path.c_str());
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_cloud_csv((dir / "nope_really_missing.csv").string()), parse_error);
    }
}
