#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <riesz/kernel.hpp>

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

using namespace riesz;

TEST_CASE("kernel values: exact and regularized forms, coincidence") {
    const Point x = Eigen::Vector3d(0, 0, 0), y = Eigen::Vector3d(2, 0, 0);
    // alpha=2, n=3: kappa = 1/|x-y|
    CHECK(kernel_value(x, y, exact_kernel(2.0, 3)) == doctest::Approx(0.5));
    CHECK(kernel_value(x, x, exact_kernel(2.0, 3)) ==
          std::numeric_limits<double>::infinity());
    // regularized at coincidence: eps^(alpha-n)
    const KernelSpec reg = regularized_kernel(2.0, 3, 0.1);
    CHECK(kernel_value(x, x, reg) == doctest::Approx(10.0));
    CHECK(kernel_value(x, y, reg) == doctest::Approx(1.0 / std::sqrt(4.01)));
}

TEST_CASE("kernel spec invariants") {
    CHECK_THROWS_AS(exact_kernel(3.0, 3).check(), invalid_geometry_error);
    CHECK_THROWS_AS(exact_kernel(-0.1, 3).check(), invalid_geometry_error);
    CHECK_THROWS_AS(regularized_kernel(2.0, 3, 0.0).check(), invalid_geometry_error);
    CHECK_NOTHROW(regularized_kernel(1.5, 3, 0.01).check());
}

TEST_CASE("calibration constant matches Monte Carlo cell integral") {
    // independent oracle: mean of |x-y|^(alpha-n) over two independent
    // uniform points of the unit cube
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& [n, alpha] : {std::pair<int, double>{3, 2.0}, {2, 1.0}, {3, 1.5}}) {
        double sum = 0.0;
        const int trials = 4000000;
        for (int t = 0; t < trials; ++t) {
            double r2 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double d = uni(rng) - uni(rng);
                r2 += d * d;
            }
            sum += std::pow(r2, 0.5 * (alpha - n));
        }
        const double mc = sum / trials;
        CHECK(cell_self_energy_constant(n, alpha) == doctest::Approx(mc).epsilon(5e-3));
    }
}

TEST_CASE("diag rule scales as h^(alpha-n)") {
    const KernelSpec spec = exact_kernel(1.5, 3);
    const double d1 = diag_rule(spec, 0.1), d2 = diag_rule(spec, 0.05);
    // halving h multiplies the diagonal by 2^(n-alpha)
    CHECK(d1 * std::pow(2.0, 3.0 - 1.5) == doctest::Approx(d2).epsilon(1e-12));
}

TEST_CASE("calibration interpolation is continuous between table nodes") {
    const double a = cell_self_energy_constant(3, 1.5);
    const double b = cell_self_energy_constant(3, 1.75);
    const double mid = cell_self_energy_constant(3, 1.625);
    CHECK(mid == doctest::Approx(0.5 * (a + b)).epsilon(1e-12));
    CHECK_THROWS_AS(cell_self_energy_constant(3, 0.01), mode_misuse_error);
    CHECK_THROWS_AS(cell_self_energy_constant(7, 2.0), mode_misuse_error);
}

TEST_CASE("regularized self matrix is positive definite") {
    const PointCloud cloud = generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, 5);
    const KernelMatrix K = assemble_matrix(cloud, regularized_kernel(1.5, 3, 0.05));
    CHECK(K.self);
    CHECK((K.entries - K.entries.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    Eigen::LLT<Eigen::MatrixXd> llt(K.entries);
    CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("exact self matrix puts the diag rule on the diagonal") {
    const PointCloud cloud = generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, 4);
    const KernelSpec spec = exact_kernel(2.0, 3);
    const KernelMatrix K = assemble_matrix(cloud, spec);
    const double d = diag_rule(spec, cloud.cell_size);
    for (Eigen::Index i = 0; i < cloud.size(); ++i)
        CHECK(K.entries(i, i) == doctest::Approx(d).epsilon(1e-14));
}

TEST_CASE("weighted bilinear forms match a naive double loop") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.1, 1.0);
    const PointCloud a = generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, 4);
    const PointCloud b = generate_ball_cloud(Eigen::Vector3d(3, 0, 0), 1.0, 3, 4);
    Eigen::VectorXd wa(a.size()), wb(b.size()), w2(a.size());
    for (Eigen::Index i = 0; i < wa.size(); ++i) wa[i] = uni(rng);
    for (Eigen::Index i = 0; i < w2.size(); ++i) w2[i] = uni(rng);
    for (Eigen::Index i = 0; i < wb.size(); ++i) wb[i] = uni(rng);

    for (const KernelSpec spec :
         {exact_kernel(1.5, 3), regularized_kernel(1.5, 3, 0.1)}) {
        double cross = 0.0;
        for (Eigen::Index i = 0; i < a.size(); ++i)
            for (Eigen::Index j = 0; j < b.size(); ++j)
                cross += wa[i] * wb[j] *
                         kernel_value(a.points.row(i).transpose(), b.points.row(j).transpose(),
                                      spec);
        CHECK(weighted_cross_energy(a.points, wa, b.points, wb, spec) ==
              doctest::Approx(cross).epsilon(1e-12));

        double self = 0.0;
        const Eigen::VectorXd cells = Eigen::VectorXd::Constant(a.size(), a.cell_size);
        for (Eigen::Index i = 0; i < a.size(); ++i)
            for (Eigen::Index j = 0; j < a.size(); ++j)
                self += wa[i] * w2[j] *
                        (i == j && spec.exact()
                             ? diag_rule(spec, a.cell_size)
                             : kernel_value(a.points.row(i).transpose(),
                                            a.points.row(j).transpose(), spec));
        CHECK(weighted_bilinear_self(a.points, wa, w2, cells, spec) ==
              doctest::Approx(self).epsilon(1e-12));
    }
}
