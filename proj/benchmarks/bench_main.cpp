#include <benchmark/benchmark.h>

#include <riesz/kernel.hpp>
#include <riesz/parallel.hpp>
#include <riesz/solver.hpp>

using namespace riesz;

namespace {

PointCloud ball(int resolution) {
    return generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, resolution, "b");
}

void bm_assemble_self(benchmark::State& state) {
    const PointCloud cloud = ball(static_cast<int>(state.range(0)));
    const KernelSpec spec = regularized_kernel(1.5, 3, cloud.cell_size / 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_matrix(cloud, spec).entries.data());
    }
    state.SetComplexityN(cloud.size());
}
BENCHMARK(bm_assemble_self)->Arg(8)->Arg(12)->Arg(16)->Complexity(benchmark::oNSquared);

void bm_assemble_threads(benchmark::State& state) {
    const PointCloud cloud = ball(14);
    const KernelSpec spec = regularized_kernel(1.5, 3, cloud.cell_size / 2);
    set_thread_count(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_matrix(cloud, spec).entries.data());
    }
    set_thread_count(1);
}
BENCHMARK(bm_assemble_threads)->Arg(1)->Arg(2)->Arg(4);

void bm_knapsack_projection(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
    const Eigen::VectorXd g = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd sigma = Eigen::VectorXd::Constant(n, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(project_knapsack(w, g, 1.0, sigma));
    }
}
BENCHMARK(bm_knapsack_projection)->Arg(1000)->Arg(10000);

void bm_solve_touching(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    const Point pole = Eigen::Vector3d(1, 0, 0);
    const double h = 2.0 / L;
    PointCloud p1 =
        exclude_near(generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, L, "pos"), pole, h);
    PointCloud p2 =
        exclude_near(generate_ball_cloud(Eigen::Vector3d(2, 0, 0), 1.0, 3, L, "neg"), pole, h);
    auto geom = std::make_shared<CondenserGeometry>(make_condenser(p1, p2, pole));
    ProblemData pd;
    pd.geometry = geom;
    pd.kernel = regularized_kernel(1.5, 3, geom->cell_size() / 2);
    pd.g_pos = Eigen::VectorXd::Ones(geom->plate_pos.size());
    pd.g_neg = Eigen::VectorXd::Ones(geom->plate_neg.size());
    pd.sigma_pos = 3.0 / geom->plate_pos.total_weight() * geom->plate_pos.cell_weights;
    pd.sigma_neg = 3.0 / geom->plate_neg.total_weight() * geom->plate_neg.cell_weights;
    pd.field = ExternalField::zero(*geom);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_constrained(pd, SolveOptions{}).objective);
    }
}
BENCHMARK(bm_solve_touching)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
