// End-to-end acceptance suite. Each numbered check prints a single
// PASS/FAIL line; the process exits nonzero if any check fails.

#include <riesz/kelvin.hpp>
#include <riesz/measure.hpp>
#include <riesz/solver.hpp>

#include "support/qp_oracle.hpp"
#include "support/test_problems.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace riesz;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("criterion %2d (%s): %s%s%s\n", id, name, pass ? "PASS" : "FAIL",
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// 1. vector energy of pairs equals the signed energy of the R-map images
void criterion_rmap() {
    auto geom = testsup::touching_balls(8);
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (const KernelSpec spec :
         {exact_kernel(1.5, 3), regularized_kernel(1.5, 3, geom->cell_size() / 2)}) {
        for (int t = 0; t < 100; ++t) {
            const VectorMeasure a = testsup::random_measure(rng, geom);
            const VectorMeasure b = testsup::random_measure(rng, geom);
            const double block = vector_energy(a, b, spec);
            const double via_r = mutual_energy(r_map(a), r_map(b), spec);
            worst = std::max(worst, rel_diff(block, via_r));
        }
    }
    report(1, "R-map energy equality", worst <= 1e-12, "max rel dev " + fmt(worst));
}

// 2. condenser metric equals the signed energy norm of the difference
void criterion_isometry() {
    auto geom = testsup::touching_balls(8);
    const KernelSpec spec = regularized_kernel(1.5, 3, geom->cell_size() / 2);
    std::mt19937_64 rng(102);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const VectorMeasure a = testsup::random_measure(rng, geom);
        const VectorMeasure b = testsup::random_measure(rng, geom);
        SignedMeasure d = r_map(a);
        d.weights -= r_map(b).weights;
        const double norm = std::sqrt(std::max(0.0, energy(d, spec)));
        worst = std::max(worst, rel_diff(condenser_metric(a, b, spec), norm));
    }
    report(2, "metric isometry", worst <= 1e-10, "max rel dev " + fmt(worst));
}

// 3. G(nu) = |R nu + zeta|^2 - |zeta|^2 and G >= -|zeta|^2
void criterion_case2() {
    auto geom = testsup::touching_balls(7);
    const KernelSpec spec = regularized_kernel(1.8, 3, geom->cell_size() / 2);
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    bool bound_ok = true;
    for (int t = 0; t < 100; ++t) {
        Eigen::MatrixXd zpts(20, 3);
        Eigen::VectorXd zw(20);
        for (int i = 0; i < 20; ++i) {
            zpts.row(i) << 4.0 + uni(rng), uni(rng), uni(rng);
            zw[i] = uni(rng);
        }
        const SignedMeasure zeta = make_point_atoms(zpts, zw);
        ProblemData pd;
        pd.geometry = geom;
        pd.kernel = spec;
        pd.field = field_from_zeta(zeta, *geom, spec);
        const double z2 = energy(zeta, spec);

        const VectorMeasure nu = testsup::random_measure(rng, geom);
        const double G = gauss_functional(nu, pd);
        const SignedMeasure rnu = r_map(nu);
        const double cross =
            weighted_cross_energy(rnu.points, rnu.weights, zeta.points, zeta.weights, spec);
        const double sum_norm2 = energy(rnu, spec) + 2.0 * cross + z2;
        worst = std::max(worst, rel_diff(G, sum_norm2 - z2));
        if (G < -z2 - 1e-10 * std::max(1.0, std::abs(z2))) bound_ok = false;
    }
    report(3, "Case II identity and bound", worst <= 1e-10 && bound_ok,
           "max rel dev " + fmt(worst));
}

// 4. |R nu - R mu|^2 = 2 G(nu) + 2 G(mu) - 4 G((nu+mu)/2): external fields
// cancel in this combination
void criterion_parallelogram() {
    auto geom = testsup::touching_balls(7);
    std::mt19937_64 rng(104);
    ProblemData pd;
    pd.geometry = geom;
    pd.kernel = regularized_kernel(1.5, 3, geom->cell_size() / 2);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        pd.field.kind = FieldCase::CaseI;
        pd.field.pos_values = testsup::random_weights(rng, geom->plate_pos.size(), -1.0, 1.0);
        pd.field.neg_values = testsup::random_weights(rng, geom->plate_neg.size(), -1.0, 1.0);
        const VectorMeasure a = testsup::random_measure(rng, geom);
        const VectorMeasure b = testsup::random_measure(rng, geom);
        VectorMeasure mid = a;
        mid.pos_weights = 0.5 * (a.pos_weights + b.pos_weights);
        mid.neg_weights = 0.5 * (a.neg_weights + b.neg_weights);
        SignedMeasure d = r_map(a);
        d.weights -= r_map(b).weights;
        const double lhs = energy(d, pd.kernel);
        const double rhs = 2.0 * gauss_functional(a, pd) + 2.0 * gauss_functional(b, pd) -
                           4.0 * gauss_functional(mid, pd);
        worst = std::max(worst, rel_diff(lhs, rhs));
    }
    report(4, "parallelogram identity", worst <= 1e-10, "max rel dev " + fmt(worst));
}

// 5. inversion identity suite in exact mode
void criterion_kelvin() {
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.1, 1.0);
    const InversionSpec inv{Eigen::Vector3d(0, 0, 0)};
    double worst = 0.0;

    auto atoms = [&](const Point& center, int count) {
        Eigen::MatrixXd pts(count, 3);
        Eigen::VectorXd w(count);
        for (int i = 0; i < count; ++i) {
            pts.row(i) =
                (center + 0.5 * Point(Eigen::Vector3d(uni(rng), uni(rng), uni(rng)))).transpose();
            w[i] = pos(rng);
        }
        auto cloud = std::make_shared<PointCloud>();
        cloud->points = pts;
        cloud->cell_weights = Eigen::VectorXd::Ones(count);
        cloud->cell_size = 0.1;
        return DiscreteMeasure{cloud, w};
    };

    for (int t = 0; t < 200; ++t) {
        const double alpha = 0.6 + 1.8 * pos(rng);
        const KernelSpec spec = exact_kernel(alpha, 3);
        const int count = 5 + static_cast<int>(240.0 * pos(rng));
        const DiscreteMeasure mu = atoms(Eigen::Vector3d(2.2, 0, 0), count);
        const DiscreteMeasure nu = atoms(Eigen::Vector3d(-2.2, 0.8, 0), count);

        const Point x = Eigen::Vector3d(uni(rng), 2.2 + uni(rng), uni(rng));
        worst = std::max(worst, (invert_point(invert_point(x, inv), inv) - x).norm() /
                                    (1.0 + x.norm()));
        const Point y = Eigen::Vector3d(uni(rng), -2.2 - uni(rng), uni(rng));
        worst = std::max(worst, check_distance_identity(x, y, inv));
        worst = std::max(worst, check_potential_transform(mu, x, inv, spec));
        worst = std::max(worst, check_energy_preservation(mu, nu, inv, spec));
    }

    // metric transport on the touching geometry
    auto geom = testsup::touching_balls(7);
    const TransformedCondenser tc =
        transform_condenser(*geom, InversionSpec{testsup::touch_pole()});
    const KernelSpec spec = exact_kernel(1.5, 3);
    for (int t = 0; t < 200; ++t) {
        const VectorMeasure a = testsup::random_measure(rng, geom);
        const VectorMeasure b = testsup::random_measure(rng, geom);
        worst = std::max(worst, check_metric_preservation(a, b, tc, spec));
    }
    report(5, "Kelvin identity suite", worst <= 1e-10, "max residual " + fmt(worst));
}

// 6. oracle agreement, KKT certificates, and cross-algorithm agreement
void criterion_solver() {
    std::mt19937_64 rng(106);
    double worst_oracle = 0.0, worst_kkt = 0.0, worst_cross = 0.0;
    bool ok = true;
    for (int t = 0; t < 20; ++t) {
        ProblemData pd = testsup::random_problem(rng, 4, 1.2 + 0.3 * (t % 4), t % 2 == 0,
                                                 t % 3 != 0);
        const auto qp = testsup::to_box_qp(pd);
        const auto ref = oracle::active_set_solve(qp, testsup::feasible_start(pd));
        if (!ref.optimal) {
            ok = false;
            continue;
        }
        SolveOptions opts;
        const SolveResult pg = solve_constrained(pd, opts);
        worst_oracle = std::max(worst_oracle, rel_diff(pg.objective, ref.objective));
        worst_kkt = std::max(worst_kkt, pg.kkt_residual);
        if (pg.status != SolveStatus::Optimal) ok = false;

        opts.algorithm = Algorithm::FrankWolfe;
        const SolveResult fw = solve_constrained(pd, opts);
        worst_cross = std::max(worst_cross, rel_diff(fw.objective, pg.objective));
    }
    const bool pass = ok && worst_oracle <= 1e-7 && worst_kkt <= 1e-8 && worst_cross <= 1e-6;
    report(6, "solver vs oracle and cross-algorithm", pass,
           "oracle " + fmt(worst_oracle) + ", kkt " + fmt(worst_kkt) + ", pg/fw " +
               fmt(worst_cross));
}

// 7. uniqueness under random restarts
void criterion_uniqueness() {
    std::mt19937_64 rng(107);
    double worst = 0.0;
    bool ok = true;
    for (int t = 0; t < 10; ++t) {
        ProblemData pd = testsup::random_problem(rng, 4, 1.4 + 0.2 * (t % 3), t % 2 == 0,
                                                 true);
        SolveOptions opts;
        opts.random_start = true;
        Eigen::VectorXd first;
        for (int s = 0; s < 3; ++s) {
            opts.seed = static_cast<std::uint64_t>(1000 * t + s);
            const SolveResult r = solve_constrained(pd, opts);
            if (r.status != SolveStatus::Optimal) ok = false;
            Eigen::VectorXd w(pd.geometry->plate_pos.size() + pd.geometry->plate_neg.size());
            w.head(pd.geometry->plate_pos.size()) = r.weights.pos_weights;
            w.tail(pd.geometry->plate_neg.size()) = r.weights.neg_weights;
            if (s == 0)
                first = w;
            else
                worst = std::max(worst, (w - first).lpNorm<Eigen::Infinity>() /
                                            std::max(pd.a[0], pd.a[1]));
        }
    }
    report(7, "uniqueness under restarts", ok && worst <= 1e-6, "max dev " + fmt(worst));
}

// 8. trace iterates satisfy the parallelogram-derived Cauchy bound against
// the certified optimum
void criterion_cauchy() {
    std::mt19937_64 rng(108);
    bool ok = true;
    double worst_slack = 0.0;
    for (int t = 0; t < 3; ++t) {
        ProblemData pd = testsup::random_problem(rng, 4, 1.5, true, true);
        SolveOptions opts;
        opts.trace_stride = 5;
        const SolveResult r = solve_constrained(pd, opts);
        if (r.status != SolveStatus::Optimal) {
            ok = false;
            continue;
        }
        const double gstar = r.objective;
        auto to_measure = [&](const Eigen::VectorXd& w) {
            VectorMeasure nu = zero_measure(pd.geometry);
            nu.pos_weights = w.head(pd.geometry->plate_pos.size());
            nu.neg_weights = w.tail(pd.geometry->plate_neg.size());
            return nu;
        };
        for (std::size_t k = 0; k < r.trace_weights.size(); ++k) {
            for (std::size_t m = k; m < r.trace_weights.size(); ++m) {
                const VectorMeasure nk = to_measure(r.trace_weights[k]);
                const VectorMeasure nm = to_measure(r.trace_weights[m]);
                SignedMeasure d = r_map(nk);
                d.weights -= r_map(nm).weights;
                const double lhs = energy(d, pd.kernel);
                const double rhs = 2.0 * gauss_functional(nk, pd) +
                                   2.0 * gauss_functional(nm, pd) - 4.0 * gstar;
                if (lhs < -1e-8) ok = false;
                const double slack = lhs - rhs;
                worst_slack = std::max(worst_slack, slack);
                if (slack > 1e-8 * std::max(1.0, std::abs(rhs))) ok = false;
            }
        }
    }
    report(8, "Cauchy trace bound", ok, "max slack " + fmt(worst_slack));
}

// 9. Newtonian capacity of the unit ball
void criterion_capacity() {
    const PointCloud ball = generate_ball_cloud(Eigen::Vector3d(0, 0, 0), 1.0, 3, 16, "ball");
    const CapacityResult cap = capacity_estimate(ball, exact_kernel(2.0, 3), SolveOptions{});
    const bool pass = ball.size() >= 2000 && std::abs(cap.estimate - 1.0) <= 0.05;
    report(9, "unit-ball capacity", pass,
           "estimate " + fmt(cap.estimate) + " at N=" + std::to_string(ball.size()));
}

// 10. short-circuit phenomenon on touching balls
void criterion_probe() {
    SolveOptions opts;
    const ProbeReport un = short_circuit_probe({7, 9, 11}, 2.0, false, opts);
    bool strict = true;
    for (std::size_t k = 1; k < un.levels.size(); ++k)
        if (!(un.levels[k].objective < un.levels[k - 1].objective)) strict = false;
    const bool un_ok = strict && un.near_mass_monotone;

    const ProbeReport con = short_circuit_probe({7, 9, 11}, 2.0, true, opts);
    const bool con_ok = con.differences_decreasing && con.upper_active_near_pole;
    report(10, "short-circuit probe", un_ok && con_ok,
           std::string("unconstrained ") + (un_ok ? "ok" : "violated") + ", constrained " +
               (con_ok ? "ok" : "violated"));
}

// 11. CLI determinism across thread counts
void criterion_cli_determinism() {
#ifndef RIESZ_CLI_PATH
    report(11, "CLI determinism", false, "binary path not configured");
#else
    const fs::path dir = fs::temp_directory_path() / "riesz_acceptance";
    fs::create_directories(dir);
    const fs::path cfg = dir / "ex.json";
    std::ofstream(cfg) << R"({
  "schema_version": 1,
  "dimension": 3,
  "alpha": 1.5,
  "kernel": {"mode": "regularized"},
  "plates": [
    {"generator": "ball", "center": [0, 0, 0], "radius": 1.0, "resolution": 10,
     "exclude": {"center": [1, 0, 0], "radius": 0.2}},
    {"generator": "ball", "center": [2, 0, 0], "radius": 1.0, "resolution": 10,
     "exclude": {"center": [1, 0, 0], "radius": 0.2}}
  ],
  "touch_point": [1, 0, 0],
  "g": {"kind": "constant", "values": [1.0, 1.0]},
  "a": [1.0, 1.0],
  "sigma": {"kind": "lebesgue_multiple", "values": [2.0, 2.0]},
  "field": {"kind": "zero"}
})";
    auto run = [&](int threads, const fs::path& out) {
        const std::string cmd = std::string(RIESZ_CLI_PATH) + " solve --config " +
                                cfg.string() + " --seed 7 --threads " +
                                std::to_string(threads) + " --out " + out.string() +
                                " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    const int rc1 = run(1, dir / "t1");
    const int rc2 = run(4, dir / "t4");
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string w1 = slurp(dir / "t1" / "weights.csv");
    const std::string w2 = slurp(dir / "t4" / "weights.csv");
    const bool pass = rc1 == 0 && rc2 == 0 && !w1.empty() && w1 == w2;
    report(11, "CLI determinism", pass,
           "exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2) +
               (w1 == w2 ? ", identical bytes" : ", outputs differ"));
#endif
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_rmap();
    criterion_isometry();
    criterion_case2();
    criterion_parallelogram();
    criterion_kelvin();
    criterion_solver();
    criterion_uniqueness();
    criterion_cauchy();
    criterion_capacity();
    criterion_probe();
    criterion_cli_determinism();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 11 criteria passed in %.1f s\n", 11 - g_failures, secs);
    return g_failures == 0 ? 0 : 1;
}
