// Configuration-driven front end for the condenser solver.
//
// Subcommands: solve | validate | kelvin-check | capacity | probe.
// Config is JSON with a versioned schema; all floating-point output uses
// 17 significant digits so values round-trip exactly.

#include <CLI11.hpp>
#include <json.hpp>

#include <riesz/kelvin.hpp>
#include <riesz/measure.hpp>
#include <riesz/parallel.hpp>
#include <riesz/solver.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// nlohmann::json keeps object keys sorted, so dump() is already a canonical
// form; key order in the input file cannot change the hash.
std::uint64_t config_hash(const json& j) {
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw riesz::parse_error("config: cannot open " + path);
    try {
        return json::parse(in, nullptr, true, true); // allow // comments
    } catch (const json::parse_error& e) {
        throw riesz::parse_error("config: " + path + ": " + e.what());
    }
}

template <typename T>
T require(const json& j, const std::string& key) {
    if (!j.contains(key)) throw riesz::parse_error("config: missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw riesz::parse_error("config: field '" + key + "': " + e.what());
    }
}

riesz::Point to_point(const json& arr, int dimension, const std::string& key) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != dimension)
        throw riesz::parse_error("config: '" + key + "' must be an array of length " +
                                 std::to_string(dimension));
    riesz::Point p(dimension);
    for (int k = 0; k < dimension; ++k) p[k] = arr[static_cast<std::size_t>(k)].get<double>();
    return p;
}

struct LoadedConfig {
    json raw;
    std::uint64_t hash = 0;
    fs::path base_dir; // relative file references resolve against the config
};

LoadedConfig load_config(const std::string& path) {
    LoadedConfig cfg;
    cfg.raw = load_json(path);
    const int ver = require<int>(cfg.raw, "schema_version");
    if (ver != kSchemaVersion)
        throw riesz::parse_error("config: unsupported schema_version " + std::to_string(ver));
    cfg.hash = config_hash(cfg.raw);
    cfg.base_dir = fs::absolute(path).parent_path();
    return cfg;
}

std::string resolve(const LoadedConfig& cfg, const std::string& p) {
    fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (cfg.base_dir / fp).string();
}

riesz::PointCloud load_plate(const LoadedConfig& cfg, const json& pj, int dimension,
                             const std::string& label) {
    const std::string gen = require<std::string>(pj, "generator");
    riesz::PointCloud cloud;
    if (gen == "ball") {
        cloud = riesz::generate_ball_cloud(to_point(require<json>(pj, "center"), dimension, "center"),
                                           require<double>(pj, "radius"), dimension,
                                           require<int>(pj, "resolution"), label);
    } else if (gen == "csv") {
        cloud = riesz::load_cloud_csv(resolve(cfg, require<std::string>(pj, "path")));
        cloud.label = label;
        if (cloud.dimension() != dimension)
            throw riesz::parse_error("config: plate csv dimension mismatch");
    } else {
        throw riesz::parse_error("config: unknown plate generator '" + gen + "'");
    }
    if (pj.contains("exclude")) {
        const json& ej = pj.at("exclude");
        const riesz::Point c = to_point(require<json>(ej, "center"), dimension, "exclude.center");
        const double r = ej.value("radius", cloud.cell_size);
        cloud = riesz::exclude_near(cloud, c, r);
    }
    return cloud;
}

struct BuiltProblem {
    std::shared_ptr<riesz::CondenserGeometry> geometry;
    riesz::ProblemData data;
    riesz::SolveOptions opts;
};

BuiltProblem build_problem(const LoadedConfig& cfg) {
    const json& j = cfg.raw;
    const int dimension = require<int>(j, "dimension");
    const double alpha = require<double>(j, "alpha");

    const json& plates = require<json>(j, "plates");
    if (!plates.is_array() || plates.size() != 2)
        throw riesz::parse_error("config: 'plates' must list exactly two plates");
    riesz::PointCloud p1 = load_plate(cfg, plates[0], dimension, "pos");
    riesz::PointCloud p2 = load_plate(cfg, plates[1], dimension, "neg");

    std::optional<riesz::Point> touch;
    if (j.contains("touch_point"))
        touch = to_point(j.at("touch_point"), dimension, "touch_point");

    BuiltProblem out;
    out.geometry = std::make_shared<riesz::CondenserGeometry>(
        riesz::make_condenser(std::move(p1), std::move(p2), touch));
    const riesz::PointCloud& pos = out.geometry->plate_pos;
    const riesz::PointCloud& neg = out.geometry->plate_neg;

    const json& kj = require<json>(j, "kernel");
    const std::string mode = require<std::string>(kj, "mode");
    if (mode == "exact") {
        out.data.kernel = riesz::exact_kernel(alpha, dimension);
    } else if (mode == "regularized") {
        const double eps = kj.value("eps", out.geometry->cell_size() / 2.0);
        out.data.kernel = riesz::regularized_kernel(alpha, dimension, eps);
    } else {
        throw riesz::parse_error("config: kernel.mode must be 'exact' or 'regularized'");
    }
    out.data.kernel.check();
    out.data.geometry = out.geometry;

    const json& gj = require<json>(j, "g");
    const std::string gkind = require<std::string>(gj, "kind");
    if (gkind == "constant") {
        const auto vals = require<std::vector<double>>(gj, "values");
        if (vals.size() != 2) throw riesz::parse_error("config: g.values needs two entries");
        out.data.g_pos = Eigen::VectorXd::Constant(pos.size(), vals[0]);
        out.data.g_neg = Eigen::VectorXd::Constant(neg.size(), vals[1]);
    } else if (gkind == "csv") {
        const auto paths = require<std::vector<std::string>>(gj, "paths");
        if (paths.size() != 2) throw riesz::parse_error("config: g.paths needs two entries");
        out.data.g_pos = riesz::load_weights_csv(resolve(cfg, paths[0]), pos.size(), 0);
        out.data.g_neg = riesz::load_weights_csv(resolve(cfg, paths[1]), 0, neg.size());
    } else {
        throw riesz::parse_error("config: g.kind must be 'constant' or 'csv'");
    }

    const auto a = require<std::vector<double>>(j, "a");
    if (a.size() != 2) throw riesz::parse_error("config: 'a' needs two entries");
    out.data.a = {a[0], a[1]};

    const json& sj = require<json>(j, "sigma");
    const std::string skind = require<std::string>(sj, "kind");
    if (skind == "unconstrained") {
        out.data.sigma_pos = Eigen::VectorXd::Constant(pos.size(), kInf);
        out.data.sigma_neg = Eigen::VectorXd::Constant(neg.size(), kInf);
    } else if (skind == "lebesgue_multiple") {
        // sigma^i = c_i * (Lebesgue restricted to the plate): per-point bound
        // c_i * cell weight
        const auto c = require<std::vector<double>>(sj, "values");
        if (c.size() != 2) throw riesz::parse_error("config: sigma.values needs two entries");
        out.data.sigma_pos = c[0] * pos.cell_weights;
        out.data.sigma_neg = c[1] * neg.cell_weights;
    } else if (skind == "csv") {
        const auto paths = require<std::vector<std::string>>(sj, "paths");
        if (paths.size() != 2) throw riesz::parse_error("config: sigma.paths needs two entries");
        out.data.sigma_pos = riesz::load_weights_csv(resolve(cfg, paths[0]), pos.size(), 0);
        out.data.sigma_neg = riesz::load_weights_csv(resolve(cfg, paths[1]), 0, neg.size());
    } else {
        throw riesz::parse_error("config: unknown sigma.kind '" + skind + "'");
    }

    if (j.contains("field")) {
        const json& fj = j.at("field");
        const std::string fkind = require<std::string>(fj, "kind");
        if (fkind == "zero") {
            out.data.field = riesz::ExternalField::zero(*out.geometry);
        } else if (fkind == "case1_csv") {
            const auto paths = require<std::vector<std::string>>(fj, "paths");
            if (paths.size() != 2)
                throw riesz::parse_error("config: field.paths needs two entries");
            out.data.field.kind = riesz::FieldCase::CaseI;
            out.data.field.pos_values =
                riesz::load_weights_csv(resolve(cfg, paths[0]), pos.size(), 0);
            out.data.field.neg_values =
                riesz::load_weights_csv(resolve(cfg, paths[1]), 0, neg.size());
        } else if (fkind == "case2_zeta") {
            const json& atoms = require<json>(fj, "atoms");
            Eigen::MatrixXd pts(atoms.size(), dimension);
            Eigen::VectorXd w(atoms.size());
            for (std::size_t t = 0; t < atoms.size(); ++t) {
                pts.row(static_cast<Eigen::Index>(t)) =
                    to_point(require<json>(atoms[t], "point"), dimension, "atoms.point")
                        .transpose();
                w[static_cast<Eigen::Index>(t)] = require<double>(atoms[t], "weight");
            }
            out.data.field = riesz::field_from_zeta(riesz::make_point_atoms(pts, w),
                                                    *out.geometry, out.data.kernel);
        } else {
            throw riesz::parse_error("config: unknown field.kind '" + fkind + "'");
        }
    } else {
        out.data.field = riesz::ExternalField::zero(*out.geometry);
    }

    if (j.contains("solver")) {
        const json& oj = j.at("solver");
        const std::string alg = oj.value("algorithm", std::string("pg"));
        if (alg == "pg")
            out.opts.algorithm = riesz::Algorithm::ProjectedGradient;
        else if (alg == "fw")
            out.opts.algorithm = riesz::Algorithm::FrankWolfe;
        else
            throw riesz::parse_error("config: solver.algorithm must be 'pg' or 'fw'");
        out.opts.max_iter = oj.value("max_iter", out.opts.max_iter);
        out.opts.tol_kkt = oj.value("tol_kkt", out.opts.tol_kkt);
        out.opts.seed = oj.value("seed", out.opts.seed);
        out.opts.random_start = oj.value("random_start", out.opts.random_start);
        out.opts.trace_stride = oj.value("trace_stride", out.opts.trace_stride);
    }
    return out;
}

const char* status_name(riesz::SolveStatus s) {
    switch (s) {
        case riesz::SolveStatus::Optimal: return "optimal";
        case riesz::SolveStatus::IterationLimit: return "iteration_limit";
        default: return "infeasible";
    }
}

void write_trace_csv(const std::vector<riesz::TracePoint>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw riesz::parse_error("trace: cannot open " + path);
    out << "iteration,objective,kkt_residual\n";
    for (const auto& t : trace)
        out << t.iteration << ',' << fmt17(t.objective) << ',' << fmt17(t.kkt_residual) << '\n';
}

int cmd_solve(const LoadedConfig& cfg, const fs::path& out_dir,
              std::optional<std::uint64_t> seed_override) {
    BuiltProblem bp = build_problem(cfg);
    if (seed_override) {
        bp.opts.seed = *seed_override;
        bp.opts.random_start = true;
    }
    fs::create_directories(out_dir);

    const auto t0 = std::chrono::steady_clock::now();
    riesz::SolveResult res = riesz::solve_constrained(bp.data, bp.opts);
    const auto t1 = std::chrono::steady_clock::now();
    const double solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    const fs::path weights_path = out_dir / "weights.csv";
    const fs::path trace_path = out_dir / "trace.csv";
    riesz::save_weights_csv(res.weights, weights_path.string());
    write_trace_csv(res.trace, trace_path.string());

    const riesz::ValidationReport geo = riesz::validate_condenser(*bp.geometry);
    const riesz::FeasibilityReport feas = riesz::check_feasible(res.weights, bp.data);

    json env;
    env["config_hash"] = cfg.hash;
    env["schema_version"] = kSchemaVersion;
    env["validation"] = {{"disjoint", geo.disjoint},
                         {"min_separation", geo.min_separation},
                         {"touch_declared", geo.touch_declared},
                         {"touch_realized", geo.touch_realized},
                         {"standard_condenser", geo.standard_condenser},
                         {"ok", geo.ok}};
    env["result"] = {{"status", status_name(res.status)},
                     {"objective", res.objective},
                     {"kkt_residual", res.kkt_residual},
                     {"iterations", res.iterations},
                     {"multipliers", {res.multipliers[0], res.multipliers[1]}},
                     {"active_lower_count", res.active_lower.size()},
                     {"active_upper_count", res.active_upper.size()},
                     {"feasible", feas.feasible},
                     {"mass_residual", {feas.mass_residual[0], feas.mass_residual[1]}}};
    env["weights_csv"] = weights_path.string();
    env["trace_csv"] = trace_path.string();
    env["timings_ms"] = {{"solve", solve_ms}};

    std::ofstream out(out_dir / "result.json");
    out << env.dump(2) << '\n';
    std::cout << "status " << status_name(res.status) << " objective "
              << fmt17(res.objective) << " kkt " << fmt17(res.kkt_residual) << '\n';

    switch (res.status) {
        case riesz::SolveStatus::Optimal: return 0;
        case riesz::SolveStatus::IterationLimit: return 2;
        default: return 3;
    }
}

int cmd_validate(const LoadedConfig& cfg) {
    BuiltProblem bp = build_problem(cfg);
    const riesz::ValidationReport geo = riesz::validate_condenser(*bp.geometry);
    const riesz::ProblemValidationReport rep = riesz::validate_problem(bp.data);

    std::cout << "condenser: disjoint=" << geo.disjoint
              << " min_separation=" << fmt17(geo.min_separation)
              << " touch_declared=" << geo.touch_declared
              << " touch_realized=" << geo.touch_realized
              << " standard=" << geo.standard_condenser << " ok=" << geo.ok << '\n';
    if (!geo.detail.empty()) std::cout << "condenser detail: " << geo.detail << '\n';
    std::cout << "touch_ok=" << rep.touch_ok << '\n'
              << "field_finite_ok=" << rep.field_finite_ok << " flagged_points="
              << rep.infinite_field_points.size() << '\n'
              << "sigma_energy=" << fmt17(rep.sigma_energy)
              << " finite=" << rep.sigma_energy_finite << '\n'
              << "sigma_mass=(" << fmt17(rep.sigma_mass[0]) << ", " << fmt17(rep.sigma_mass[1])
              << ") margin_ok=" << rep.mass_margin_ok << '\n'
              << "all_ok=" << rep.all_ok << '\n';
    return rep.all_ok && geo.ok ? 0 : 3;
}

int cmd_kelvin_check(const LoadedConfig& cfg, std::uint64_t seed, int count) {
    BuiltProblem bp = build_problem(cfg);
    if (!bp.data.kernel.exact())
        throw riesz::mode_misuse_error(
            "kelvin-check: identities hold for the exact kernel only; regularized "
            "mode was requested");
    if (!bp.geometry->touch_point)
        throw riesz::invalid_condenser_error("kelvin-check: config declares no touch point");

    const riesz::InversionSpec inv{*bp.geometry->touch_point};
    const riesz::TransformedCondenser tc = riesz::transform_condenser(*bp.geometry, inv);
    const riesz::KernelSpec& spec = bp.data.kernel;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto& pos = bp.geometry->plate_pos;
    const auto& neg = bp.geometry->plate_neg;
    auto random_point = [&](const riesz::PointCloud& c) {
        return riesz::Point(
            c.points.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(c.size())))
                .transpose());
    };
    auto random_measure = [&](const riesz::PointCloud& c) {
        Eigen::VectorXd w(c.size());
        for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = uni(rng);
        return riesz::DiscreteMeasure{std::make_shared<riesz::PointCloud>(c), w};
    };

    double r_dist = 0, r_pot = 0, r_energy = 0, r_invol = 0, r_isom = 0;
    for (int t = 0; t < count; ++t) {
        const riesz::Point x = random_point(pos), y = random_point(neg);
        r_dist = std::max(r_dist, riesz::check_distance_identity(x, y, inv));
        const riesz::Point xx = riesz::invert_point(riesz::invert_point(x, inv), inv);
        r_invol = std::max(r_invol, (xx - x).norm() / std::max(1.0, x.norm()));

        const riesz::DiscreteMeasure mu = random_measure(pos);
        const riesz::DiscreteMeasure nu = random_measure(neg);
        r_pot = std::max(r_pot, riesz::check_potential_transform(mu, y, inv, spec));
        r_energy = std::max(r_energy, riesz::check_energy_preservation(mu, nu, inv, spec));

        riesz::VectorMeasure v1{bp.geometry, mu.weights, nu.weights};
        riesz::VectorMeasure v2{bp.geometry, random_measure(pos).weights,
                                random_measure(neg).weights};
        r_isom = std::max(r_isom, riesz::check_metric_preservation(v1, v2, tc, spec));
    }

    std::cout << "distance  max residual " << fmt17(r_dist) << '\n'
              << "involution max residual " << fmt17(r_invol) << '\n'
              << "potential max residual " << fmt17(r_pot) << '\n'
              << "energy    max residual " << fmt17(r_energy) << '\n'
              << "isometry  max residual " << fmt17(r_isom) << '\n';
    const double worst = std::max({r_dist, r_invol, r_pot, r_energy, r_isom});
    return worst <= 1e-10 ? 0 : 3;
}

int cmd_capacity(const LoadedConfig& cfg) {
    BuiltProblem bp = build_problem(cfg);
    riesz::CapacityResult cap =
        riesz::capacity_estimate(bp.geometry->plate_pos, bp.data.kernel, bp.opts);
    std::cout << "capacity " << fmt17(cap.estimate) << " min_energy "
              << fmt17(cap.min_energy) << " points " << cap.equilibrium_weights.weights.size()
              << '\n';
    return 0;
}

int cmd_probe(const LoadedConfig& cfg, const std::vector<int>& level_override,
              const fs::path& out_dir) {
    const json& j = cfg.raw;
    const double alpha = require<double>(j, "alpha");
    std::vector<int> levels = level_override;
    bool constrained = false;
    double sigma_multiple = 3.0, rho = -1.0;
    riesz::SolveOptions opts;
    if (j.contains("probe")) {
        const json& pj = j.at("probe");
        if (levels.empty()) levels = pj.value("levels", std::vector<int>{});
        constrained = pj.value("constrained", false);
        sigma_multiple = pj.value("sigma_multiple", sigma_multiple);
        rho = pj.value("rho", rho);
        opts.max_iter = pj.value("max_iter", opts.max_iter);
        opts.tol_kkt = pj.value("tol_kkt", opts.tol_kkt);
    }
    if (levels.empty()) levels = {7, 9, 11};

    const riesz::ProbeReport rep =
        riesz::short_circuit_probe(levels, alpha, constrained, opts, sigma_multiple, rho);

    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "probe.csv");
    out << "level,objective,near_mass_pos,near_mass_neg,upper_active_count\n";
    for (const auto& l : rep.levels)
        out << l.level << ',' << fmt17(l.objective) << ','
            << fmt17(l.near_pole_mass_fraction[0]) << ',' << fmt17(l.near_pole_mass_fraction[1])
            << ',' << l.upper_active_count << '\n';

    std::cout << "rho " << fmt17(rep.rho) << '\n';
    for (const auto& l : rep.levels)
        std::cout << "level " << l.level << " objective " << fmt17(l.objective)
                  << " near_mass (" << fmt17(l.near_pole_mass_fraction[0]) << ", "
                  << fmt17(l.near_pole_mass_fraction[1]) << ") upper_active "
                  << l.upper_active_count << '\n';
    if (constrained)
        std::cout << "differences_decreasing=" << rep.differences_decreasing
                  << " upper_active_near_pole=" << rep.upper_active_near_pole << '\n';
    else
        std::cout << "objective_monotone=" << rep.objective_monotone
                  << " near_mass_monotone=" << rep.near_mass_monotone << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-plate condenser energy minimization"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0, count = 200;
    std::vector<int> levels;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config JSON path")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker thread count");
        sub->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
            seed_given = true;
        });
    };
    CLI::App* s_solve = app.add_subcommand("solve", "minimize the Gauss functional");
    CLI::App* s_validate = app.add_subcommand("validate", "check problem conditions");
    CLI::App* s_kelvin = app.add_subcommand("kelvin-check", "randomized inversion identities");
    CLI::App* s_capacity = app.add_subcommand("capacity", "single-plate capacity estimate");
    CLI::App* s_probe = app.add_subcommand("probe", "refinement study on touching balls");
    for (CLI::App* sub : {s_solve, s_validate, s_kelvin, s_capacity, s_probe}) add_common(sub);
    s_kelvin->add_option("--count", count, "trials per identity");
    s_probe->add_option("--levels", levels, "resolutions to probe")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (threads <= 0) {
        if (const char* env = std::getenv("RIESZ_THREADS")) threads = std::atoi(env);
    }
    if (threads > 0) riesz::set_thread_count(threads);

    try {
        const LoadedConfig cfg = load_config(config_path);
        if (s_solve->parsed())
            return cmd_solve(cfg, out_dir,
                             seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt);
        if (s_validate->parsed()) return cmd_validate(cfg);
        if (s_kelvin->parsed()) return cmd_kelvin_check(cfg, seed, count);
        if (s_capacity->parsed()) return cmd_capacity(cfg);
        if (s_probe->parsed()) return cmd_probe(cfg, levels, out_dir);
    } catch (const riesz::parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const riesz::infeasible_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const riesz::invalid_condenser_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const riesz::degenerate_plate_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const riesz::error& e) {
        // remaining library errors are configuration mistakes (bad alpha,
        // mode misuse, pole inside a cloud, dimension mismatch)
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
