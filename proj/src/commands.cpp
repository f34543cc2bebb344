#include "safekern/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

namespace safekern {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
}

bool kernel_empty(const KernelApprox& approx, Variant variant) {
    if (variant == Variant::InfiniteH) {
        return approx.invariance_records.empty();
    }
    return approx.empty();
}

}  // namespace

AnalyzeResult cmd_analyze(const RunConfig& cfg, const std::string& out_dir,
                          int jobs) {
    AnalyzeResult res;
    const auto t0 = std::chrono::steady_clock::now();
    KernelOptions opt;
    opt.substeps = cfg.substeps;
    opt.stop_on_invariance = cfg.controller.variant == Variant::InfiniteH;
    opt.jobs = jobs;
    const Partition p =
        make_uniform_partition(cfg.horizon, cfg.partition_size);
    KernelApprox approx;
    try {
        approx = discriminating_kernel_ia(cfg.sys, cfg.constraint, cfg.bounds,
                                          p, make_directions(cfg), opt);
    } catch (const InfeasiblePartitionError& e) {
        res.exit_code = kInfeasiblePartition;
        res.message = e.what();
        return res;
    }
    const double elapsed = seconds_since(t0);

    const std::string hash = config_hash(cfg);
    if (!out_dir.empty()) {
        write_kernel_artifacts(approx, out_dir, hash, cfg.echo, elapsed);
        int surviving = 0;
        for (const DirectionChain& c : approx.chains) {
            if (c.has_kernel(0) || c.invariance_k >= 0) ++surviving;
        }
        Json records = Json::array();
        for (const auto& r : approx.invariance_records) {
            records.push_back(
                Json{{"direction_id", r.direction_id}, {"k", r.k}});
        }
        write_json_file(
            Json{{"tool_version", kToolVersion},
                 {"config_hash", hash},
                 {"m_bound", approx.m_bound},
                 {"partition_norm", approx.partition.norm()},
                 {"directions", approx.chains.size()},
                 {"surviving_directions", surviving},
                 {"invariance_records", records},
                 {"total_error_gap", approx.total_error_gap()},
                 {"empty", kernel_empty(approx, cfg.controller.variant)},
                 {"offline_seconds", elapsed}},
            (fs::path(out_dir) / "summary.json").string());
    }
    if (kernel_empty(approx, cfg.controller.variant)) {
        res.exit_code = kEmptyKernel;
        res.message = cfg.controller.variant == Variant::InfiniteH
                          ? "no invariance certificate found"
                          : "all direction chains degenerated";
        return res;
    }
    res.approx = std::move(approx);
    return res;
}

SimulateResult cmd_simulate(const RunConfig& cfg,
                            const std::string& out_dir) {
    SimulateResult res;
    KernelApprox approx;
    try {
        approx = load_kernel_artifacts(out_dir, config_hash(cfg));
    } catch (const StalenessError&) {
        throw;
    }
    for (const DirectionChain& c : approx.chains) {
        for (const ReachSegment& s : c.segments) s.prepare_interpolation();
    }

    PerfPolicy perf = cfg.perf;
    if (cfg.perf_is_lqr) {
        perf = PerfPolicy::saturated_lqr(
            lqr_gain(cfg.sys.A, cfg.sys.B, cfg.q_lqr, cfg.r_lqr), cfg.x_ss);
    }

    Json report_entries = Json::array();
    bool violation = false;
    for (std::size_t xi = 0; xi < cfg.x0_list.size(); ++xi) {
        for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
            Trajectory traj;
            std::string error;
            try {
                traj = simulate_closed_loop(cfg.sys, approx, cfg.controller,
                                            perf, cfg.policies[pi],
                                            cfg.x0_list[xi], cfg.duration,
                                            cfg.dt);
            } catch (const SafetyViolationError& e) {
                violation = true;
                error = e.what();
            }
            bool guaranteed_violation = !error.empty();
            bool guarantee_active = true;
            for (std::size_t i = 0; i + 1 < traj.states.size(); ++i) {
                if (traj.best_effort[i] || traj.exhausted[i]) {
                    guarantee_active = false;
                }
                if (guarantee_active && !traj.safety_ok[i + 1]) {
                    guaranteed_violation = true;
                }
            }
            violation |= guaranteed_violation;
            if (!out_dir.empty() && !traj.states.empty()) {
                write_trajectory_csv(
                    traj, (fs::path(out_dir) /
                           ("trajectory_x" + std::to_string(xi) + "_p" +
                            std::to_string(pi) + ".csv"))
                              .string());
            }
            int safe_count = 0;
            for (bool ok : traj.safety_ok) safe_count += ok ? 1 : 0;
            report_entries.push_back(Json{
                {"x0_index", xi},
                {"policy_index", pi},
                {"steps", traj.steps()},
                {"contained",
                 traj.states.empty()
                     ? 0.0
                     : static_cast<double>(safe_count) /
                           static_cast<double>(traj.states.size())},
                {"guaranteed_violation", guaranteed_violation},
                {"error", error}});
            res.trajectories.push_back(std::move(traj));
        }
    }
    if (!out_dir.empty()) {
        write_json_file(Json{{"tool_version", kToolVersion},
                             {"config_hash", config_hash(cfg)},
                             {"runs", report_entries}},
                        (fs::path(out_dir) / "report.json").string());
    }
    if (violation) {
        res.exit_code = kSafetyViolation;
        res.message = "safety violated in the guaranteed regime";
    }
    return res;
}

BenchResult bench_scaling(const std::vector<int>& dims, int repetitions,
                          std::uint64_t seed, int partition, int substeps,
                          int jobs) {
    if (repetitions < 1) {
        throw std::invalid_argument("bench_scaling: repetitions must be >= 1");
    }
    for (int n : dims) {
        if (n < 2) throw std::invalid_argument("bench_scaling: dims >= 2");
    }
    BenchResult out;
    for (int n : dims) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Matrix a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) a(i, j) = gauss(rng) / std::sqrt(n);
        }
        // shift the spectrum into the open left half-plane
        const double abscissa =
            a.eigenvalues().real().maxCoeff();
        a -= (abscissa + 0.5) * Matrix::Identity(n, n);
        Matrix b(n, 1);
        for (int i = 0; i < n; ++i) b(i, 0) = gauss(rng);
        b /= b.norm();
        const LtiSystem sys{a, b, Matrix::Zero(n, 1)};
        const Ellipsoid constraint = Ellipsoid::ball(Vector::Zero(n), 1.0);
        InputBounds bounds;
        bounds.control = Ellipsoid::ball(Vector::Zero(1), 1.0);
        bounds.disturbance = Ellipsoid::point(Vector::Zero(1));
        const Partition p = make_uniform_partition(0.5, partition);
        DirectionSet dirs;
        Vector l(n);
        for (int i = 0; i < n; ++i) l(i) = gauss(rng);
        dirs.directions.push_back(l / l.norm());
        KernelOptions opt;
        opt.substeps = substeps;
        opt.jobs = jobs;

        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < repetitions; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            (void)discriminating_kernel_ia(sys, constraint, bounds, p, dirs,
                                           opt);
            best = std::min(best, seconds_since(t0));
        }
        out.dims.push_back(n);
        out.seconds.push_back(best);
    }
    // least-squares slope of log t against log n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(dims.size());
    for (int i = 0; i < m; ++i) {
        const double x = std::log(static_cast<double>(out.dims[i]));
        const double y = std::log(std::max(out.seconds[i], 1e-9));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

int cmd_bench_scaling(const std::vector<int>& dims, int repetitions,
                      std::uint64_t seed, const std::string& out_dir) {
    const BenchResult r = bench_scaling(dims, repetitions, seed, 8, 5, 1);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        Json entries = Json::array();
        for (std::size_t i = 0; i < r.dims.size(); ++i) {
            entries.push_back(
                Json{{"dim", r.dims[i]}, {"seconds", r.seconds[i]}});
        }
        write_json_file(Json{{"tool_version", kToolVersion},
                             {"seed", seed},
                             {"repetitions", repetitions},
                             {"timings", entries},
                             {"exponent", r.exponent}},
                        (fs::path(out_dir) / "bench.json").string());
    }
    return kOk;
}

}  // namespace safekern
