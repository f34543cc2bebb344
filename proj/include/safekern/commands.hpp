#pragma once

#include "safekern/artifacts.hpp"

namespace safekern {

/// Exit-code contract shared by the CLI and the command layer:
/// 0 ok, 1 config error, 2 infeasible partition, 3 empty kernel,
/// 4 safety violation in the guaranteed regime.
enum ExitCode {
    kOk = 0,
    kConfigError = 1,
    kInfeasiblePartition = 2,
    kEmptyKernel = 3,
    kSafetyViolation = 4,
};

struct AnalyzeResult {
    int exit_code = kOk;
    std::string message;
    KernelApprox approx;  // valid when exit_code is 0
};

/// Offline phase: kernel synthesis plus kernel.json / tube files /
/// summary.json under out_dir.
AnalyzeResult cmd_analyze(const RunConfig& cfg, const std::string& out_dir,
                          int jobs);

struct SimulateResult {
    int exit_code = kOk;
    std::string message;
    std::vector<Trajectory> trajectories;  // one per (x0, policy), row-major
};

/// Online phase: loads kernel artifacts from out_dir (staleness-checked
/// against the config hash) and writes trajectory_x<i>_p<j>.csv plus
/// report.json.
SimulateResult cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

struct BenchResult {
    std::vector<int> dims;
    std::vector<double> seconds;  // best-of-repetitions per dim
    double exponent = 0.0;        // log-log least-squares slope
};

/// Times the offline phase on random stable systems of the given dimensions.
BenchResult bench_scaling(const std::vector<int>& dims, int repetitions,
                          std::uint64_t seed, int partition, int substeps,
                          int jobs);

int cmd_bench_scaling(const std::vector<int>& dims, int repetitions,
                      std::uint64_t seed, const std::string& out_dir);

}  // namespace safekern
