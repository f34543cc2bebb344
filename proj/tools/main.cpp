#include <CLI11.hpp>
#include <iostream>

#include "safekern/commands.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string output_dir = "out";
    int jobs = 1;
    std::int64_t seed = -1;
    int directions = 0;
    int partition = 0;
    double alpha = -1.0;
    std::string sigma_policy;
    std::string variant;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required) {
    auto* c = cmd->add_option("--config", o.config_path,
                              "Run configuration (JSON)");
    if (config_required) c->required();
    cmd->add_option("--output-dir", o.output_dir, "Artifact directory");
    cmd->add_option("--jobs", o.jobs, "Parallel direction chains");
    cmd->add_option("--seed", o.seed, "Direction seed override");
    cmd->add_option("--directions", o.directions,
                    "Direction count override");
    cmd->add_option("--partition", o.partition, "Partition size override");
    cmd->add_option("--alpha", o.alpha, "Blending threshold override");
    cmd->add_option("--sigma-policy", o.sigma_policy,
                    "Pseudo-time policy: freeze|track")
        ->check(CLI::IsMember({"freeze", "track"}));
    cmd->add_option("--variant", o.variant,
                    "Automaton variant: finite|infinite")
        ->check(CLI::IsMember({"finite", "infinite"}));
}

// Overrides are merged into the config document itself so that the config
// hash embedded in artifacts stays consistent between analyze and simulate.
safekern::RunConfig resolve(const CommonOpts& o) {
    safekern::Json doc = safekern::read_json_file(o.config_path);
    if (o.seed >= 0) {
        doc["directions"]["seed"] = static_cast<std::uint64_t>(o.seed);
        doc["directions"].erase("list");
    }
    if (o.directions > 0) {
        doc["directions"]["count"] = o.directions;
        doc["directions"].erase("list");
    }
    if (o.partition > 0) doc["partition"] = o.partition;
    if (o.alpha >= 0.0) doc["controller"]["alpha"] = o.alpha;
    if (!o.sigma_policy.empty()) {
        doc["controller"]["sigma_policy"] = o.sigma_policy;
    }
    if (!o.variant.empty()) doc["controller"]["variant"] = o.variant;
    return safekern::parse_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise-ellipsoidal safety kernels and the "
                 "safety-preserving hybrid controller for LTI systems"};
    app.require_subcommand(1);

    CommonOpts a_opts, s_opts, b_opts;
    auto* analyze = app.add_subcommand(
        "analyze", "Offline phase: compute the kernel approximation");
    add_common(analyze, a_opts, true);

    auto* simulate = app.add_subcommand(
        "simulate", "Online phase: closed-loop simulation from artifacts");
    add_common(simulate, s_opts, true);

    auto* bench = app.add_subcommand(
        "bench-scaling", "Time the offline phase across state dimensions");
    std::vector<int> dims{2, 4, 6, 8, 12};
    int repetitions = 1;
    bench->add_option("--dims", dims, "State dimensions to benchmark");
    bench->add_option("--repetitions", repetitions, "Repetitions per dim");
    add_common(bench, b_opts, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            const auto cfg = resolve(a_opts);
            const auto res =
                safekern::cmd_analyze(cfg, a_opts.output_dir, a_opts.jobs);
            if (res.exit_code != safekern::kOk) {
                std::cerr << "analyze: " << res.message << "\n";
            } else {
                std::cout << "analyze: wrote artifacts to "
                          << a_opts.output_dir << "\n";
            }
            return res.exit_code;
        }
        if (simulate->parsed()) {
            const auto cfg = resolve(s_opts);
            const auto res = safekern::cmd_simulate(cfg, s_opts.output_dir);
            if (res.exit_code != safekern::kOk) {
                std::cerr << "simulate: " << res.message << "\n";
            } else {
                std::cout << "simulate: " << res.trajectories.size()
                          << " trajectories written to " << s_opts.output_dir
                          << "\n";
            }
            return res.exit_code;
        }
        if (bench->parsed()) {
            const std::uint64_t seed =
                b_opts.seed >= 0 ? static_cast<std::uint64_t>(b_opts.seed)
                                 : 1234;
            const int code = safekern::cmd_bench_scaling(
                dims, repetitions, seed, b_opts.output_dir);
            std::cout << "bench-scaling: wrote " << b_opts.output_dir
                      << "/bench.json\n";
            return code;
        }
    } catch (const safekern::InfeasiblePartitionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return safekern::kInfeasiblePartition;
    } catch (const safekern::SafetyViolationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return safekern::kSafetyViolation;
    } catch (const safekern::StalenessError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return safekern::kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return safekern::kConfigError;
    }
    return safekern::kOk;
}
