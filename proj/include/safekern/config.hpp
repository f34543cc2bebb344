#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "safekern/simulate.hpp"

namespace safekern {

using Json = nlohmann::json;

/// Fully-resolved run configuration. Boxes given for the constraint or the
/// input sets are replaced by their inscribed ellipsoids during parsing.
struct RunConfig {
    LtiSystem sys;
    Ellipsoid constraint = Ellipsoid::point(Vector::Zero(1));
    InputBounds bounds;
    double horizon = 1.0;
    int partition_size = 100;
    int substeps = 10;

    int direction_count = 1;
    std::uint64_t direction_seed = 0;
    bool include_axes = false;
    std::vector<Vector> explicit_directions;

    ControllerConfig controller;

    std::vector<Vector> x0_list;
    double duration = 0.0;
    double dt = 1e-3;
    std::vector<DisturbancePolicy> policies;
    PerfPolicy perf;
    bool perf_is_lqr = false;
    Matrix q_lqr;
    Matrix r_lqr;
    Vector x_ss;

    std::string output_dir;
    Json echo;  ///< canonical config document, used for hashing and echoing
};

/// Parse and validate; throws std::invalid_argument on schema violations.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::string& path);

/// FNV-1a hash of the canonical config document, as a hex string.
std::string config_hash(const RunConfig& cfg);

DirectionSet make_directions(const RunConfig& cfg);

/// Built-in configurations for the two case studies.
Json planar_preset();
Json quadrotor_preset();

}  // namespace safekern
