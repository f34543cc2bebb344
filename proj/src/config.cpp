#include "safekern/config.hpp"

#include <fstream>

namespace safekern {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("config: " + what);
}

Matrix matrix_from(const Json& j, const std::string& name) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        fail(name + " must be a nested (row-major) array");
    }
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols) {
            fail(name + " rows have unequal lengths");
        }
        for (int c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) fail(name + " has non-numeric entries");
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

Vector vector_from(const Json& j, const std::string& name) {
    if (!j.is_array()) fail(name + " must be an array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(name + " has non-numeric entries");
        v(static_cast<int>(i)) = j[i].get<double>();
    }
    return v;
}

Ellipsoid set_from(const Json& j, const std::string& name) {
    if (j.contains("ellipsoid")) {
        const Json& e = j["ellipsoid"];
        return Ellipsoid(vector_from(e.at("center"), name + ".center"),
                         matrix_from(e.at("shape"), name + ".shape"));
    }
    if (j.contains("box")) {
        HyperRectangle r;
        r.lower = vector_from(j["box"].at("lower"), name + ".lower");
        r.upper = vector_from(j["box"].at("upper"), name + ".upper");
        return mvie_box(r);
    }
    fail(name + " needs either 'ellipsoid' or 'box'");
}

DisturbancePolicy policy_from(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") return DisturbancePolicy::none();
    if (kind == "uniform_random") {
        return DisturbancePolicy::uniform_random(
            j.value("seed", std::uint64_t{0}));
    }
    if (kind == "worst_case") return DisturbancePolicy::worst_case();
    if (kind == "adversarial_switching") {
        return DisturbancePolicy::adversarial_switching(
            j.value("period", 1), j.value("seed", std::uint64_t{0}));
    }
    if (kind == "fixed") {
        std::vector<Vector> samples;
        for (const Json& s : j.at("samples")) {
            samples.push_back(vector_from(s, "policy sample"));
        }
        return DisturbancePolicy::fixed(std::move(samples));
    }
    fail("unknown disturbance policy '" + kind + "'");
}

}  // namespace

RunConfig parse_config(const Json& j) {
    RunConfig cfg;
    Json doc = j;
    if (const std::string preset = doc.value("preset", ""); !preset.empty()) {
        Json base;
        if (preset == "planar") {
            base = planar_preset();
        } else if (preset == "quadrotor") {
            base = quadrotor_preset();
        } else {
            fail("unknown preset '" + preset + "'");
        }
        base.merge_patch([&] {
            Json d = doc;
            d.erase("preset");
            return d;
        }());
        doc = base;
    }
    cfg.echo = doc;

    if (!doc.contains("system")) fail("missing 'system'");
    cfg.sys.A = matrix_from(doc["system"].at("A"), "A");
    cfg.sys.B = matrix_from(doc["system"].at("B"), "B");
    if (doc["system"].contains("G")) {
        cfg.sys.G = matrix_from(doc["system"]["G"], "G");
    } else {
        cfg.sys.G = Matrix::Zero(cfg.sys.A.rows(), 1);
    }
    try {
        cfg.sys.validate();
    } catch (const std::exception& e) {
        fail(e.what());
    }
    const int n = cfg.sys.state_dim();

    cfg.constraint = set_from(doc.at("constraint"), "constraint");
    cfg.bounds.control = set_from(doc.at("control"), "control");
    if (doc.contains("disturbance")) {
        cfg.bounds.disturbance = set_from(doc["disturbance"], "disturbance");
    } else {
        cfg.bounds.disturbance =
            Ellipsoid::point(Vector::Zero(cfg.sys.disturbance_dim()));
    }
    if (cfg.constraint.dim() != n) fail("constraint dimension != state dim");
    if (cfg.bounds.control.dim() != cfg.sys.control_dim()) {
        fail("control set dimension != control dim");
    }
    if (cfg.bounds.disturbance.dim() != cfg.sys.disturbance_dim()) {
        fail("disturbance set dimension != disturbance dim");
    }

    cfg.horizon = doc.value("horizon", 1.0);
    if (!(cfg.horizon > 0.0)) fail("horizon must be positive");
    cfg.partition_size = doc.value("partition", 100);
    if (cfg.partition_size < 1) fail("partition must be >= 1");
    cfg.substeps = doc.value("substeps", 10);
    if (cfg.substeps < 1) fail("substeps must be >= 1");

    if (doc.contains("directions")) {
        const Json& d = doc["directions"];
        if (d.contains("list")) {
            for (const Json& v : d["list"]) {
                Vector dir = vector_from(v, "direction");
                if (dir.size() != n) fail("direction dimension != state dim");
                if (dir.norm() == 0.0) fail("zero direction");
                cfg.explicit_directions.push_back(dir);
            }
            if (cfg.explicit_directions.empty()) fail("empty direction list");
        } else {
            cfg.direction_count = d.value("count", 1);
            if (cfg.direction_count < 1) fail("direction count must be >= 1");
            cfg.direction_seed = d.value("seed", std::uint64_t{0});
            cfg.include_axes = d.value("include_axes", false);
        }
    }

    if (doc.contains("controller")) {
        const Json& c = doc["controller"];
        cfg.controller.alpha = c.value("alpha", 0.9);
        if (cfg.controller.alpha < 0.0 || cfg.controller.alpha >= 1.0) {
            fail("alpha must be in [0,1)");
        }
        const std::string sp = c.value("sigma_policy", "track");
        if (sp == "track") {
            cfg.controller.sigma_rate_perf = 1.0;
        } else if (sp == "freeze") {
            cfg.controller.sigma_rate_perf = 0.0;
        } else {
            fail("sigma_policy must be 'freeze' or 'track'");
        }
        const std::string var = c.value("variant", "finite");
        if (var == "finite") {
            cfg.controller.variant = Variant::FiniteH;
        } else if (var == "infinite") {
            cfg.controller.variant = Variant::InfiniteH;
        } else {
            fail("variant must be 'finite' or 'infinite'");
        }
        cfg.controller.blending = c.value("blending", true);
        cfg.controller.fallback = c.value("fallback", true);
        cfg.controller.enabled = c.value("enabled", true);
    }

    if (doc.contains("simulation")) {
        const Json& s = doc["simulation"];
        for (const Json& x : s.value("x0", Json::array())) {
            Vector v = vector_from(x, "x0");
            if (v.size() != n) fail("x0 dimension != state dim");
            cfg.x0_list.push_back(v);
        }
        cfg.duration = s.value("duration", cfg.horizon);
        cfg.dt = s.value("dt", 1e-3);
        if (!(cfg.duration > 0.0) || !(cfg.dt > 0.0)) {
            fail("duration and dt must be positive");
        }
        if (s.contains("policies")) {
            for (const Json& p : s["policies"]) {
                cfg.policies.push_back(policy_from(p));
            }
        }
        if (cfg.policies.empty()) {
            cfg.policies.push_back(DisturbancePolicy::none());
        }
        if (s.contains("perf")) {
            const Json& p = s["perf"];
            const std::string kind = p.at("kind").get<std::string>();
            if (kind == "constant") {
                Vector u = vector_from(p.at("u"), "perf.u");
                if (u.size() != cfg.sys.control_dim()) {
                    fail("perf.u dimension != control dim");
                }
                cfg.perf = PerfPolicy::constant(u);
            } else if (kind == "lqr") {
                cfg.perf_is_lqr = true;
                cfg.x_ss = p.contains("x_ss")
                               ? vector_from(p["x_ss"], "perf.x_ss")
                               : Vector::Zero(n);
                if (cfg.x_ss.size() != n) fail("x_ss dimension != state dim");
                cfg.q_lqr = p.contains("Q")
                                ? matrix_from(p["Q"], "perf.Q")
                                : Matrix(Matrix::Identity(n, n));
                cfg.r_lqr = p.contains("R")
                                ? matrix_from(p["R"], "perf.R")
                                : Matrix(Matrix::Identity(
                                      cfg.sys.control_dim(),
                                      cfg.sys.control_dim()));
            } else {
                fail("unknown perf policy '" + kind + "'");
            }
        } else {
            cfg.perf =
                PerfPolicy::constant(Vector::Zero(cfg.sys.control_dim()));
        }
    } else {
        cfg.perf = PerfPolicy::constant(Vector::Zero(cfg.sys.control_dim()));
    }

    cfg.output_dir = doc.value("output_dir", "");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        fail(std::string("JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

std::string config_hash(const RunConfig& cfg) {
    // Only the offline inputs determine the kernel artifacts; controller and
    // simulation settings may change between analyze and simulate runs.
    Json offline = Json::object();
    for (const char* key : {"system", "constraint", "control", "disturbance",
                            "horizon", "partition", "directions"}) {
        if (cfg.echo.contains(key)) offline[key] = cfg.echo.at(key);
    }
    const std::string dump = offline.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

DirectionSet make_directions(const RunConfig& cfg) {
    if (!cfg.explicit_directions.empty()) {
        DirectionSet d;
        for (const Vector& v : cfg.explicit_directions) {
            d.directions.push_back(v / v.norm());
        }
        return d;
    }
    return DirectionSet::random(cfg.sys.state_dim(), cfg.direction_count,
                                cfg.direction_seed, cfg.include_axes);
}

Json planar_preset() {
    return Json{
        {"system",
         {{"A", {{0.0, 2.0}, {-2.0, 0.0}}},
          {"B", {{1.0}, {0.5}}},
          {"G", {{1.0}, {1.0}}}}},
        {"constraint",
         {{"ellipsoid",
           {{"center", {0.0, 0.0}},
            {"shape", {{0.25, 0.0}, {0.0, 4.0}}}}}}},
        {"control", {{"box", {{"lower", {-1.0}}, {"upper", {1.0}}}}}},
        {"disturbance", {{"box", {{"lower", {-0.1}}, {"upper", {0.1}}}}}},
        {"horizon", 1.0},
        {"partition", 100},
        {"directions", {{"list", {{1.0, 1.0}}}}},
        {"controller",
         {{"alpha", 0.9},
          {"sigma_policy", "track"},
          {"variant", "infinite"},
          {"blending", true},
          {"fallback", true}}},
        {"simulation",
         {{"x0", {{0.3, -0.7}}},
          {"duration", 25.0},
          {"dt", 1e-3},
          {"policies", {{{"kind", "uniform_random"}, {"seed", 7}}}},
          {"perf", {{"kind", "constant"}, {"u", {-1.0}}}}}}};
}

Json quadrotor_preset() {
    const QuadrotorModel m = quadrotor_model();
    auto mat = [](const Matrix& x) {
        Json rows = Json::array();
        for (int i = 0; i < x.rows(); ++i) {
            Json row = Json::array();
            for (int j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
            rows.push_back(row);
        }
        return rows;
    };
    auto vec = [](const Vector& x) {
        Json a = Json::array();
        for (int i = 0; i < x.size(); ++i) a.push_back(x(i));
        return a;
    };
    return Json{
        {"system",
         {{"A", mat(m.sys.A)}, {"B", mat(m.sys.B)}, {"G", mat(m.sys.G)}}},
        {"constraint",
         {{"ellipsoid",
           {{"center", vec(m.constraint.center())},
            {"shape", mat(m.constraint.shape())}}}}},
        {"control",
         {{"ellipsoid",
           {{"center", vec(m.bounds.control.center())},
            {"shape", mat(m.bounds.control.shape())}}}}},
        {"disturbance",
         {{"ellipsoid",
           {{"center", vec(m.bounds.disturbance.center())},
            {"shape", mat(m.bounds.disturbance.shape())}}}}},
        {"horizon", 2.0},
        {"partition", 200},
        {"directions", {{"count", 15}, {"seed", 2024}}},
        {"controller",
         {{"alpha", 0.9},
          {"sigma_policy", "track"},
          {"variant", "finite"},
          {"blending", true},
          {"fallback", true}}},
        {"simulation",
         {{"x0", {vec(m.x0)}},
          {"duration", 2.0},
          {"dt", 1e-3},
          {"policies", {{{"kind", "uniform_random"}, {"seed", 11}}}},
          {"perf",
           {{"kind", "lqr"},
            {"x_ss", vec(m.x_ss)},
            {"Q", mat(m.q_lqr)},
            {"R", mat(m.r_lqr)}}}}}};
}

}  // namespace safekern
