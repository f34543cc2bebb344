#include "safekern/artifacts.hpp"

#include <filesystem>
#include <fstream>

namespace safekern {

namespace fs = std::filesystem;

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const Json& j) {
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<int>(i)) = j[i].get<double>();
    }
    return v;
}

Json ellipsoid_to_json(const Ellipsoid& e) {
    return Json{{"center", vector_to_json(e.center())},
                {"shape", matrix_to_json(e.shape())},
                {"degenerate", e.degenerate()}};
}

Ellipsoid ellipsoid_from_json(const Json& j) {
    return Ellipsoid(vector_from_json(j.at("center")),
                     matrix_from_json(j.at("shape")),
                     j.value("degenerate", false));
}

void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(1) << "\n";
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    Json j;
    in >> j;
    return j;
}

namespace {

std::string tube_name(int dir, int k) {
    return "tube_dir" + std::to_string(dir) + "_k" + std::to_string(k) +
           ".json";
}

Json segment_to_json(const ReachSegment& s) {
    Json grid = Json::array();
    for (double t : s.grid) grid.push_back(t);
    Json ell = Json::array();
    for (const Vector& l : s.ell) ell.push_back(vector_to_json(l));
    Json centers = Json::array();
    for (const Vector& c : s.centers) centers.push_back(vector_to_json(c));
    Json shapes = Json::array();
    for (const Matrix& m : s.shapes) shapes.push_back(matrix_to_json(m));
    return Json{{"direction_id", s.direction_id},
                {"terminal_direction", vector_to_json(s.terminal_direction)},
                {"t_begin", s.t_begin},
                {"t_end", s.t_end},
                {"grid", grid},
                {"ell", ell},
                {"centers", centers},
                {"shapes", shapes}};
}

ReachSegment segment_from_json(const Json& j) {
    ReachSegment s;
    s.direction_id = j.at("direction_id").get<int>();
    s.terminal_direction = vector_from_json(j.at("terminal_direction"));
    s.t_begin = j.at("t_begin").get<double>();
    s.t_end = j.at("t_end").get<double>();
    for (const Json& t : j.at("grid")) s.grid.push_back(t.get<double>());
    for (const Json& l : j.at("ell")) s.ell.push_back(vector_from_json(l));
    for (const Json& c : j.at("centers")) {
        s.centers.push_back(vector_from_json(c));
    }
    for (const Json& m : j.at("shapes")) {
        s.shapes.push_back(matrix_from_json(m));
    }
    return s;
}

}  // namespace

void write_kernel_artifacts(const KernelApprox& approx,
                            const std::string& dir,
                            const std::string& cfg_hash, const Json& echo,
                            double seconds) {
    fs::create_directories(dir);
    Json chains = Json::array();
    for (const DirectionChain& c : approx.chains) {
        Json kernels = Json::array();
        for (const Ellipsoid& e : c.kernels) {
            kernels.push_back(ellipsoid_to_json(e));
        }
        Json gaps = Json::array();
        for (double g : c.error_gaps) gaps.push_back(g);
        Json tubes = Json::array();
        for (const ReachSegment& s : c.segments) {
            const int k = c.n_intervals -
                          static_cast<int>(&s - c.segments.data());
            const std::string name = tube_name(c.direction_id, k);
            write_json_file(segment_to_json(s), (fs::path(dir) / name).string());
            tubes.push_back(name);
        }
        chains.push_back(
            Json{{"direction_id", c.direction_id},
                 {"terminal_direction",
                  vector_to_json(c.terminal_direction)},
                 {"n_intervals", c.n_intervals},
                 {"dropped", c.dropped},
                 {"invariance_k", c.invariance_k},
                 {"kernels", kernels},
                 {"error_gaps", gaps},
                 {"tubes", tubes}});
    }
    Json records = Json::array();
    for (const auto& r : approx.invariance_records) {
        records.push_back(
            Json{{"direction_id", r.direction_id}, {"k", r.k}});
    }
    Json times = Json::array();
    for (double t : approx.partition.times) times.push_back(t);
    Json dirs = Json::array();
    for (const Vector& d : approx.dirs.directions) {
        dirs.push_back(vector_to_json(d));
    }
    const Json doc{
        {"tool_version", kToolVersion},
        {"config_hash", cfg_hash},
        {"config", echo},
        {"system",
         {{"A", matrix_to_json(approx.sys.A)},
          {"B", matrix_to_json(approx.sys.B)},
          {"G", matrix_to_json(approx.sys.G)}}},
        {"control", ellipsoid_to_json(approx.bounds.control)},
        {"disturbance", ellipsoid_to_json(approx.bounds.disturbance)},
        {"constraint", ellipsoid_to_json(approx.constraint)},
        {"eroded", ellipsoid_to_json(approx.eroded)},
        {"m_bound", approx.m_bound},
        {"partition", times},
        {"directions", dirs},
        {"direction_seed", approx.dirs.seed},
        {"chains", chains},
        {"invariance_records", records},
        {"offline_seconds", seconds}};
    write_json_file(doc, (fs::path(dir) / "kernel.json").string());
}

KernelApprox load_kernel_artifacts(const std::string& dir,
                                   const std::string& expected_hash) {
    const Json doc = read_json_file((fs::path(dir) / "kernel.json").string());
    if (!expected_hash.empty() &&
        doc.at("config_hash").get<std::string>() != expected_hash) {
        throw StalenessError(
            "kernel artifacts in '" + dir +
            "' were produced from a different configuration");
    }
    KernelApprox approx;
    approx.sys.A = matrix_from_json(doc.at("system").at("A"));
    approx.sys.B = matrix_from_json(doc.at("system").at("B"));
    approx.sys.G = matrix_from_json(doc.at("system").at("G"));
    approx.bounds.control = ellipsoid_from_json(doc.at("control"));
    approx.bounds.disturbance = ellipsoid_from_json(doc.at("disturbance"));
    approx.constraint = ellipsoid_from_json(doc.at("constraint"));
    approx.eroded = ellipsoid_from_json(doc.at("eroded"));
    approx.m_bound = doc.at("m_bound").get<double>();
    for (const Json& t : doc.at("partition")) {
        approx.partition.times.push_back(t.get<double>());
    }
    for (const Json& d : doc.at("directions")) {
        approx.dirs.directions.push_back(vector_from_json(d));
    }
    approx.dirs.seed = doc.value("direction_seed", std::uint64_t{0});
    for (const Json& cj : doc.at("chains")) {
        DirectionChain c;
        c.direction_id = cj.at("direction_id").get<int>();
        c.terminal_direction = vector_from_json(cj.at("terminal_direction"));
        c.n_intervals = cj.at("n_intervals").get<int>();
        c.dropped = cj.at("dropped").get<bool>();
        c.invariance_k = cj.at("invariance_k").get<int>();
        for (const Json& e : cj.at("kernels")) {
            c.kernels.push_back(ellipsoid_from_json(e));
        }
        for (const Json& g : cj.at("error_gaps")) {
            c.error_gaps.push_back(g.get<double>());
        }
        for (const Json& t : cj.at("tubes")) {
            c.segments.push_back(segment_from_json(read_json_file(
                (fs::path(dir) / t.get<std::string>()).string())));
        }
        approx.chains.push_back(std::move(c));
    }
    for (const Json& r : doc.at("invariance_records")) {
        approx.invariance_records.push_back(
            {r.at("direction_id").get<int>(), r.at("k").get<int>()});
    }
    return approx;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    if (traj.states.empty()) throw Error("empty trajectory");
    const int n = static_cast<int>(traj.states[0].size());
    const int m = traj.controls.empty()
                      ? 0
                      : static_cast<int>(traj.controls[0].size());
    const int mv = traj.disturbances.empty()
                       ? 0
                       : static_cast<int>(traj.disturbances[0].size());
    out << "t,sigma,k,mode,gamma,beta";
    for (int i = 1; i <= n; ++i) out << ",x" << i;
    for (int i = 1; i <= m; ++i) out << ",u" << i;
    for (int i = 1; i <= mv; ++i) out << ",v" << i;
    out << ",safety_ok\n";
    out.precision(17);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const std::size_t s = std::min(i, traj.steps() - 1);
        out << traj.times[i] << "," << traj.sigmas[s] << "," << traj.ks[s]
            << "," << traj.modes[s] << "," << traj.gammas[s] << ","
            << traj.betas[s];
        for (int c = 0; c < n; ++c) out << "," << traj.states[i](c);
        for (int c = 0; c < m; ++c) {
            out << "," << (i < traj.steps() ? traj.controls[i](c)
                                            : traj.controls.back()(c));
        }
        for (int c = 0; c < mv; ++c) {
            out << "," << (i < traj.steps() ? traj.disturbances[i](c)
                                            : traj.disturbances.back()(c));
        }
        out << "," << (traj.safety_ok[i] ? 1 : 0) << "\n";
    }
}

}  // namespace safekern
