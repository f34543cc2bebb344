#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "safekern/commands.hpp"

namespace py = pybind11;
using namespace safekern;

PYBIND11_MODULE(_safekern, m) {
    m.doc() = "Piecewise-ellipsoidal safety kernels for LTI systems";

    py::register_exception<InfeasiblePartitionError>(
        m, "InfeasiblePartitionError");
    py::register_exception<SafetyViolationError>(m, "SafetyViolationError");

    py::class_<Ellipsoid>(m, "Ellipsoid")
        .def(py::init<Vector, Matrix, bool>(), py::arg("center"),
             py::arg("shape"), py::arg("allow_degenerate") = false)
        .def_property_readonly("center", &Ellipsoid::center)
        .def_property_readonly("shape", &Ellipsoid::shape)
        .def("contains", &Ellipsoid::contains)
        .def("quadratic", &Ellipsoid::quadratic)
        .def("support", &Ellipsoid::support)
        .def("volume", &Ellipsoid::volume);

    m.def("point_ellipsoid_distance", &point_ellipsoid_distance);
    m.def("contains_ellipsoid", &contains_ellipsoid);
    m.def("fusion_intersect_ia", [](const Ellipsoid& a, const Ellipsoid& b) {
        auto r = fusion_intersect_ia(a, b);
        return r ? py::cast(*r) : py::object(py::none());
    });

    py::class_<LtiSystem>(m, "LtiSystem")
        .def(py::init([](Matrix a, Matrix b, Matrix g) {
                 LtiSystem s{std::move(a), std::move(b), std::move(g)};
                 s.validate();
                 return s;
             }),
             py::arg("A"), py::arg("B"), py::arg("G"))
        .def_readonly("A", &LtiSystem::A)
        .def_readonly("B", &LtiSystem::B)
        .def_readonly("G", &LtiSystem::G);

    py::class_<KernelApprox>(m, "KernelApprox")
        .def_property_readonly("empty", &KernelApprox::empty)
        .def("final_kernel", &KernelApprox::final_kernel)
        .def("intermediate_kernel", &KernelApprox::intermediate_kernel)
        .def_property_readonly("m_bound",
                               [](const KernelApprox& a) { return a.m_bound; })
        .def_property_readonly("invariance_records",
                               [](const KernelApprox& a) {
                                   std::vector<std::pair<int, int>> out;
                                   for (const auto& r : a.invariance_records) {
                                       out.emplace_back(r.direction_id, r.k);
                                   }
                                   return out;
                               });

    m.def(
        "discriminating_kernel",
        [](const LtiSystem& sys, const Ellipsoid& constraint,
           const Ellipsoid& control, const Ellipsoid& disturbance,
           double horizon, int partition, std::vector<Vector> directions,
           bool stop_on_invariance, int substeps, int jobs) {
            InputBounds bounds{control, disturbance};
            DirectionSet dirs;
            dirs.directions = std::move(directions);
            KernelOptions opt;
            opt.stop_on_invariance = stop_on_invariance;
            opt.substeps = substeps;
            opt.jobs = jobs;
            return discriminating_kernel_ia(
                sys, constraint, bounds,
                make_uniform_partition(horizon, partition), dirs, opt);
        },
        py::arg("sys"), py::arg("constraint"), py::arg("control"),
        py::arg("disturbance"), py::arg("horizon"), py::arg("partition"),
        py::arg("directions"), py::arg("stop_on_invariance") = false,
        py::arg("substeps") = 10, py::arg("jobs") = 1);

    m.def("lqr_gain", &lqr_gain, py::arg("A"), py::arg("B"), py::arg("Q"),
          py::arg("R"));

    m.def(
        "simulate",
        [](const LtiSystem& sys, const KernelApprox& approx, double alpha,
           double sigma_rate_perf, bool infinite, const Vector& u_perf,
           const Vector& x0, double duration, double dt,
           std::uint64_t dist_seed) {
            ControllerConfig cfg;
            cfg.alpha = alpha;
            cfg.sigma_rate_perf = sigma_rate_perf;
            cfg.variant = infinite ? Variant::InfiniteH : Variant::FiniteH;
            const Trajectory t = simulate_closed_loop(
                sys, approx, cfg, PerfPolicy::constant(u_perf),
                DisturbancePolicy::uniform_random(dist_seed), x0, duration,
                dt);
            py::dict out;
            out["times"] = t.times;
            out["states"] = t.states;
            out["controls"] = t.controls;
            out["modes"] = t.modes;
            out["safety_ok"] = std::vector<int>(t.safety_ok.begin(),
                                                t.safety_ok.end());
            return out;
        },
        py::arg("sys"), py::arg("approx"), py::arg("alpha") = 0.9,
        py::arg("sigma_rate_perf") = 1.0, py::arg("infinite") = false,
        py::arg("u_perf") = Vector(), py::arg("x0") = Vector(),
        py::arg("duration") = 1.0, py::arg("dt") = 1e-3,
        py::arg("dist_seed") = 0);

    m.def("planar_preset", [] { return planar_preset().dump(); });
    m.def("parse_config_json", [](const std::string& text) {
        (void)parse_config(Json::parse(text));
        return true;
    });
}
