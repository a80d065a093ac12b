// Python bindings for the dwrom core: grids, solvers, both wave models and
// the reduction pipeline, plus the JSON-driven harness entry points.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dwrom/eim.hpp"
#include "dwrom/harness.hpp"

namespace py = pybind11;
using namespace dwrom;

namespace {

Bc bc_from_string(const std::string& s) {
    if (s == "periodic") return Bc::Periodic;
    if (s == "dirichlet_left") return Bc::DirichletLeftLifted;
    if (s == "extrapolated") return Bc::Extrapolated;
    throw ConfigError("unknown boundary mode '" + s + "'");
}

FdOp fd_from_string(const std::string& s) {
    if (s == "D") return FdOp::D;
    if (s == "D2") return FdOp::D2;
    if (s == "D3") return FdOp::D3;
    throw ConfigError("unknown stencil '" + s + "' (use D, D2, D3)");
}

json dict_to_json(const py::object& obj) {
    if (obj.is_none()) return json::object();
    const auto dumps = py::module_::import("json").attr("dumps");
    return json::parse(dumps(obj).cast<std::string>());
}

py::object json_to_dict(const json& j) {
    const auto loads = py::module_::import("json").attr("loads");
    return loads(j.dump());
}

BenchmarkOverrides overrides_from_dict(const py::object& obj) {
    BenchmarkOverrides ov;
    if (obj.is_none()) return ov;
    const json j = dict_to_json(obj);
    if (j.contains("nh")) ov.nh = j.at("nh").get<int>();
    if (j.contains("a0")) ov.a0 = j.at("a0").get<double>();
    if (j.contains("h0")) ov.h0 = j.at("h0").get<double>();
    if (j.contains("cfl")) ov.cfl = j.at("cfl").get<double>();
    if (j.contains("t_end")) ov.t_end = j.at("t_end").get<double>();
    if (j.contains("p")) ov.p = j.at("p").get<double>();
    if (j.contains("d_cip")) ov.d_cip = j.at("d_cip").get<double>();
    return ov;
}

// Full-order BBM benchmark bundled with its problem data.
struct BbmCase {
    BbmProblem problem;
    Vec eta0;

    static BbmCase make(const std::string& name, const py::object& overrides) {
        BbmBenchmark bm = bbm_benchmark(name, overrides_from_dict(overrides));
        Vec lift;
        if (bm.config.grid.bc == Bc::DirichletLeftLifted) lift = bm.eta0;
        return {build_bbm_problem(bm.config, lift), bm.eta0};
    }

    py::tuple run(double t_end, int n_samples) const {
        const std::vector<double> times = uniform_times(t_end, n_samples);
        Mat traj;
        bbm_run(problem, {eta0, 0.0, 0}, t_end, times, &traj);
        return py::make_tuple(times, traj);
    }
};

struct EbCase {
    EbConfig config;
    FemMatrices fem;
    EbState state0;
    double celerity;

    static EbCase make(const std::string& name, const py::object& overrides) {
        EbBenchmark bm = eb_benchmark(name, overrides_from_dict(overrides));
        return {bm.config, assemble_eb_matrices(bm.config), bm.state0, bm.celerity};
    }

    py::tuple run(double t_end, int n_samples) const {
        const std::vector<double> times = uniform_times(t_end, n_samples);
        Mat eta, q;
        eb_run(config, fem, state0, t_end, times, &eta, &q);
        return py::make_tuple(times, eta, q);
    }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "1D dispersive wave solvers with POD/EIM model reduction";

    py::register_exception<ConfigError>(m, "DwromConfigError");
    py::register_exception<SimulationError>(m, "DwromSimulationError");

    py::class_<Grid1D>(m, "Grid1D")
        .def(py::init([](double x0, double x1, int nh, const std::string& bc) {
                 return make_grid(x0, x1, nh, bc_from_string(bc));
             }),
             py::arg("x0"), py::arg("x1"), py::arg("nh"), py::arg("bc") = "periodic")
        .def_property_readonly("dx", &Grid1D::dx)
        .def_property_readonly("nh", [](const Grid1D& g) { return g.nh; })
        .def("nodes", &Grid1D::nodes);

    m.def(
        "thomas_solve",
        [](const Vec& lower, const Vec& diag, const Vec& upper, const Vec& rhs) {
            return thomas_solve({lower, diag, upper}, rhs);
        },
        py::arg("lower"), py::arg("diag"), py::arg("upper"), py::arg("rhs"));
    m.def(
        "cyclic_solve",
        [](const Vec& lower, const Vec& diag, const Vec& upper, double corner_lowleft,
           double corner_upright, const Vec& rhs) {
            return cyclic_solve({{lower, diag, upper}, corner_lowleft, corner_upright}, rhs);
        },
        py::arg("lower"), py::arg("diag"), py::arg("upper"), py::arg("corner_lowleft"),
        py::arg("corner_upright"), py::arg("rhs"));
    m.def("dense_solve", &dense_solve, py::arg("a"), py::arg("rhs"));
    m.def(
        "thin_svd",
        [](const Mat& s) {
            const ThinSvd r = thin_svd(s);
            return py::make_tuple(r.u, r.sigma, r.v);
        },
        py::arg("s"));
    m.def(
        "fd_apply",
        [](const std::string& which, const Vec& v, const Grid1D& g) {
            return fd_apply(fd_from_string(which), v, g);
        },
        py::arg("which"), py::arg("v"), py::arg("grid"));
    m.def(
        "cip_apply",
        [](const Vec& v, const Vec& lambda, double d, const Grid1D& g) {
            return cip_apply(v, lambda, d, g);
        },
        py::arg("v"), py::arg("lambda"), py::arg("d"), py::arg("grid"));
    m.def(
        "pod_pick_dimension",
        [](const Vec& sigma, double tol) { return pod_pick_dimension(sigma, tol); },
        py::arg("sigma"), py::arg("tol"));
    m.def(
        "eim_greedy",
        [](const Mat& fluxes, double tol, const Grid1D& g) {
            const EimSpace s = eim_greedy(fluxes, tol, g);
            return py::make_tuple(s.z, s.psi, s.tol_reached);
        },
        py::arg("flux_snapshots"), py::arg("tol"), py::arg("grid"));

    py::class_<BbmCase>(m, "BbmCase")
        .def(py::init(&BbmCase::make), py::arg("name"), py::arg("overrides") = py::none())
        .def_property_readonly("eta0", [](const BbmCase& c) { return c.eta0; })
        .def_property_readonly("nh", [](const BbmCase& c) { return c.problem.config.grid.nh; })
        .def_property_readonly("t_end", [](const BbmCase& c) { return c.problem.config.t_end; })
        .def("nodes", [](const BbmCase& c) { return c.problem.config.grid.nodes(); })
        .def("dt", [](const BbmCase& c, const Vec& eta) { return bbm_dt(c.problem, eta); })
        .def("energy", [](const BbmCase& c, const Vec& eta) { return bbm_energy(c.problem, eta); })
        .def("explicit_rhs",
             [](const BbmCase& c, const Vec& eta) { return bbm_explicit_rhs(c.problem, eta); })
        .def("phi_solve",
             [](const BbmCase& c, const Vec& eta) { return bbm_phi_solve(c.problem, eta); })
        .def("step",
             [](const BbmCase& c, const Vec& eta, double t, double dt) {
                 const BbmState out = bbm_step(c.problem, {eta, t, 0}, dt);
                 return py::make_tuple(out.eta, out.t);
             })
        .def("run", &BbmCase::run, py::arg("t_end"), py::arg("n_samples") = 11);

    py::class_<EbCase>(m, "EbCase")
        .def(py::init(&EbCase::make), py::arg("name"), py::arg("overrides") = py::none())
        .def_property_readonly("eta0", [](const EbCase& c) { return c.state0.eta; })
        .def_property_readonly("q0", [](const EbCase& c) { return c.state0.q; })
        .def_property_readonly("celerity", [](const EbCase& c) { return c.celerity; })
        .def_property_readonly("nh", [](const EbCase& c) { return c.config.grid.nh; })
        .def("nodes", [](const EbCase& c) { return c.config.grid.nodes(); })
        .def("dt", [](const EbCase& c, const Vec& eta, const Vec& q) {
                 return eb_dt(c.config, {eta, q, 0.0});
             })
        .def("run", &EbCase::run, py::arg("t_end"), py::arg("n_samples") = 11);

    m.def(
        "solitary_wave",
        [](double a0, double h0, double g, const Grid1D& grid, double x_center) {
            const SolitaryWave sw =
                solitary_wave_init(a0, h0, g, grid, x_center, 1.0 / 15.0 + 1.0 / 3.0, 1.0 / 15.0);
            return py::make_tuple(sw.eta0, sw.q0, sw.celerity);
        },
        py::arg("a0"), py::arg("h0"), py::arg("g"), py::arg("grid"), py::arg("x_center"));

    m.def(
        "run_online",
        [](const py::object& cfg) {
            return json_to_dict(run_online(run_config_from_json(dict_to_json(cfg))).to_json());
        },
        py::arg("config"));
    m.def(
        "run_offline",
        [](const py::object& cfg) {
            return json_to_dict(run_offline(run_config_from_json(dict_to_json(cfg))));
        },
        py::arg("config"));
}
