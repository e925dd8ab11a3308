#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <memory>
#include <optional>

#include "nhsta/adiabatic.hpp"
#include "nhsta/dynamics.hpp"
#include "nhsta/errors.hpp"
#include "nhsta/optomech.hpp"
#include "nhsta/robustness.hpp"
#include "nhsta/spectrum.hpp"
#include "nhsta/sta.hpp"

namespace py = pybind11;
using namespace nhsta;
using PathPtr = std::shared_ptr<AdiabaticPath>;  // pybind11 holders cannot be const

namespace {

using Matrix = std::array<std::array<cplx, 2>, 2>;

Matrix to_py(const ComplexMatrix2& m) { return {{{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}}; }

Mode mode_of(const std::string& s) {
    if (s == "minus" || s == "-") return Mode::Minus;
    if (s == "plus" || s == "+") return Mode::Plus;
    throw ConfigError("mode must be 'minus' or 'plus'");
}

// Probabilities P_ij on a grid; p[k][i][j] with index 0 = minus.
py::dict propagate(const Protocol& p, const PathPtr& path, std::size_t points, double rtol) {
    if (points < 2) throw ConfigError("points must be >= 2");
    const std::vector<double> times = uniform_grid(path->duration(), points);
    IntegratorOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-2 * rtol;
    Flow f;
    {
        py::gil_scoped_release release;
        f = integrate_flow(p.generator(), times, opt);
    }
    const ProbabilityTrace tr = transition_probabilities(f, frames_on(*path, f.times));
    std::vector<Matrix> flow;
    for (std::size_t k = 0; k < f.times.size(); ++k) flow.push_back(to_py(f.true_flow(k)));
    py::dict d;
    d["times"] = f.times;
    d["probabilities"] = tr.p;
    d["flow"] = flow;
    d["unitarity_defect"] = unitarity_defect(f.true_flow(f.times.size() - 1));
    return d;
}

}  // namespace

PYBIND11_MODULE(_nhsta, m) {
    m.doc() = "Shortcuts to adiabaticity for non-Hermitian two-level systems";
    m.attr("__version__") = NHSTA_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidStaError>(m, "InvalidStaError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    py::class_<CircularLoop>(m, "CircularLoop")
        .def(py::init([](double delta0, double omega0, double gamma0, double phi, int d) {
                 CircularLoop l{delta0, omega0, gamma0, phi, d};
                 l.validate();
                 return l;
             }),
             py::arg("delta0") = 0.5, py::arg("omega0") = 0.5, py::arg("gamma0") = 1.0, py::arg("phi") = 0.0,
             py::arg("d") = 1)
        .def_readwrite("delta0", &CircularLoop::delta0)
        .def_readwrite("omega0", &CircularLoop::omega0)
        .def_readwrite("gamma0", &CircularLoop::gamma0)
        .def_readwrite("phi", &CircularLoop::phi)
        .def_readwrite("d", &CircularLoop::d)
        .def("point", [](const CircularLoop& l, double eps) {
            const ParamPoint p = loop_point(l, eps);
            return py::make_tuple(p.delta, p.omega, p.gamma);
        });

    py::class_<Schedule>(m, "Schedule")
        .def(py::init([](double t0, int d) {
                 Schedule s{t0, d};
                 s.validate();
                 return s;
             }),
             py::arg("t0"), py::arg("d") = 1)
        .def_readwrite("t0", &Schedule::t0)
        .def_readwrite("d", &Schedule::d);

    py::class_<Mask>(m, "Mask")
        .def(py::init([](double A, double nu, int n) {
                 Mask k{A, nu, n};
                 k.validate();
                 return k;
             }),
             py::arg("A"), py::arg("nu"), py::arg("n"))
        .def_readwrite("A", &Mask::A)
        .def_readwrite("nu", &Mask::nu)
        .def_readwrite("n", &Mask::n)
        .def("value", &Mask::value, py::arg("t"), py::arg("t0"));

    m.def(
        "eigenvalues",
        [](double delta, double omega, double gamma) {
            const HoloSpectrum s = holomorphic_eigenvalues(ParamPoint{delta, omega, gamma}, 0.0);
            return py::make_tuple(s.lambda_plus, s.lambda_minus);
        },
        py::arg("delta"), py::arg("omega"), py::arg("gamma"), "principal (lambda_plus, lambda_minus)");
    m.def(
        "is_ep", [](double delta, double omega, double gamma) { return is_ep(ParamPoint{delta, omega, gamma}); },
        py::arg("delta"), py::arg("omega"), py::arg("gamma"));

    py::class_<AdiabaticPath, PathPtr>(m, "AdiabaticPath")
        .def(py::init([](const CircularLoop& l, const Schedule& s, std::size_t grid) {
                 return std::make_shared<AdiabaticPath>(l, s, grid);
             }),
             py::arg("loop"), py::arg("schedule"), py::arg("grid_size") = kDefaultGridSize)
        .def_property_readonly("duration", &AdiabaticPath::duration)
        .def_property_readonly("sqrt_crossings", [](const AdiabaticPath& p) { return p.sheet().crossings; })
        .def("eigenvalue", [](const AdiabaticPath& p, double t) { return p.at(t).lambda; }, py::arg("t"),
             "holomorphic lambda_plus(t); lambda_minus = -lambda_plus")
        .def("theta", [](const AdiabaticPath& p, double t) { return p.at(t).theta; }, py::arg("t"))
        .def("hamiltonian", [](const AdiabaticPath& p, double t) { return to_py(p.hamiltonian(t)); }, py::arg("t"))
        .def("frame", [](const AdiabaticPath& p, double t) { return to_py(p.frame(t)); }, py::arg("t"));

    py::class_<Protocol>(m, "Protocol")
        .def_property_readonly("kind", [](const Protocol& p) { return to_string(p.kind); })
        .def_readonly("times", &Protocol::times)
        .def_property_readonly("fields",
                               [](const Protocol& p) {
                                   std::vector<std::array<cplx, 3>> out;
                                   for (const auto& f : p.fields) out.push_back({f.x, f.y, f.z});
                                   return out;
                               })
        .def_property_readonly("correction",
                               [](const Protocol& p) {
                                   std::vector<std::array<cplx, 3>> out;
                                   for (const auto& f : p.correction) out.push_back({f.x, f.y, f.z});
                                   return out;
                               })
        .def("hamiltonian", [](const Protocol& p, double t) { return to_py(p.hamiltonian(t)); }, py::arg("t"))
        .def("__len__", &Protocol::size);

    m.def("rms", &rms);
    m.def("correction_rms", &correction_rms);
    m.def("concatenate", py::overload_cast<const Protocol&, const Protocol&, double>(&concatenate), py::arg("a"), py::arg("b"), py::arg("tol") = 1e-9);

    py::class_<DressingAngle>(m, "DressingAngle")
        .def_readonly("times", &DressingAngle::times)
        .def_readonly("mu", &DressingAngle::mu)
        .def_readonly("valid", &DressingAngle::valid)
        .def_readonly("n_crossings", &DressingAngle::n_crossings)
        .def_readonly("mask", &DressingAngle::mask)
        .def_property_readonly("mu_end_over_pi", &DressingAngle::mu_end_over_pi);

    m.def("uncorrected_protocol", [](const PathPtr& p) { return uncorrected_protocol(p); }, py::arg("path"));
    m.def("td_correction", [](const PathPtr& p) { return td_correction(p); }, py::arg("path"));
    m.def(
        "dressing_angle",
        [](const PathPtr& path, std::optional<Mask> mask) { return dressing_angle(path, mask.value_or(Mask{})); },
        py::arg("path"), py::arg("mask") = py::none(), "SATD without a mask, RADD with one");
    m.def("satd_fields", &satd_fields, py::arg("dressing"), "raises InvalidStaError for an invalid dressing");

    py::class_<RaddRanges>(m, "RaddRanges")
        .def(py::init<>())
        .def_readwrite("a_min", &RaddRanges::a_min)
        .def_readwrite("a_max", &RaddRanges::a_max)
        .def_readwrite("a_steps", &RaddRanges::a_steps)
        .def_readwrite("nu_min_frac", &RaddRanges::nu_min_frac)
        .def_readwrite("nu_max_frac", &RaddRanges::nu_max_frac)
        .def_readwrite("nu_steps", &RaddRanges::nu_steps)
        .def_readwrite("n_min", &RaddRanges::n_min)
        .def_readwrite("n_max", &RaddRanges::n_max)
        .def_readwrite("refine_rounds", &RaddRanges::refine_rounds)
        .def_readwrite("search_grid_size", &RaddRanges::search_grid_size);

    py::class_<RaddResult>(m, "RaddResult")
        .def_readonly("mask", &RaddResult::mask)
        .def_readonly("rms", &RaddResult::rms)
        .def_readonly("protocol", &RaddResult::protocol)
        .def_readonly("dressing", &RaddResult::dressing)
        .def_readonly("candidates", &RaddResult::candidates)
        .def_readonly("valid_candidates", &RaddResult::valid_candidates)
        .def_property_readonly("path", [](const RaddResult& r) { return std::const_pointer_cast<AdiabaticPath>(r.dressing.model->path_ptr()); });

    m.def(
        "radd_optimize",
        [](const CircularLoop& l, const Schedule& s, const RaddRanges& r, std::size_t grid, int jobs) {
            py::gil_scoped_release release;
            return radd_optimize(l, s, r, grid, jobs);
        },
        py::arg("loop"), py::arg("schedule"), py::arg("ranges") = RaddRanges{},
        py::arg("grid_size") = kDefaultGridSize, py::arg("jobs") = 1);

    m.def("propagate", &propagate, py::arg("protocol"), py::arg("path"), py::arg("points") = 2,
          py::arg("rtol") = 1e-10, "flow and P_ij on a uniform grid; index 0 is the minus mode");
    m.def("ep_encircle_check", py::overload_cast<const Protocol&>(&ep_encircle_check), py::arg("protocol"));
    m.def(
        "spectral_swap",
        [](const Protocol& p) {
            const double t0 = p.duration();
            return braid_criteria(braid_trace(concatenate(p, p)), t0).swap();
        },
        py::arg("protocol"), "eigenvalue swap of H(t) after one loop, from the doubled-loop criteria");

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init([](double beta, int order) {
                 NoiseModel n{beta, order};
                 n.validate();
                 return n;
             }),
             py::arg("beta") = 0.05, py::arg("order") = 15)
        .def_readwrite("beta", &NoiseModel::beta)
        .def_readwrite("quadrature_order", &NoiseModel::quadrature_order);

    m.def(
        "noise_averaged_error",
        [](const Protocol& p, const PathPtr& path, const std::string& i, const std::string& j, const NoiseModel& n,
           int jobs) {
            const Mode a = mode_of(i), b = mode_of(j);
            py::gil_scoped_release release;
            return noise_averaged_error(p, *path, a, b, n, {}, jobs);
        },
        py::arg("protocol"), py::arg("path"), py::arg("i") = "minus", py::arg("j") = "minus",
        py::arg("noise") = NoiseModel{}, py::arg("jobs") = 1);
    m.def(
        "noise_averaged_error_adaptive",
        [](const Protocol& p, const PathPtr& path, const std::string& i, const std::string& j, double beta,
           double rel_tol) {
            const Mode a = mode_of(i), b = mode_of(j);
            py::gil_scoped_release release;
            return noise_averaged_error_adaptive(p, *path, a, b, beta, rel_tol).error;
        },
        py::arg("protocol"), py::arg("path"), py::arg("i") = "minus", py::arg("j") = "minus", py::arg("beta") = 0.05,
        py::arg("rel_tol") = 1e-6);

    py::class_<OptomechParams>(m, "OptomechParams")
        .def(py::init<>())
        .def_readwrite("omega_mech", &OptomechParams::omega_mech)
        .def_readwrite("gamma_mech", &OptomechParams::gamma_mech)
        .def_readwrite("g", &OptomechParams::g)
        .def_readwrite("kappa", &OptomechParams::kappa)
        .def_readwrite("kappa_in", &OptomechParams::kappa_in)
        .def_readwrite("P_L", &OptomechParams::P_L)
        .def_readwrite("Omega_L", &OptomechParams::Omega_L)
        .def_readwrite("delta0", &OptomechParams::delta0);
    m.def("susceptibility", &susceptibility, py::arg("params"));
    m.def(
        "effective_hamiltonian", [](const OptomechParams& p) { return to_py(effective_hamiltonian(p)); },
        py::arg("params"));
    m.def("optomech_protocol", &optomech_protocol, py::arg("times"), py::arg("P_L"), py::arg("delta0"),
          py::arg("params"));
    m.def(
        "invert_controls",
        [](const Protocol& target, const OptomechParams& fixed, const std::string& branch, bool strict) {
            InversionOptions opt;
            if (branch == "upper")
                opt.branch = DetuningBranch::Upper;
            else if (branch != "lower")
                throw ConfigError("branch must be 'lower' or 'upper'");
            opt.strict = strict;
            const ControlSchedule s = invert_controls(target, fixed, opt);
            py::dict d;
            d["times"] = s.times;
            d["P_L"] = s.P_L;
            d["delta0"] = s.delta0;
            d["residual"] = s.residual;
            d["feasible"] = s.feasible;
            return d;
        },
        py::arg("target"), py::arg("params"), py::arg("branch") = "lower", py::arg("strict") = false);
}
