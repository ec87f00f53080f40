#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pvdrem/drem.hpp"
#include "pvdrem/errors.hpp"
#include "pvdrem/harness.hpp"
#include "pvdrem/mpp.hpp"
#include "pvdrem/pv_model.hpp"
#include "pvdrem/recovery.hpp"
#include "pvdrem/regressor.hpp"

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace pvdrem;

namespace {

ScenarioConfig preset_by_name(const std::string& name) {
    if (name == "paper-sec8") return ScenarioConfig::paper_sec8();
    if (name == "ramp-t4") return ScenarioConfig::ramp_t4();
    if (name == "ramp-t6g5") return ScenarioConfig::ramp_t6g5();
    throw domain_error("unknown preset: " + name);
}

py::dict series_to_dict(const RunArtifacts& artifacts) {
    std::vector<double> t, v_c, current, voltage, u, delta, exc, err, v_hat, v_star;
    t.reserve(artifacts.rows.size());
    for (const auto& row : artifacts.rows) {
        t.push_back(row.t);
        v_c.push_back(row.v_c);
        current.push_back(row.current);
        voltage.push_back(row.voltage);
        u.push_back(row.u);
        delta.push_back(row.delta);
        exc.push_back(row.excitation_integral);
        err.push_back(row.param_error_rel);
        v_hat.push_back(row.v_hat);
        v_star.push_back(row.v_star_true);
    }
    py::dict out;
    out["t"] = t;
    out["v_c"] = v_c;
    out["current"] = current;
    out["voltage"] = voltage;
    out["u"] = u;
    out["delta"] = delta;
    out["excitation_integral"] = exc;
    out["param_error_rel"] = err;
    out["v_hat"] = v_hat;
    out["v_star_true"] = v_star;
    return out;
}

} // namespace

PYBIND11_MODULE(_pvdrem, m) {
    m.doc() = "Online PV array identification and maximum-power-point tracking";

    py::class_<IVParams>(m, "IVParams")
        .def(py::init<>())
        .def(py::init([](double a1, double a2, double a3, double a4, double a5) {
                 return IVParams{a1, a2, a3, a4, a5};
             }),
             py::arg("a1"), py::arg("a2"), py::arg("a3"), py::arg("a4"),
             py::arg("a5"))
        .def_readwrite("a1", &IVParams::a1)
        .def_readwrite("a2", &IVParams::a2)
        .def_readwrite("a3", &IVParams::a3)
        .def_readwrite("a4", &IVParams::a4)
        .def_readwrite("a5", &IVParams::a5)
        .def("as_tuple",
             [](const IVParams& a) {
                 return py::make_tuple(a.a1, a.a2, a.a3, a.a4, a.a5);
             })
        .def("__repr__", [](const IVParams& a) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "IVParams(a1=%g, a2=%g, a3=%g, a4=%g, a5=%g)", a.a1, a.a2,
                          a.a3, a.a4, a.a5);
            return std::string(buf);
        });

    py::class_<ReferenceParams>(m, "ReferenceParams")
        .def(py::init<>())
        .def_readwrite("i_irr_ref", &ReferenceParams::i_irr_ref)
        .def_readwrite("i_0_ref", &ReferenceParams::i_0_ref)
        .def_readwrite("r_s_ref", &ReferenceParams::r_s_ref)
        .def_readwrite("r_p_ref", &ReferenceParams::r_p_ref)
        .def_readwrite("n_ref", &ReferenceParams::n_ref)
        .def_readwrite("n_series", &ReferenceParams::n_series)
        .def_readwrite("n_parallel", &ReferenceParams::n_parallel)
        .def_readwrite("alpha_t", &ReferenceParams::alpha_t)
        .def_readwrite("g_ref", &ReferenceParams::g_ref)
        .def_readwrite("t_ref", &ReferenceParams::t_ref);

    py::class_<EnvironmentState>(m, "EnvironmentState")
        .def(py::init<double, double>(), py::arg("temperature"),
             py::arg("irradiance"))
        .def_readwrite("temperature", &EnvironmentState::temperature)
        .def_readwrite("irradiance", &EnvironmentState::irradiance);

    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def_readwrite("i_irr", &PhysicalParams::i_irr)
        .def_readwrite("i_0", &PhysicalParams::i_0)
        .def_readwrite("n", &PhysicalParams::n)
        .def_readwrite("r_s", &PhysicalParams::r_s)
        .def_readwrite("r_p", &PhysicalParams::r_p);

    py::enum_<BandgapModel>(m, "BandgapModel")
        .value("Linear", BandgapModel::Linear)
        .value("Quadratic", BandgapModel::Quadratic);

    m.def("paper_sec8_a", &paper_sec8_a,
          "Reference lumped parameter vector of the simulated array");
    m.def("env_params", &env_params, py::arg("reference"), py::arg("environment"),
          py::arg("bandgap") = BandgapModel::Linear,
          "Lumped IV parameters for an environment");
    m.def("a_to_physical", &a_to_physical, py::arg("a"), py::arg("temperature"),
          py::arg("n_series"), py::arg("n_parallel"));
    m.def("physical_to_a", &physical_to_a, py::arg("p"), py::arg("temperature"),
          py::arg("n_series"), py::arg("n_parallel"));
    m.def("solve_current", &solve_current, py::arg("a"), py::arg("voltage"),
          py::arg("hint") = 0.0, "Array current at a voltage (implicit solve)");
    m.def("open_circuit_voltage", &open_circuit_voltage, py::arg("a"));
    m.def(
        "iv_curve",
        [](const IVParams& a, const std::vector<double>& grid) {
            py::list out;
            for (const auto& pt : iv_curve(a, grid)) {
                out.append(py::make_tuple(pt.voltage, pt.current, pt.power));
            }
            return out;
        },
        py::arg("a"), py::arg("v_grid"), "List of (V, I, P) tuples");

    py::class_<ThetaParams>(m, "ThetaParams")
        .def_readonly("theta1", &ThetaParams::theta1)
        .def_readonly("theta2", &ThetaParams::theta2)
        .def_readonly("theta3", &ThetaParams::theta3)
        .def_readonly("theta4", &ThetaParams::theta4)
        .def_readonly("theta5", &ThetaParams::theta5)
        .def_readonly("b1", &ThetaParams::b1)
        .def_readonly("b2", &ThetaParams::b2)
        .def_readonly("b3", &ThetaParams::b3)
        .def("as_tuple", [](const ThetaParams& th) {
            return py::make_tuple(th.theta1, th.theta2, th.theta3, th.theta4,
                                  th.theta5);
        });

    m.def("map_a_to_theta", &map_a_to_theta, py::arg("a"),
          "Linear regression parameters for a lumped vector");
    m.def(
        "map_theta_to_a",
        [](double th1, double th2, double th3, double th4, double voltage,
           double current) -> std::optional<IVParams> {
            return map_theta_to_a({th1, th2, th3, th4}, voltage, current);
        },
        py::arg("theta1"), py::arg("theta2"), py::arg("theta3"), py::arg("theta4"),
        py::arg("voltage"), py::arg("current"),
        "Recovered lumped vector, or None when a singularity guard trips");

    py::class_<MppParams>(m, "MppParams")
        .def_static("from_iv", &MppParams::from_iv)
        .def_readwrite("b1", &MppParams::b1)
        .def_readwrite("b2", &MppParams::b2)
        .def_readwrite("b3", &MppParams::b3)
        .def_readwrite("a3", &MppParams::a3)
        .def_readwrite("a4", &MppParams::a4);

    py::class_<MppPoint>(m, "MppPoint")
        .def_readonly("voltage", &MppPoint::voltage)
        .def_readonly("current", &MppPoint::current)
        .def_readonly("power", &MppPoint::power)
        .def("__repr__", [](const MppPoint& p) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "MppPoint(V=%.4f, I=%.4f, P=%.2f)",
                          p.voltage, p.current, p.power);
            return std::string(buf);
        });

    m.def("locate_mpp", &locate_mpp, py::arg("a"), py::arg("v_max") = 0.0,
          py::arg("n_grid") = 512,
          "Maximum power point from the power-derivative sign change");
    m.def("argmax_power", &argmax_power, py::arg("a"), py::arg("v_max") = 0.0,
          "Plain argmax of V * I(V) by golden section");
    m.def(
        "mpp_gradient",
        [](const MppParams& p, double v) { return mpp_gradient(p, v).value; },
        py::arg("params"), py::arg("voltage"));

    py::enum_<ExcitationVerdict>(m, "ExcitationVerdict")
        .value("Excited", ExcitationVerdict::Excited)
        .value("Marginal", ExcitationVerdict::Marginal)
        .value("Unexcited", ExcitationVerdict::Unexcited);

    py::class_<RunMetrics>(m, "RunMetrics")
        .def_readonly("label", &RunMetrics::label)
        .def_readonly("success", &RunMetrics::success)
        .def_readonly("diagnostic", &RunMetrics::diagnostic)
        .def_readonly("final_param_error_abs", &RunMetrics::final_param_error_abs)
        .def_readonly("final_param_error_rel", &RunMetrics::final_param_error_rel)
        .def_readonly("final_vstar_error", &RunMetrics::final_vstar_error)
        .def_readonly("time_to_param_threshold",
                      &RunMetrics::time_to_param_threshold)
        .def_readonly("time_to_vstar_band", &RunMetrics::time_to_vstar_band)
        .def_readonly("verdict", &RunMetrics::verdict);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_static("preset", &preset_by_name, py::arg("name"),
                    "paper-sec8, ramp-t4 or ramp-t6g5")
        .def_readwrite("dt", &ScenarioConfig::dt)
        .def_readwrite("horizon", &ScenarioConfig::horizon)
        .def_readwrite("label", &ScenarioConfig::label)
        .def_readwrite("out_dir", &ScenarioConfig::out_dir)
        .def_readwrite("gamma_v", &ScenarioConfig::gamma_v)
        .def_readwrite("v_hat0", &ScenarioConfig::v_hat0)
        .def("set", &apply_override, py::arg("key"), py::arg("value"),
             "Apply a dotted config override, e.g. set('drem.gain', '5')")
        .def("truth_at", &ScenarioConfig::truth_at, py::arg("t"));

    m.def("parse_config_file", &parse_config_file, py::arg("path"));
    m.def(
        "run",
        [](const ScenarioConfig& cfg) { return pvdrem::run(cfg); },
        py::arg("config"), "Run a scenario and return its metrics");
    m.def(
        "run_series",
        [](const ScenarioConfig& cfg) {
            RunArtifacts artifacts;
            const RunMetrics metrics = pvdrem::run(cfg, &artifacts);
            return py::make_tuple(metrics, series_to_dict(artifacts));
        },
        py::arg("config"), "Run a scenario and return (metrics, logged series)");
}
