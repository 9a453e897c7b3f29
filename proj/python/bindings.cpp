#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "replica_mud/errors.hpp"
#include "replica_mud/gauss_quad.hpp"
#include "replica_mud/linear_turbo.hpp"
#include "replica_mud/mc_lab.hpp"
#include "replica_mud/replica_solvers.hpp"
#include "replica_mud/sweep.hpp"
#include "replica_mud/training_designer.hpp"

namespace py = pybind11;
using namespace rmud;

PYBIND11_MODULE(_replica_mud, m) {
  m.doc() = "Replica analysis and Monte Carlo checks of CDMA multiuser detection with channel-estimation error";

  static py::exception<ConvergenceFailure> convergence(m, "ConvergenceFailure", PyExc_RuntimeError);
  static py::exception<ResourceLimit> resource(m, "ResourceLimit", PyExc_RuntimeError);
  static py::exception<NumericFailure> numeric(m, "NumericFailure", PyExc_ArithmeticError);
  static py::exception<DomainError> domain(m, "DomainError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConvergenceFailure& e) {
      py::set_error(convergence, e.what());
    } catch (const ResourceLimit& e) {
      py::set_error(resource, e.what());
    } catch (const NumericFailure& e) {
      py::set_error(numeric, e.what());
    } catch (const DomainError& e) {
      py::set_error(domain, e.what());
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::enum_<Estimator>(m, "Estimator").value("ML", Estimator::kMl).value("MMSE", Estimator::kMmse);
  py::enum_<Mode>(m, "Mode")
      .value("PERFECT", Mode::kPerfect)
      .value("DIRECT", Mode::kDirect)
      .value("COMPENSATED", Mode::kCompensated);
  py::enum_<CompensatedMmseForm>(m, "CompensatedMmseForm")
      .value("CONSISTENT", CompensatedMmseForm::kConsistent)
      .value("AS_PRINTED", CompensatedMmseForm::kAsPrinted);
  py::enum_<Integrand>(m, "Integrand")
      .value("TANH", Integrand::kTanh)
      .value("TANH_SQ", Integrand::kTanhSq)
      .value("LOG_COSH", Integrand::kLogCosh);
  py::enum_<CodeModel>(m, "CodeModel")
      .value("CONVOLUTION", CodeModel::kConvolution)
      .value("INDEPENDENT", CodeModel::kIndependent);
  py::enum_<Detector>(m, "Detector")
      .value("IO_EXACT", Detector::kIoExact)
      .value("LINEAR_MMSE", Detector::kLinearMmse)
      .value("MF", Detector::kMf);
  py::enum_<FilterKind>(m, "FilterKind")
      .value("UNCONDITIONAL", FilterKind::kUnconditional)
      .value("CONDITIONAL", FilterKind::kConditional)
      .value("ORACLE", FilterKind::kOracle);

  m.def("gauss_expect", [](Integrand kind, double E, double F, std::size_t panel_order) {
    return resolved_expect(kind, E, F, panel_order);
  }, py::arg("kind"), py::arg("E"), py::arg("F"), py::arg("panel_order") = kDefaultPanelOrder);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init([](double beta, double sigma_n2, double delta_h2, std::optional<double> sigma2) {
             return SystemParams{beta, sigma_n2, delta_h2, sigma2.value_or(sigma_n2)};
           }),
           py::arg("beta") = 0.5, py::arg("sigma_n2") = 0.2, py::arg("delta_h2") = 0.0,
           py::arg("sigma2") = py::none())
      .def_readwrite("beta", &SystemParams::beta)
      .def_readwrite("sigma_n2", &SystemParams::sigma_n2)
      .def_readwrite("delta_h2", &SystemParams::delta_h2)
      .def_readwrite("sigma2", &SystemParams::sigma2);

  py::class_<ReceiverSpec>(m, "ReceiverSpec")
      .def(py::init<Estimator, Mode, CompensatedMmseForm>(), py::arg("estimator") = Estimator::kMl,
           py::arg("mode") = Mode::kPerfect, py::arg("cmmse_form") = CompensatedMmseForm::kConsistent)
      .def_readwrite("estimator", &ReceiverSpec::estimator)
      .def_readwrite("mode", &ReceiverSpec::mode)
      .def_readwrite("cmmse_form", &ReceiverSpec::cmmse_form);

  py::class_<ReplicaState>(m, "ReplicaState")
      .def(py::init<double, double, double, double>(), py::arg("m") = 0.0, py::arg("q") = 0.0,
           py::arg("E") = 0.0, py::arg("F") = 0.0)
      .def_readwrite("m", &ReplicaState::m)
      .def_readwrite("q", &ReplicaState::q)
      .def_readwrite("E", &ReplicaState::E)
      .def_readwrite("F", &ReplicaState::F)
      .def("__repr__", [](const ReplicaState& s) {
        std::ostringstream o;
        o << "ReplicaState(m=" << s.m << ", q=" << s.q << ", E=" << s.E << ", F=" << s.F << ")";
        return o.str();
      });

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("tol", &SolverConfig::tol)
      .def_readwrite("max_iter", &SolverConfig::max_iter)
      .def_readwrite("damping", &SolverConfig::damping)
      .def_readwrite("quad_order", &SolverConfig::quad_order)
      .def_readwrite("init", &SolverConfig::init);

  m.def("solve_fixed_point", &solve_fixed_point, py::arg("params"), py::arg("spec"),
        py::arg("cfg") = SolverConfig{});
  m.def("solve_all_branches", [](const SystemParams& p, const ReceiverSpec& s, const SolverConfig& cfg) {
    const auto set = solve_all_branches(p, s, cfg);
    return py::make_tuple(set.branches, set.free_energies, set.selected);
  }, py::arg("params"), py::arg("spec"), py::arg("cfg") = SolverConfig{},
        "Returns (branches, free_energies, selected_index).");
  m.def("ber", py::overload_cast<const ReplicaState&>(&ber), py::arg("state"));
  m.def("sinr", &sinr, py::arg("params"), py::arg("spec"), py::arg("state"));
  m.def("multiuser_efficiency", &multiuser_efficiency, py::arg("params"), py::arg("estimator"),
        py::arg("cfg") = SolverConfig{});
  m.def("free_energy", &free_energy, py::arg("params"), py::arg("spec"), py::arg("state"));

  py::class_<LinearReplicaState>(m, "LinearReplicaState")
      .def_readonly("m", &LinearReplicaState::m)
      .def_readonly("q", &LinearReplicaState::q)
      .def_readonly("p", &LinearReplicaState::p)
      .def_readonly("E", &LinearReplicaState::E)
      .def_readonly("F", &LinearReplicaState::F)
      .def_readonly("G", &LinearReplicaState::G);

  py::class_<PowerPoint>(m, "PowerPoint")
      .def(py::init<double, double, double>(), py::arg("p_true"), py::arg("p_est"), py::arg("weight"))
      .def_readwrite("p_true", &PowerPoint::p_true)
      .def_readwrite("p_est", &PowerPoint::p_est)
      .def_readwrite("weight", &PowerPoint::weight);

  py::class_<PowerDistribution>(m, "PowerDistribution")
      .def(py::init<std::vector<PowerPoint>>(), py::arg("points"))
      .def_static("equal_power", &PowerDistribution::equal_power)
      .def_static("rayleigh", &PowerDistribution::rayleigh, py::arg("n") = 64)
      .def_static("from_raw", &PowerDistribution::from_raw, py::arg("raw"), py::arg("scale"))
      .def_property_readonly("points", &PowerDistribution::points)
      .def("mean_true", &PowerDistribution::mean_true)
      .def("mean_est", &PowerDistribution::mean_est);

  py::class_<FeedbackModel>(m, "FeedbackModel")
      .def(py::init<double, FilterKind>(), py::arg("delta_b2") = 1.0,
           py::arg("filter_kind") = FilterKind::kUnconditional)
      .def_readwrite("delta_b2", &FeedbackModel::delta_b2)
      .def_readwrite("filter_kind", &FeedbackModel::filter_kind);

  m.def("solve_linear", &solve_linear, py::arg("params"), py::arg("mode"),
        py::arg("cfg") = SolverConfig{}, py::arg("estimator") = Estimator::kMl);
  m.def("compensated_linear_efficiency", &compensated_linear_efficiency, py::arg("params"),
        py::arg("tol") = 1e-15);
  m.def("solve_pic", &solve_pic, py::arg("params"), py::arg("powers"), py::arg("feedback"),
        py::arg("cfg") = SolverConfig{});
  m.def("linear_ber", &linear_ber, py::arg("state"));
  m.def("pic_ber", &pic_ber, py::arg("state"), py::arg("feedback"));
  m.def("linear_efficiency", &linear_efficiency, py::arg("state"), py::arg("noise"));
  m.def("pic_efficiency", &pic_efficiency, py::arg("params"), py::arg("feedback"), py::arg("state"));
  m.def("solve_flat_fading", &solve_flat_fading, py::arg("beta"), py::arg("sigma_n2"),
        py::arg("power_law"), py::arg("mismatched"), py::arg("cfg") = SolverConfig{});

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("K", &Scenario::K)
      .def_readwrite("N", &Scenario::N)
      .def_readwrite("P", &Scenario::P)
      .def_readwrite("sigma_n2", &Scenario::sigma_n2)
      .def_readwrite("delta_h2", &Scenario::delta_h2)
      .def_readwrite("code_model", &Scenario::code_model)
      .def_readwrite("estimator", &Scenario::estimator)
      .def_readwrite("seed", &Scenario::seed);

  py::class_<Instance>(m, "Instance")
      .def_readonly("true_codes", &Instance::true_codes)
      .def_readonly("est_codes", &Instance::est_codes)
      .def_readonly("noise_scale", &Instance::noise_scale);

  py::class_<McResult>(m, "McResult")
      .def_readonly("ber", &McResult::ber)
      .def_readonly("trials", &McResult::trials)
      .def_readonly("std_err", &McResult::std_err);

  m.def("generate_instance", &generate_instance, py::arg("scenario"), py::arg("index") = 0);
  m.def("simulate_symbol",
        [](const Instance& inst, const std::vector<int>& bits, std::uint64_t seed) {
          return simulate_symbol(inst, bits, seed);
        },
        py::arg("instance"), py::arg("bits"), py::arg("noise_seed"));
  m.def("detect_io", &detect_io, py::arg("instance"), py::arg("received"), py::arg("mode"),
        py::arg("estimator"), py::arg("sigma2_override") = py::none());
  m.def("detect_linear_mmse", &detect_linear_mmse, py::arg("instance"), py::arg("received"),
        py::arg("mode"));
  m.def("run_ber_experiment", &run_ber_experiment, py::arg("scenario"), py::arg("detector"),
        py::arg("mode"), py::arg("trials"), py::arg("instance_redraws"), py::arg("workers") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<TrainingProblem>(m, "TrainingProblem")
      .def(py::init([](int M, double snr_db, double beta, std::size_t alpha_grid, bool bits) {
             return TrainingProblem{M, snr_db, beta, alpha_grid, bits};
           }),
           py::arg("coherence_time") = 100, py::arg("snr_db") = 5.0, py::arg("beta") = 0.5,
           py::arg("alpha_grid") = 200, py::arg("bits") = false)
      .def_readwrite("coherence_time", &TrainingProblem::coherence_time)
      .def_readwrite("snr_db", &TrainingProblem::snr_db)
      .def_readwrite("beta", &TrainingProblem::beta)
      .def_readwrite("alpha_grid", &TrainingProblem::alpha_grid)
      .def_readwrite("bits", &TrainingProblem::bits);
  m.def("spectral_efficiency", &spectral_efficiency, py::arg("problem"), py::arg("alpha"));
  m.def("optimize_alpha", [](const TrainingProblem& p) {
    const auto o = optimize_alpha(p);
    return py::make_tuple(o.alpha_star, o.value);
  }, py::arg("problem"), "Returns (alpha_star, value).");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command line front end; returns (exit_code, stdout, stderr).");
}
