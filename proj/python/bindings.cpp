// Python bindings for coefficient sampling, meshing, the finite-volume
// solver and config-driven convergence studies.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "jumpflux/config.hpp"
#include "jumpflux/experiments.hpp"

namespace py = pybind11;
using namespace jumpflux;

namespace {

std::vector<double> eigenvalues_of(const KLBasis& b) {
  return {b.eigenvalues().data(), b.eigenvalues().data() + b.eigenvalues().size()};
}

py::dict error_record(const ErrorRecord& r) {
  py::dict d;
  d["sample"] = r.sample;
  d["strategy"] = to_string(r.strategy);
  d["integrator"] = to_string(r.integrator);
  d["level"] = r.level;
  d["cells"] = r.cells;
  d["min_h"] = r.min_h;
  d["L1"] = r.l1;
  d["L2"] = r.l2;
  d["wallclock_s"] = r.wallclock_s;
  d["steps"] = r.steps;
  return d;
}

py::dict report_dict(const ConvergenceReport& rep) {
  py::list errors, rates, failures;
  for (const auto& r : rep.errors) errors.append(error_record(r));
  for (const auto& r : rep.rates)
    rates.append(py::dict(py::arg("sample") = r.sample, py::arg("strategy") = to_string(r.strategy),
                          py::arg("integrator") = to_string(r.integrator), py::arg("norm") = to_string(r.norm),
                          py::arg("rate") = r.rate));
  for (const auto& f : rep.failures)
    failures.append(py::dict(py::arg("sample") = f.sample, py::arg("message") = f.message));
  py::dict d;
  d["errors"] = errors;
  d["rates"] = rates;
  d["failures"] = failures;
  return d;
}

}  // namespace

PYBIND11_MODULE(_jumpflux, m) {
  m.doc() = "Finite-volume solver for scalar conservation laws with random discontinuous flux coefficients";

  py::class_<Interval>(m, "Interval")
      .def(py::init([](double l, double r) { return Interval{l, r}; }), py::arg("left") = 0.0,
           py::arg("right") = 1.0)
      .def_readwrite("left", &Interval::left)
      .def_readwrite("right", &Interval::right);

  py::class_<CovarianceSpec>(m, "CovarianceSpec")
      .def(py::init([](double nu, double variance, double rho) {
             CovarianceSpec s;
             s.smoothness = nu;
             s.variance = variance;
             s.correlation_length = rho;
             return s;
           }),
           py::arg("smoothness") = 0.5, py::arg("variance") = 1.0, py::arg("correlation_length") = 0.1)
      .def_readwrite("smoothness", &CovarianceSpec::smoothness)
      .def_readwrite("variance", &CovarianceSpec::variance)
      .def_readwrite("correlation_length", &CovarianceSpec::correlation_length)
      .def_readwrite("domain", &CovarianceSpec::domain);

  m.def("matern_kernel", &matern_kernel, py::arg("spec"), py::arg("x"), py::arg("y"));

  py::class_<KLBasis, std::shared_ptr<KLBasis>>(m, "KLBasis")
      .def_property_readonly("cutoff", &KLBasis::cutoff)
      .def_property_readonly("eigenvalues", &eigenvalues_of)
      .def("eigenfunction", &KLBasis::eigenfunction, py::arg("i"), py::arg("x"));

  m.def(
      "nystrom_eigenpairs",
      [](const CovarianceSpec& spec, int n_quad, double energy_fraction) {
        return std::const_pointer_cast<KLBasis>(nystrom_eigenpairs_by_energy(spec, n_quad, energy_fraction));
      },
      py::arg("spec"), py::arg("n_quad") = 1024, py::arg("energy_fraction") = 0.999);

  py::class_<SampledCoefficient, std::shared_ptr<SampledCoefficient>>(m, "Coefficient")
      .def("__call__", &SampledCoefficient::operator(), py::arg("x"))
      .def("evaluate", [](const SampledCoefficient& a, const std::vector<double>& xs) { return a.evaluate(xs); })
      .def_property_readonly("discontinuities", &SampledCoefficient::discontinuities)
      .def_property_readonly("lower_bound", &SampledCoefficient::lower_bound)
      .def_property_readonly("upper_bound", &SampledCoefficient::upper_bound);

  m.def("preset_ids", &preset_ids);
  m.def(
      "sample_coefficient",
      [](const std::string& preset, std::uint64_t seed, std::uint64_t index, int n_quad) {
        PresetSpec spec = PresetSpec::defaults(preset);
        spec.n_quad = n_quad;
        const CoefficientSampler sampler(spec);
        RandomStream rng = make_stream(seed, index);
        return std::make_shared<SampledCoefficient>(sampler.sample(rng));
      },
      py::arg("preset"), py::arg("seed") = 0, py::arg("index") = 0, py::arg("n_quad") = 1024);
  m.def(
      "constant_coefficient", [](double value) { return std::make_shared<SampledCoefficient>(preset_constant(value)); },
      py::arg("value") = 1.0);

  py::class_<Mesh>(m, "Mesh")
      .def(py::init<std::vector<double>, std::vector<std::size_t>>(), py::arg("interfaces"),
           py::arg("flagged") = std::vector<std::size_t>{})
      .def_property_readonly("cells", &Mesh::cells)
      .def_property_readonly("interfaces", &Mesh::interfaces)
      .def_property_readonly("sizes", &Mesh::sizes)
      .def_property_readonly("centers", &Mesh::centers)
      .def_property_readonly("flagged", &Mesh::flagged)
      .def_property_readonly("min_h", &Mesh::min_h)
      .def_property_readonly("max_h", &Mesh::max_h);

  m.def(
      "build_mesh",
      [](const std::string& strategy, int cells, const std::vector<double>& jumps) {
        return build_mesh(mesh_strategy_from_string(strategy), cells, jumps);
      },
      py::arg("strategy"), py::arg("cells"), py::arg("jumps") = std::vector<double>{});

  m.def(
      "burgers_godunov_flux",
      [](double a_left, double a_right, double u_left, double u_right) {
        return godunov_flux_multiplicative_convex(a_left, a_right, ConvexFlux::burgers(), u_left, u_right);
      },
      py::arg("a_left"), py::arg("a_right"), py::arg("u_left"), py::arg("u_right"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_property(
          "integrator", [](const SolverConfig& c) { return std::string(to_string(c.integrator)); },
          [](SolverConfig& c, const std::string& s) { c.integrator = integrator_from_string(s); })
      .def_readwrite("cfl_number", &SolverConfig::cfl_number)
      .def_readwrite("t_end", &SolverConfig::t_end)
      .def_readwrite("newton_tol", &SolverConfig::newton_tol)
      .def_readwrite("newton_max_iter", &SolverConfig::newton_max_iter)
      .def_readwrite("implicit_dt", &SolverConfig::implicit_dt)
      .def_readwrite("output_times", &SolverConfig::output_times)
      .def_readwrite("record_all_steps", &SolverConfig::record_all_steps);

  py::class_<Solution>(m, "Solution")
      .def_readonly("times", &Solution::times)
      .def_readonly("states", &Solution::states)
      .def_readonly("steps", &Solution::steps)
      .def_readonly("flux_bound", &Solution::flux_bound)
      .def_property_readonly("final_state", &Solution::final_state)
      .def_property_readonly("mass", [](const Solution& s) {
        std::vector<double> out;
        out.reserve(s.mass_trace.size());
        for (const auto& r : s.mass_trace) out.push_back(r.mass);
        return out;
      });

  m.def(
      "solve",
      [](std::shared_ptr<SampledCoefficient> a, const Mesh& mesh, std::vector<double> initial_state,
         const SolverConfig& config) {
        py::gil_scoped_release release;
        return solve(FluxModel::burgers(std::move(a)), mesh, std::move(initial_state), config);
      },
      py::arg("coefficient"), py::arg("mesh"), py::arg("initial_state"), py::arg("config") = SolverConfig{});

  m.def(
      "sine_initial_state",
      [](const Mesh& mesh, double kappa) {
        InitialCondition ic;
        ic.kappa = kappa;
        return init_cell_averages(ic.function(), mesh);
      },
      py::arg("mesh"), py::arg("kappa") = 0.3);

  m.def("total_mass", [](const Mesh& mesh, const std::vector<double>& u) { return total_mass(mesh, u); });

  m.def(
      "fit_rate", [](const std::vector<double>& h, const std::vector<double>& e) { return fit_rate(h, e); },
      py::arg("h"), py::arg("errors"));

  m.def(
      "run_convergence",
      [](const std::filesystem::path& config, const std::vector<std::string>& overrides) {
        const RunConfig rc = load_config(config, overrides);
        ConvergenceReport rep;
        {
          py::gil_scoped_release release;
          rep = rc.kind == "time_to_error" ? run_time_to_error(rc.spec) : run_convergence(rc.spec);
        }
        return report_dict(rep);
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{});
}
