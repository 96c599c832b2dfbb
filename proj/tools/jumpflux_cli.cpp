// jumpflux: run solves, Monte Carlo convergence studies, parameter sweeps
// and coefficient sampling from a JSON experiment config.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jumpflux/config.hpp"
#include "jumpflux/csv.hpp"
#include "jumpflux/entropy.hpp"
#include "jumpflux/experiments.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace jumpflux;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool force = false;
  std::vector<std::string> overrides;
};

class Manifest {
 public:
  Manifest(fs::path dir, std::string command, const RunConfig& rc) : dir_(std::move(dir)) {
    doc_["command"] = std::move(command);
    doc_["experiment"] = rc.experiment_id;
    doc_["seed"] = rc.spec.seed;
    doc_["status"] = "running";
    doc_["config"] = rc.resolved;
  }

  void mark(const std::string& status, const std::string& message = {}) {
    doc_["status"] = status;
    if (!message.empty()) doc_["message"] = message;
    write();
  }

  void write() const {
    const fs::path tmp = dir_ / "manifest.json.tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
      out << doc_.dump(2) << '\n';
    }
    fs::rename(tmp, dir_ / "manifest.json");
  }

 private:
  fs::path dir_;
  json doc_;
};

fs::path output_dir(const Options& opt, const RunConfig& rc) {
  if (!opt.out.empty()) return opt.out;
  const char* root = std::getenv("JUMPFLUX_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / rc.experiment_id;
}

// Creates the output directory; refuses to reuse one holding a completed run.
void prepare_output(const fs::path& dir, bool force) {
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest) && !force) {
    std::ifstream in(manifest);
    const json doc = json::parse(in, nullptr, false);
    if (!doc.is_discarded() && doc.value("status", "") == "complete")
      throw std::runtime_error("output directory '" + dir.string() +
                               "' holds a completed run; pass --force to overwrite");
  }
  fs::create_directories(dir);
}

void cmd_solve(const RunConfig& rc, const fs::path& dir) {
  const ExperimentSpec& spec = rc.spec;
  const CoefficientSampler sampler(spec.preset);
  RandomStream rng = make_stream(spec.seed, 0);
  auto coefficient = std::make_shared<const SampledCoefficient>(sampler.sample(rng));
  const FluxModel flux = FluxModel::burgers(coefficient);
  const Mesh mesh = build_mesh(rc.solve_strategy, rc.solve_cells, coefficient->discontinuities(), spec.preset.domain);

  SolverConfig config = spec.solver;
  config.integrator = spec.integrators.front();
  config.record_all_steps = config.record_all_steps || rc.entropy.enabled;
  const Solution sol = solve(flux, mesh, spec.initial.function(), config);

  {
    auto out = open_csv(dir / "mesh.csv");
    mesh.write_csv(out);
  }
  {
    auto out = open_csv(dir / "coefficient.csv");
    out << "x,a\n";
    const auto a = coefficient->evaluate(mesh.centers());
    for (std::size_t i = 0; i < a.size(); ++i)
      out << format_double(mesh.centers()[i]) << ',' << format_double(a[i]) << '\n';
  }
  {
    auto out = open_csv(dir / "snapshots.csv");
    if (config.record_all_steps) {
      Solution stored = sol;
      std::vector<double> keep_t;
      std::vector<std::vector<double>> keep_u;
      const std::vector<double>& wanted = config.output_times;
      for (std::size_t k = 0; k < sol.times.size(); ++k) {
        bool hit = k == 0 || k + 1 == sol.times.size();
        for (double t : wanted) hit = hit || std::abs(sol.times[k] - t) <= 1e-12 * std::max(1.0, t);
        if (hit) {
          keep_t.push_back(sol.times[k]);
          keep_u.push_back(sol.states[k]);
        }
      }
      stored.times = std::move(keep_t);
      stored.states = std::move(keep_u);
      stored.write_snapshots_csv(out);
    } else {
      sol.write_snapshots_csv(out);
    }
  }
  {
    auto out = open_csv(dir / "mass.csv");
    sol.write_mass_csv(out);
  }
  if (rc.entropy.enabled) {
    std::vector<EntropyRecord> rows;
    for (double alpha : log_spaced(rc.entropy.alpha_min, rc.entropy.alpha_max, rc.entropy.alpha_count)) {
      const SteadyState steady(flux, alpha, rc.entropy.branch);
      for (const auto& phi : rc.entropy.test_functions)
        rows.push_back({alpha, phi.id, entropy_functional_discrete(sol, flux, steady, phi), mesh.cells()});
    }
    auto out = open_csv(dir / "entropy.csv");
    write_entropy_csv(out, rows);
  }
  std::cout << "solve: " << mesh.cells() << " cells, " << sol.steps << " steps, t = " << sol.final_time() << '\n';
}

void report_failures(const ConvergenceReport& report) {
  if (!report.failures.empty())
    std::cerr << "warning: " << report.failures.size() << " of " << report.spec.samples
              << " samples failed and were excluded (see failures.csv)\n";
}

void cmd_convergence(const RunConfig& rc, const fs::path& dir) {
  const bool timed = rc.kind == "time_to_error";
  const ConvergenceReport report = timed ? run_time_to_error(rc.spec) : run_convergence(rc.spec);
  report.write(dir);
  if (timed) report.write_time_to_error(dir);
  report_failures(report);
  for (const auto& r : report.rate_summary())
    std::cout << to_string(r.strategy) << ' ' << to_string(r.integrator) << ' ' << to_string(r.norm)
              << " rate: mean " << r.mean << ", median " << r.median << " (" << r.samples << " samples)\n";
}

void cmd_sweep(const RunConfig& rc, const fs::path& dir) {
  const auto entries = run_parameter_sweep(rc.sweep_axis, rc.sweep_values, rc.spec);
  auto index = open_csv(dir / "sweep.csv");
  index << "axis,label,strategy,integrator,norm,samples,mean_rate,se_rate,median_rate\n";
  for (const auto& e : entries) {
    e.report.write(dir / e.label);
    if (rc.kind == "time_to_error") e.report.write_time_to_error(dir / e.label);
    report_failures(e.report);
    for (const auto& r : e.report.rate_summary())
      index << to_string(rc.sweep_axis) << ',' << e.label << ',' << to_string(r.strategy) << ','
            << to_string(r.integrator) << ',' << to_string(r.norm) << ',' << r.samples << ','
            << format_double(r.mean) << ',' << format_double(r.se) << ',' << format_double(r.median) << '\n';
    std::cout << "sweep: " << e.label << " done\n";
  }
}

void cmd_sample_coefficient(const RunConfig& rc, const fs::path& dir) {
  const CoefficientSampler sampler(rc.spec.preset);
  auto out = open_csv(dir / "coefficients.csv");
  out << "realization,x,a\n";
  const Interval d = rc.spec.preset.domain;
  for (int r = 0; r < rc.realizations; ++r) {
    RandomStream rng = make_stream(rc.spec.seed, static_cast<std::uint64_t>(r));
    const SampledCoefficient a = sampler.sample(rng);
    for (int k = 0; k < rc.grid_points; ++k) {
      const double x = d.left + d.length() * k / (rc.grid_points - 1);
      out << r << ',' << format_double(x) << ',' << format_double(a(x)) << '\n';
    }
  }
  if (sampler.basis()) {
    auto ev = open_csv(dir / "eigenvalues.csv");
    sampler.basis()->write_eigenvalues_csv(ev);
  }
  std::cout << "sample-coefficient: " << rc.realizations << " realizations of " << rc.spec.preset.id << '\n';
}

int run(const std::string& command, const Options& opt) {
  std::vector<std::string> overrides = opt.overrides;
  if (opt.seed) overrides.push_back("sampling.seed=" + std::to_string(*opt.seed));
  if (opt.threads) overrides.push_back("sampling.threads=" + std::to_string(*opt.threads));

  RunConfig rc;
  try {
    rc = load_config(opt.config, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  fs::path dir;
  try {
    dir = output_dir(opt, rc);
    prepare_output(dir, opt.force);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }

  Manifest manifest(dir, command, rc);
  manifest.write();
  try {
    if (command == "solve")
      cmd_solve(rc, dir);
    else if (command == "convergence")
      cmd_convergence(rc, dir);
    else if (command == "sweep")
      cmd_sweep(rc, dir);
    else
      cmd_sample_coefficient(rc, dir);
  } catch (const std::exception& e) {
    manifest.mark("failed", e.what());
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  manifest.mark("complete");
  std::cout << "output: " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic conservation laws with discontinuous random flux coefficients"};
  app.require_subcommand(1);

  Options opt;
  std::string chosen;
  for (const char* name : {"solve", "convergence", "sweep", "sample-coefficient"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "Experiment config (JSON)")->required();
    sub->add_option("--out", opt.out, "Output directory (default: $JUMPFLUX_OUT_ROOT/<experiment id>)");
    sub->add_option("--seed", opt.seed, "Master seed");
    sub->add_option("--threads", opt.threads, "Worker threads (0: all cores)");
    sub->add_flag("--force", opt.force, "Overwrite a completed run");
    sub->add_option("--set", opt.overrides, "Override a config value, e.g. --set mesh.cells=512");
    sub->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return run(chosen, opt);
}
