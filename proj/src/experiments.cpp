#include "jumpflux/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "jumpflux/csv.hpp"

namespace jumpflux {

std::function<double(double)> InitialCondition::function() const {
  if (kind == Kind::Sine) {
    const double k = kappa;
    return [k](double x) { return k * std::sin(std::numbers::pi * x); };
  }
  const double l = left, r = right, c = x0;
  return [l, r, c](double x) { return x < c ? l : r; };
}

const char* to_string(ErrorNorm n) { return n == ErrorNorm::L1 ? "L1" : "L2"; }

ErrorNorm error_norm_from_string(const std::string& name) {
  if (name == "L1") return ErrorNorm::L1;
  if (name == "L2") return ErrorNorm::L2;
  throw std::invalid_argument("unknown error norm '" + name + "'");
}

void ExperimentSpec::validate() const {
  if (levels.empty()) throw std::invalid_argument("experiment: at least one refinement level required");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] < 1) throw std::invalid_argument("experiment: refinement levels must be positive");
    if (k > 0 && levels[k] <= levels[k - 1])
      throw std::invalid_argument("experiment: refinement levels must be strictly increasing");
  }
  if (reference_factor < 4) throw std::invalid_argument("experiment: reference factor must be at least 4");
  if (samples < 1) throw std::invalid_argument("experiment: sample count must be positive");
  if (strategies.empty() || integrators.empty() || norms.empty())
    throw std::invalid_argument("experiment: strategies, integrators and norms must be nonempty");
  solver.validate();
}

std::vector<double> restrict_reference(const Mesh& fine, std::span<const double> fine_state, const Mesh& coarse) {
  if (fine_state.size() != fine.cells()) throw std::invalid_argument("restrict_reference: state length mismatch");
  const auto& xf = fine.interfaces();
  const auto& xc = coarse.interfaces();
  if (std::abs(xf.front() - xc.front()) > 1e-12 || std::abs(xf.back() - xc.back()) > 1e-12)
    throw std::invalid_argument("restrict_reference: meshes cover different domains");

  std::vector<double> out(coarse.cells(), 0.0);
  std::size_t j = 0;
  for (std::size_t i = 0; i < coarse.cells(); ++i) {
    const double a = xc[i], b = xc[i + 1];
    while (j < fine.cells() && xf[j + 1] <= a) ++j;
    double acc = 0.0;
    for (std::size_t k = j; k < fine.cells() && xf[k] < b; ++k) {
      const double overlap = std::min(b, xf[k + 1]) - std::max(a, xf[k]);
      if (overlap > 0.0) acc += overlap * fine_state[k];
    }
    out[i] = acc / (b - a);
  }
  return out;
}

double strong_error(const Solution& reference, const Solution& u, ErrorNorm norm, double t) {
  const auto& ref_state = reference.states[reference.level_at(t)];
  const auto& state = u.states[u.level_at(t)];
  const std::vector<double> r = restrict_reference(reference.mesh, ref_state, u.mesh);
  const auto& dx = u.mesh.sizes();
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = state[i] - r[i];
    acc += (norm == ErrorNorm::L1 ? std::abs(d) : d * d) * dx[i];
  }
  return norm == ErrorNorm::L1 ? acc : std::sqrt(acc);
}

double fit_rate(std::span<const double> h, std::span<const double> errors) {
  if (h.size() != errors.size()) throw std::invalid_argument("fit_rate: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (errors[k] > 0.0 && h[k] > 0.0 && std::isfinite(errors[k])) {
      lx.push_back(std::log(h[k]));
      ly.push_back(std::log(errors[k]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxy / sxx;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace {

struct SampleResult {
  std::vector<ErrorRecord> errors;
  std::vector<RateRecord> rates;
  std::optional<FailureRecord> failure;
};

SampleResult run_sample(const ExperimentSpec& spec, const CoefficientSampler& sampler, std::size_t index) {
  SampleResult result;
  try {
    RandomStream rng = make_stream(spec.seed, index);
    auto coefficient = std::make_shared<const SampledCoefficient>(sampler.sample(rng));
    const FluxModel flux = FluxModel::burgers(coefficient);
    const auto& jumps = coefficient->discontinuities();
    const Interval domain = spec.preset.domain;
    const auto u0 = spec.initial.function();
    const double t_end = spec.solver.t_end;

    SolverConfig ref_config = spec.solver;
    ref_config.integrator = Integrator::ForwardEuler;
    ref_config.record_all_steps = false;
    const Mesh ref_mesh =
        build_mesh(spec.reference_strategy, spec.reference_factor * spec.levels.back(), jumps, domain);
    const Solution reference = solve(flux, ref_mesh, u0, ref_config);

    for (MeshStrategy strategy : spec.strategies) {
      for (Integrator integrator : spec.integrators) {
        std::vector<double> hs, e1, e2;
        for (int level : spec.levels) {
          const Mesh mesh = build_mesh(strategy, level, jumps, domain);
          SolverConfig config = spec.solver;
          config.integrator = integrator;
          config.record_all_steps = false;
          const std::vector<double> init = init_cell_averages(u0, mesh);
          const auto start = std::chrono::steady_clock::now();
          const Solution sol = solve(flux, mesh, init, config);
          const auto stop = std::chrono::steady_clock::now();

          ErrorRecord rec;
          rec.sample = index;
          rec.strategy = strategy;
          rec.integrator = integrator;
          rec.level = level;
          rec.cells = mesh.cells();
          rec.min_h = mesh.min_h();
          rec.l1 = strong_error(reference, sol, ErrorNorm::L1, t_end);
          rec.l2 = strong_error(reference, sol, ErrorNorm::L2, t_end);
          rec.wallclock_s = spec.record_wallclock ? std::chrono::duration<double>(stop - start).count() : 0.0;
          rec.steps = sol.steps;
          result.errors.push_back(rec);
          hs.push_back(domain.length() / level);
          e1.push_back(rec.l1);
          e2.push_back(rec.l2);
        }
        for (ErrorNorm norm : spec.norms)
          result.rates.push_back({index, strategy, integrator, norm, fit_rate(hs, norm == ErrorNorm::L1 ? e1 : e2)});
      }
    }
  } catch (const std::exception& e) {
    result.errors.clear();
    result.rates.clear();
    result.failure = FailureRecord{index, e.what()};
  }
  return result;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ConvergenceReport run_convergence(const ExperimentSpec& spec) {
  spec.validate();
  const CoefficientSampler sampler(spec.preset);
  std::vector<SampleResult> results(static_cast<std::size_t>(spec.samples));
  parallel_for(results.size(), spec.threads,
               [&](std::size_t i) { results[i] = run_sample(spec, sampler, i); });

  ConvergenceReport report;
  report.spec = spec;
  for (auto& r : results) {
    report.errors.insert(report.errors.end(), r.errors.begin(), r.errors.end());
    report.rates.insert(report.rates.end(), r.rates.begin(), r.rates.end());
    if (r.failure) report.failures.push_back(*r.failure);
  }
  return report;
}

ConvergenceReport run_time_to_error(const ExperimentSpec& spec) {
  ExperimentSpec timed = spec;
  timed.record_wallclock = true;
  return run_convergence(timed);
}

std::vector<SummaryRow> ConvergenceReport::summary() const {
  std::vector<SummaryRow> rows;
  for (MeshStrategy s : spec.strategies)
    for (Integrator integ : spec.integrators)
      for (int level : spec.levels) {
        std::vector<double> l1, l2, wc;
        for (const auto& e : errors)
          if (e.strategy == s && e.integrator == integ && e.level == level) {
            l1.push_back(e.l1);
            l2.push_back(e.l2);
            wc.push_back(e.wallclock_s);
          }
        rows.push_back({s, integ, level, l1.size(), mean_of(l1), standard_error(l1), mean_of(l2), standard_error(l2),
                        mean_of(wc)});
      }
  return rows;
}

std::vector<RateSummaryRow> ConvergenceReport::rate_summary() const {
  std::vector<RateSummaryRow> rows;
  for (MeshStrategy s : spec.strategies)
    for (Integrator integ : spec.integrators)
      for (ErrorNorm norm : spec.norms) {
        std::vector<double> v;
        for (const auto& r : rates)
          if (r.strategy == s && r.integrator == integ && r.norm == norm && std::isfinite(r.rate)) v.push_back(r.rate);
        rows.push_back({s, integ, norm, v.size(), mean_of(v), standard_error(v), median_of(v)});
      }
  return rows;
}

double ConvergenceReport::mean_error(MeshStrategy s, int level, ErrorNorm norm, Integrator integrator) const {
  std::vector<double> v;
  for (const auto& e : errors)
    if (e.strategy == s && e.level == level && e.integrator == integrator)
      v.push_back(norm == ErrorNorm::L1 ? e.l1 : e.l2);
  return mean_of(v);
}

double ConvergenceReport::mean_rate(MeshStrategy s, ErrorNorm norm, Integrator integrator) const {
  std::vector<double> v;
  for (const auto& r : rates)
    if (r.strategy == s && r.norm == norm && r.integrator == integrator && std::isfinite(r.rate)) v.push_back(r.rate);
  return mean_of(v);
}

double ConvergenceReport::median_rate(MeshStrategy s, ErrorNorm norm, Integrator integrator) const {
  std::vector<double> v;
  for (const auto& r : rates)
    if (r.strategy == s && r.norm == norm && r.integrator == integrator && std::isfinite(r.rate)) v.push_back(r.rate);
  return median_of(v);
}

void ConvergenceReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    auto out = open_csv(dir / "errors.csv");
    out << "sample,strategy,level,min_h,N_x,L1,L2,wallclock_s,integrator\n";
    for (const auto& e : errors)
      out << e.sample << ',' << to_string(e.strategy) << ',' << e.level << ',' << format_double(e.min_h) << ','
          << e.cells << ',' << format_double(e.l1) << ',' << format_double(e.l2) << ','
          << format_double(e.wallclock_s) << ',' << to_string(e.integrator) << '\n';
  }
  {
    auto out = open_csv(dir / "rates.csv");
    out << "sample,strategy,integrator,norm,rate\n";
    for (const auto& r : rates)
      out << r.sample << ',' << to_string(r.strategy) << ',' << to_string(r.integrator) << ',' << to_string(r.norm)
          << ',' << format_double(r.rate) << '\n';
  }
  {
    auto out = open_csv(dir / "summary.csv");
    out << "strategy,integrator,level,h,samples,mean_L1,se_L1,mean_L2,se_L2,mean_wallclock_s\n";
    for (const auto& s : summary())
      out << to_string(s.strategy) << ',' << to_string(s.integrator) << ',' << s.level << ','
          << format_double(spec.preset.domain.length() / s.level) << ',' << s.samples << ','
          << format_double(s.mean_l1) << ',' << format_double(s.se_l1) << ',' << format_double(s.mean_l2) << ','
          << format_double(s.se_l2) << ',' << format_double(s.mean_wallclock_s) << '\n';
  }
  {
    auto out = open_csv(dir / "rate_summary.csv");
    out << "strategy,integrator,norm,samples,mean_rate,se_rate,median_rate\n";
    for (const auto& r : rate_summary())
      out << to_string(r.strategy) << ',' << to_string(r.integrator) << ',' << to_string(r.norm) << ',' << r.samples
          << ',' << format_double(r.mean) << ',' << format_double(r.se) << ',' << format_double(r.median) << '\n';
  }
  {
    auto out = open_csv(dir / "long.csv");
    out << "sample,strategy,integrator,level,metric,value\n";
    for (const auto& e : errors) {
      const std::string prefix = std::to_string(e.sample) + ',' + to_string(e.strategy) + ',' +
                                 to_string(e.integrator) + ',' + std::to_string(e.level) + ',';
      out << prefix << "L1," << format_double(e.l1) << '\n';
      out << prefix << "L2," << format_double(e.l2) << '\n';
      out << prefix << "min_h," << format_double(e.min_h) << '\n';
      out << prefix << "N_x," << e.cells << '\n';
      out << prefix << "wallclock_s," << format_double(e.wallclock_s) << '\n';
    }
  }
  {
    auto out = open_csv(dir / "failures.csv");
    out << "sample,message\n";
    for (const auto& f : failures) {
      std::string msg = f.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << f.sample << ',' << msg << '\n';
    }
  }
}

void ConvergenceReport::write_time_to_error(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto out = open_csv(dir / "time_to_error.csv");
  out << "sample,integrator,strategy,level,N_x,steps,wallclock_s,L1,L2\n";
  for (const auto& e : errors)
    out << e.sample << ',' << to_string(e.integrator) << ',' << to_string(e.strategy) << ',' << e.level << ','
        << e.cells << ',' << e.steps << ',' << format_double(e.wallclock_s) << ',' << format_double(e.l1) << ','
        << format_double(e.l2) << '\n';
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::JumpDistance: return "jump_distance";
    case SweepAxis::JumpCount: return "jump_count";
    case SweepAxis::MaternSmoothness: return "matern_smoothness";
    case SweepAxis::CorrelationLength: return "correlation_length";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "jump_distance") return SweepAxis::JumpDistance;
  if (name == "jump_count") return SweepAxis::JumpCount;
  if (name == "matern_smoothness") return SweepAxis::MaternSmoothness;
  if (name == "correlation_length") return SweepAxis::CorrelationLength;
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

std::vector<double> default_sweep_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::JumpDistance: return {1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0};
    case SweepAxis::JumpCount: return {4, 16, 64};
    case SweepAxis::MaternSmoothness: return {0.5, 1.0, CovarianceSpec::kInfiniteSmoothness};
    case SweepAxis::CorrelationLength: return {0.01, 0.05, 0.1};
  }
  return {};
}

std::vector<SweepEntry> run_parameter_sweep(SweepAxis axis, std::span<const double> values,
                                            const ExperimentSpec& base) {
  std::vector<SweepEntry> out;
  auto run = [&](ExperimentSpec spec, std::string label) {
    out.push_back({std::move(label), run_convergence(spec)});
  };
  for (double v : values) {
    ExperimentSpec spec = base;
    const Interval domain = base.preset.domain;
    switch (axis) {
      case SweepAxis::JumpDistance:
        for (const char* id : {"up_jump", "down_jump"}) {
          spec.preset = PresetSpec::defaults(id);
          spec.preset.domain = domain;
          spec.preset.delta = v;
          run(spec, std::string(id) + "_delta=" + format_double(v));
        }
        break;
      case SweepAxis::JumpCount:
        spec.preset = PresetSpec::defaults("alternating_fixed");
        spec.preset.domain = domain;
        spec.preset.jumps = static_cast<int>(v);
        run(spec, "alternating_fixed_tau=" + std::to_string(spec.preset.jumps));
        break;
      case SweepAxis::MaternSmoothness:
      case SweepAxis::CorrelationLength: {
        PresetSpec p = base.preset;
        p.id = "log_gaussian";
        if (axis == SweepAxis::MaternSmoothness) {
          p.covariance.smoothness = v;
        } else {
          p.covariance.correlation_length = v;
        }
        spec.preset = p;
        run(spec, std::string(axis == SweepAxis::MaternSmoothness ? "nu=" : "rho=") +
                      (std::isinf(v) ? std::string("inf") : format_double(v)));
        break;
      }
    }
  }
  return out;
}

}  // namespace jumpflux
