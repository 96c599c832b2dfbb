#pragma once

// Monte Carlo strong-error studies: per-sample coefficient draw, solves on
// every meshing strategy and refinement level, errors against a fine
// reference, least-squares rate fits and time-to-error records.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jumpflux/jumpfield.hpp"
#include "jumpflux/mesh.hpp"
#include "jumpflux/solver.hpp"

namespace jumpflux {

struct InitialCondition {
  enum class Kind { Sine, Riemann };
  Kind kind = Kind::Sine;
  double kappa = 0.3;  // u0 = κ sin(πx)
  double left = 1.0;   // Riemann data
  double right = 0.0;
  double x0 = 0.5;

  std::function<double(double)> function() const;
};

enum class ErrorNorm { L1, L2 };
const char* to_string(ErrorNorm n);
ErrorNorm error_norm_from_string(const std::string& name);

struct ExperimentSpec {
  PresetSpec preset{};
  InitialCondition initial{};
  std::vector<MeshStrategy> strategies{MeshStrategy::Equidistant, MeshStrategy::JumpAdapted,
                                       MeshStrategy::WaveCell};
  std::vector<int> levels{64, 128, 256, 512};
  int reference_factor = 4;
  MeshStrategy reference_strategy = MeshStrategy::WaveCell;
  std::vector<Integrator> integrators{Integrator::ForwardEuler};
  int samples = 1;
  std::uint64_t seed = 0;
  std::vector<ErrorNorm> norms{ErrorNorm::L1, ErrorNorm::L2};
  SolverConfig solver{};
  int threads = 0;  // 0: hardware concurrency
  bool record_wallclock = true;

  void validate() const;
};

/// Exact cell-average restriction of a fine state onto a coarse mesh of the
/// same domain (no nesting required).
std::vector<double> restrict_reference(const Mesh& fine, std::span<const double> fine_state, const Mesh& coarse);

/// ||u_ref - u|| at stored time t, with the reference restricted to u's mesh.
double strong_error(const Solution& reference, const Solution& u, ErrorNorm norm, double t);

/// Least-squares slope of log(error) against log(h); nonpositive errors are
/// skipped. Returns NaN with fewer than two usable points.
double fit_rate(std::span<const double> h, std::span<const double> errors);

struct ErrorRecord {
  std::size_t sample = 0;
  MeshStrategy strategy = MeshStrategy::Equidistant;
  Integrator integrator = Integrator::ForwardEuler;
  int level = 0;  // target cell count
  std::size_t cells = 0;
  double min_h = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double wallclock_s = 0.0;
  std::size_t steps = 0;
};

struct RateRecord {
  std::size_t sample = 0;
  MeshStrategy strategy = MeshStrategy::Equidistant;
  Integrator integrator = Integrator::ForwardEuler;
  ErrorNorm norm = ErrorNorm::L1;
  double rate = 0.0;
};

struct FailureRecord {
  std::size_t sample = 0;
  std::string message;
};

struct SummaryRow {
  MeshStrategy strategy;
  Integrator integrator;
  int level;
  std::size_t samples;
  double mean_l1, se_l1, mean_l2, se_l2, mean_wallclock_s;
};

struct RateSummaryRow {
  MeshStrategy strategy;
  Integrator integrator;
  ErrorNorm norm;
  std::size_t samples;
  double mean, se, median;
};

struct ConvergenceReport {
  ExperimentSpec spec;
  std::vector<ErrorRecord> errors;  // ordered by sample, strategy, integrator, level
  std::vector<RateRecord> rates;
  std::vector<FailureRecord> failures;

  std::vector<SummaryRow> summary() const;
  std::vector<RateSummaryRow> rate_summary() const;

  double mean_error(MeshStrategy s, int level, ErrorNorm norm,
                    Integrator integrator = Integrator::ForwardEuler) const;
  double mean_rate(MeshStrategy s, ErrorNorm norm, Integrator integrator = Integrator::ForwardEuler) const;
  double median_rate(MeshStrategy s, ErrorNorm norm, Integrator integrator = Integrator::ForwardEuler) const;

  /// errors.csv, rates.csv, summary.csv, rate_summary.csv, long.csv, failures.csv.
  void write(const std::filesystem::path& dir) const;
  /// time_to_error.csv: integrator, strategy, level, N_x, wallclock, errors.
  void write_time_to_error(const std::filesystem::path& dir) const;
};

ConvergenceReport run_convergence(const ExperimentSpec& spec);

/// run_convergence with wall-clock recording forced on.
ConvergenceReport run_time_to_error(const ExperimentSpec& spec);

enum class SweepAxis { JumpDistance, JumpCount, MaternSmoothness, CorrelationLength };
const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& name);

/// Axis values used by the reference studies.
std::vector<double> default_sweep_values(SweepAxis axis);

struct SweepEntry {
  std::string label;  // e.g. "up_jump_delta=0.0625"
  ConvergenceReport report;
};

/// JumpDistance runs up_jump and down_jump for each δ; JumpCount runs
/// alternating_fixed; the Gaussian axes run log_gaussian with the other
/// covariance parameters taken from `base`.
std::vector<SweepEntry> run_parameter_sweep(SweepAxis axis, std::span<const double> values,
                                            const ExperimentSpec& base);

/// Runs `task(i)` for i in [0, count) on `threads` workers (0: hardware
/// concurrency). Each index runs exactly once.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace jumpflux
