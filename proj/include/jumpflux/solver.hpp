#pragma once

// Conservative finite-volume evolution of u_t + 𝔣(x, u)_x = 0 on a periodic
// interval with Godunov fluxes for spatially dependent flux functions.

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jumpflux/jumpfield.hpp"
#include "jumpflux/mesh.hpp"

namespace jumpflux {

/// Convex scalar flux f with minimiser `root` where f(root) = 0.
struct ConvexFlux {
  std::function<double(double)> f;
  std::function<double(double)> df;
  double root = 0.0;
  bool is_burgers = false;

  static ConvexFlux burgers();
};

/// 𝔣(ω, x, u): either a(ω, x) f(u) with convex f, or an arbitrary
/// function of (x, u) together with its u-derivative.
class FluxModel {
 public:
  enum class Kind { MultiplicativeConvex, General };
  using Field = std::function<double(double, double)>;

  static FluxModel multiplicative(ConvexFlux f, std::shared_ptr<const SampledCoefficient> a);
  static FluxModel burgers(std::shared_ptr<const SampledCoefficient> a);
  static FluxModel general(Field flux, Field dflux_du);

  Kind kind() const { return kind_; }
  const ConvexFlux& convex() const { return convex_; }
  const SampledCoefficient& coefficient() const;
  bool has_coefficient() const { return static_cast<bool>(coefficient_); }

  double operator()(double x, double u) const;
  double du(double x, double u) const;

 private:
  Kind kind_ = Kind::General;
  ConvexFlux convex_;
  std::shared_ptr<const SampledCoefficient> coefficient_;
  Field general_;
  Field general_du_;
};

enum class Integrator { ForwardEuler, BackwardEuler };

const char* to_string(Integrator i);
Integrator integrator_from_string(const std::string& name);

struct SolverConfig {
  Integrator integrator = Integrator::ForwardEuler;
  double cfl_number = 0.9;
  double t_end = 1.0;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  /// Fixed step of the implicit integrator; 0 selects |domain| / cells.
  double implicit_dt = 0.0;
  /// Times at which states are stored; t = 0 and t_end are always stored.
  std::vector<double> output_times;
  /// Store every time level (needed by the entropy functional).
  bool record_all_steps = false;

  void validate() const;
};

struct MassRecord {
  std::size_t step;
  double t;
  double mass;
};

struct Solution {
  Mesh mesh;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<MassRecord> mass_trace;
  /// max |𝔣(x, u)| over all evaluated cell states.
  double flux_bound = 0.0;
  std::size_t steps = 0;
  /// Implicit steps that needed a halved Δt.
  std::size_t retries = 0;

  const std::vector<double>& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
  /// Index of the stored level at time t (exact match within 1e-12).
  std::size_t level_at(double t) const;

  /// CSV with columns t,x,u for every stored level.
  void write_snapshots_csv(std::ostream& out) const;
  /// CSV with columns step,t,mass.
  void write_mass_csv(std::ostream& out) const;
};

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Cell averages by 5-point Gauss-Legendre quadrature on each cell.
std::vector<double> init_cell_averages(const std::function<double(double)>& u0, const Mesh& mesh);

/// Total mass Σ u_i Δx_i.
double total_mass(const Mesh& mesh, std::span<const double> state);

/// Godunov flux at x_interface: min of 𝔣(x, ·) over [uL, uR] if uL <= uR,
/// max over [uR, uL] otherwise.
double godunov_flux_general(const FluxModel& flux, double x_interface, double u_left, double u_right);

/// Closed form for a(x) f(u) with convex f:
/// max{ aL f(max(uL, root)), aR f(min(uR, root)) }.
double godunov_flux_multiplicative_convex(double a_left, double a_right, const ConvexFlux& f,
                                          double u_left, double u_right);

/// Δt = cfl · min Δx / L with L the maximal wave speed; returns `remaining`
/// when L = 0.
double cfl_dt(const FluxModel& flux, const Mesh& mesh, std::span<const double> state,
              double cfl_number, double remaining);

std::vector<double> forward_euler_step(const FluxModel& flux, const Mesh& mesh,
                                       std::span<const double> state, double dt);

struct ImplicitStep {
  std::vector<double> state;
  int iterations = 0;
  double residual = 0.0;
};

/// One backward Euler step by damped Newton with a finite-difference
/// Jacobian. Throws SolveError if Newton does not converge.
ImplicitStep backward_euler_step(const FluxModel& flux, const Mesh& mesh, std::span<const double> state,
                                 double dt, double newton_tol, int newton_max_iter);

Solution solve(const FluxModel& flux, const Mesh& mesh, std::vector<double> initial_state,
               const SolverConfig& config);
Solution solve(const FluxModel& flux, const Mesh& mesh, const std::function<double(double)>& u0,
               const SolverConfig& config);

}  // namespace jumpflux
