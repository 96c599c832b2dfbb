#pragma once

// Steady states 𝔣(x, m(x)) = α and a discrete adapted entropy functional
// used as a solution-quality diagnostic.

#include <iosfwd>
#include <string>
#include <vector>

#include "jumpflux/solver.hpp"

namespace jumpflux {

enum class Branch { Plus, Minus };

/// Steady state m^±_α of a flux model. For convex multiplicative fluxes
/// α must be >= 0 (the flux minimum).
class SteadyState {
 public:
  /// `root` is the flux minimiser used to bracket general fluxes.
  SteadyState(FluxModel flux, double alpha, Branch branch, double root = 0.0);

  double alpha() const { return alpha_; }
  Branch branch() const { return branch_; }

  /// Closed form ±sqrt(2α / a(x)) for Burgers; bisection to 1e-12 otherwise.
  double operator()(double x) const;
  /// Same, with the coefficient value supplied (multiplicative fluxes only).
  double with_coefficient(double a) const;

 private:
  FluxModel flux_;
  double alpha_;
  Branch branch_;
  double root_;
};

/// Smooth nonnegative product bump φ(x, t) = b((x - x0)/rx) b((t - t0)/rt)
/// with b(s) = exp(-1 / (1 - s²)) on |s| < 1.
struct BumpTestFunction {
  std::string id = "bump";
  double x0 = 0.5;
  double rx = 0.1;
  double t0 = 0.0;
  double rt = 0.1;

  double operator()(double x, double t) const;
};

/// Discrete J^α over the stored levels of `u`: the state at level k is
/// taken as constant on [t_k, t_{k+1}). Time and space derivatives of φ
/// are integrated exactly along their own direction, the other direction
/// by the midpoint rule. Throws if φ's x-support leaves the mesh domain or
/// its t-support reaches past the final stored time.
double entropy_functional_discrete(const Solution& u, const FluxModel& flux, const SteadyState& steady,
                                   const BumpTestFunction& phi);

/// `count` log-spaced values in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int count);

struct EntropyRecord {
  double alpha;
  std::string test_function;
  double value;
  std::size_t cells;
};

/// CSV with columns alpha,test_fn,J,N_x.
void write_entropy_csv(std::ostream& out, const std::vector<EntropyRecord>& rows);

}  // namespace jumpflux
