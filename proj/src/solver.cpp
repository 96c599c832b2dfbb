#include "jumpflux/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "jumpflux/csv.hpp"

namespace jumpflux {

ConvexFlux ConvexFlux::burgers() {
  ConvexFlux f;
  f.f = [](double u) { return 0.5 * u * u; };
  f.df = [](double u) { return u; };
  f.root = 0.0;
  f.is_burgers = true;
  return f;
}

FluxModel FluxModel::multiplicative(ConvexFlux f, std::shared_ptr<const SampledCoefficient> a) {
  if (!a) throw std::invalid_argument("FluxModel: null coefficient");
  if (!f.f || !f.df) throw std::invalid_argument("FluxModel: convex flux needs f and f'");
  FluxModel m;
  m.kind_ = Kind::MultiplicativeConvex;
  m.convex_ = std::move(f);
  m.coefficient_ = std::move(a);
  return m;
}

FluxModel FluxModel::burgers(std::shared_ptr<const SampledCoefficient> a) {
  return multiplicative(ConvexFlux::burgers(), std::move(a));
}

FluxModel FluxModel::general(Field flux, Field dflux_du) {
  if (!flux || !dflux_du) throw std::invalid_argument("FluxModel: general flux needs 𝔣 and ∂𝔣/∂u");
  FluxModel m;
  m.kind_ = Kind::General;
  m.general_ = std::move(flux);
  m.general_du_ = std::move(dflux_du);
  return m;
}

const SampledCoefficient& FluxModel::coefficient() const {
  if (!coefficient_) throw std::logic_error("FluxModel: no coefficient for a general flux");
  return *coefficient_;
}

double FluxModel::operator()(double x, double u) const {
  if (kind_ == Kind::MultiplicativeConvex) return (*coefficient_)(x)*convex_.f(u);
  return general_(x, u);
}

double FluxModel::du(double x, double u) const {
  if (kind_ == Kind::MultiplicativeConvex) return (*coefficient_)(x)*convex_.df(u);
  return general_du_(x, u);
}

const char* to_string(Integrator i) {
  return i == Integrator::ForwardEuler ? "forward_euler" : "backward_euler";
}

Integrator integrator_from_string(const std::string& name) {
  if (name == "forward_euler") return Integrator::ForwardEuler;
  if (name == "backward_euler") return Integrator::BackwardEuler;
  throw std::invalid_argument("unknown integrator '" + name + "'");
}

void SolverConfig::validate() const {
  if (!(cfl_number > 0.0 && cfl_number < 1.0)) throw std::invalid_argument("solver: cfl number must lie in (0, 1)");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("solver: t_end must be positive");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("solver: newton_tol must be positive");
  if (newton_max_iter < 1) throw std::invalid_argument("solver: newton_max_iter must be positive");
  if (implicit_dt < 0.0) throw std::invalid_argument("solver: implicit_dt must be nonnegative");
  for (double t : output_times)
    if (!(t >= 0.0 && t <= t_end)) throw std::invalid_argument("solver: output time outside [0, t_end]");
}

std::size_t Solution::level_at(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return k;
  throw std::out_of_range("Solution: no stored level at t = " + format_double(t));
}

void Solution::write_snapshots_csv(std::ostream& out) const {
  out << "t,x,u\n";
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t i = 0; i < mesh.cells(); ++i)
      out << format_double(times[k]) << ',' << format_double(mesh.centers()[i]) << ','
          << format_double(states[k][i]) << '\n';
}

void Solution::write_mass_csv(std::ostream& out) const {
  out << "step,t,mass\n";
  for (const auto& r : mass_trace) out << r.step << ',' << format_double(r.t) << ',' << format_double(r.mass) << '\n';
}

std::vector<double> init_cell_averages(const std::function<double(double)>& u0, const Mesh& mesh) {
  // Gauss-Legendre nodes and weights on [-1, 1].
  static constexpr std::array<double, 5> nodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                  0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {0.2369268850561891, 0.4786286704993665,
                                                    0.5688888888888889, 0.4786286704993665,
                                                    0.2369268850561891};
  std::vector<double> avg(mesh.cells());
  for (std::size_t i = 0; i < mesh.cells(); ++i) {
    const double c = mesh.centers()[i];
    const double half = 0.5 * mesh.sizes()[i];
    double acc = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) acc += weights[q] * u0(c + half * nodes[q]);
    avg[i] = 0.5 * acc;
  }
  return avg;
}

double total_mass(const Mesh& mesh, std::span<const double> state) {
  if (state.size() != mesh.cells()) throw std::invalid_argument("total_mass: state length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) m += state[i] * mesh.sizes()[i];
  return m;
}

namespace {

constexpr double kGoldenRatio = 0.6180339887498949;

// min over [lo, hi] of g by golden-section search with endpoint checks.
template <class G>
double minimize_on_interval(const G& g, double lo, double hi) {
  double best = std::min(g(lo), g(hi));
  double a = lo, b = hi;
  double c = b - kGoldenRatio * (b - a);
  double d = a + kGoldenRatio * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 60; ++it) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kGoldenRatio * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kGoldenRatio * (b - a);
      gd = g(d);
    }
  }
  return std::min({best, gc, gd});
}

}  // namespace

double godunov_flux_general(const FluxModel& flux, double x_interface, double u_left, double u_right) {
  if (!std::isfinite(u_left) || !std::isfinite(u_right))
    throw std::invalid_argument("godunov_flux_general: non-finite state");
  const double lo = std::min(u_left, u_right);
  const double hi = std::max(u_left, u_right);
  double value = 0.0;
  if (flux.kind() == FluxModel::Kind::MultiplicativeConvex) {
    // Convex in θ for fixed x: extrema are at the ends or at the clamped root.
    const double a = flux.coefficient()(x_interface);
    const ConvexFlux& f = flux.convex();
    const double candidates[3] = {a * f.f(u_left), a * f.f(u_right), a * f.f(std::clamp(f.root, lo, hi))};
    value = (u_left <= u_right) ? std::min({candidates[0], candidates[1], candidates[2]})
                                : std::max({candidates[0], candidates[1], candidates[2]});
  } else if (u_left <= u_right) {
    value = minimize_on_interval([&](double th) { return flux(x_interface, th); }, lo, hi);
  } else {
    value = -minimize_on_interval([&](double th) { return -flux(x_interface, th); }, lo, hi);
  }
  if (!std::isfinite(value)) throw std::runtime_error("godunov_flux_general: non-finite flux");
  return value;
}

double godunov_flux_multiplicative_convex(double a_left, double a_right, const ConvexFlux& f, double u_left,
                                          double u_right) {
  return std::max(a_left * f.f(std::max(u_left, f.root)), a_right * f.f(std::min(u_right, f.root)));
}

namespace {

inline double burgers_godunov(double al, double ar, double ul, double ur) {
  const double l = ul > 0.0 ? ul : 0.0;
  const double r = ur < 0.0 ? ur : 0.0;
  return std::max(0.5 * al * l * l, 0.5 * ar * r * r);
}

// Per-sample spatial operator: coefficient sampled at cell centres, fluxes
// with periodic closure at the wrap-around interface.
class Discretization {
 public:
  Discretization(const FluxModel& flux, const Mesh& mesh) : flux_(flux), mesh_(mesh) {
    if (flux.kind() == FluxModel::Kind::MultiplicativeConvex) {
      a_ = flux.coefficient().evaluate(mesh.centers());
      a_max_ = std::max(flux.coefficient().upper_bound(), *std::max_element(a_.begin(), a_.end()));
      burgers_ = flux.convex().is_burgers;
    }
    for (double v : a_) half_a_.push_back(0.5 * v);
    inv_dx_.reserve(mesh.cells());
    for (double h : mesh.sizes()) inv_dx_.push_back(1.0 / h);
  }

  std::size_t cells() const { return mesh_.cells(); }
  const std::vector<double>& cell_coefficients() const { return a_; }

  // F has cells() + 1 entries; F[0] == F[n] is the periodic interface.
  void fluxes(std::span<const double> u, std::vector<double>& F) const {
    const std::size_t n = u.size();
    F.resize(n + 1);
    if (flux_.kind() == FluxModel::Kind::MultiplicativeConvex) {
      if (burgers_) {
        for (std::size_t k = 1; k < n; ++k) F[k] = burgers_godunov(a_[k - 1], a_[k], u[k - 1], u[k]);
        F[0] = burgers_godunov(a_[n - 1], a_[0], u[n - 1], u[0]);
      } else {
        const ConvexFlux& f = flux_.convex();
        for (std::size_t k = 1; k < n; ++k)
          F[k] = godunov_flux_multiplicative_convex(a_[k - 1], a_[k], f, u[k - 1], u[k]);
        F[0] = godunov_flux_multiplicative_convex(a_[n - 1], a_[0], f, u[n - 1], u[0]);
      }
    } else {
      const auto& x = mesh_.interfaces();
      for (std::size_t k = 1; k < n; ++k) F[k] = godunov_flux_general(flux_, x[k], u[k - 1], u[k]);
      F[0] = godunov_flux_general(flux_, x[0], u[n - 1], u[0]);
    }
    F[n] = F[0];
  }

  double wave_speed(std::span<const double> u) const {
    if (flux_.kind() == FluxModel::Kind::MultiplicativeConvex) {
      double m = 0.0;
      if (burgers_) {
        for (double v : u) m = std::max(m, std::abs(v));
      } else {
        for (double v : u) m = std::max(m, std::abs(flux_.convex().df(v)));
      }
      return a_max_ * m;
    }
    double m = 0.0;
    const auto& x = mesh_.interfaces();
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(flux_.du(x[i], u[i])));
    return m;
  }

  double flux_magnitude(std::span<const double> u) const {
    double m = 0.0;
    if (flux_.kind() == FluxModel::Kind::MultiplicativeConvex) {
      for (std::size_t i = 0; i < u.size(); ++i)
        m = std::max(m, std::abs(a_[i] * (burgers_ ? 0.5 * u[i] * u[i] : flux_.convex().f(u[i]))));
    } else {
      for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(flux_(mesh_.centers()[i], u[i])));
    }
    return m;
  }

  void explicit_update(std::span<const double> u, double dt, std::vector<double>& out,
                       std::vector<double>& F) const {
    fluxes(u, F);
    out.resize(u.size());
    const auto& dx = mesh_.sizes();
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - dt / dx[i] * (F[i + 1] - F[i]);
  }

  bool burgers() const { return burgers_; }
  double a_max() const { return a_max_; }

  struct SweepStats {
    double mass = 0.0;
    double max_abs_u = 0.0;
    double max_flux = 0.0;
  };

  // Single pass for a(x) u^2 / 2: update, mass, max |u| and max |a f(u)| of
  // the new state.
  SweepStats burgers_explicit_update(std::span<const double> u, double dt, std::vector<double>& out,
                                     std::vector<double>& F) const {
    using Arr = Eigen::Map<const Eigen::ArrayXd>;
    const Eigen::Index n = static_cast<Eigen::Index>(u.size());
    out.resize(u.size());
    F.resize(u.size() + 1);
    const Arr uu(u.data(), n);
    const Arr half_a(half_a_.data(), n);
    const Arr inv(inv_dx_.data(), n);
    const Arr dx(mesh_.sizes().data(), n);
    Eigen::Map<Eigen::ArrayXd> f(F.data(), n + 1);
    Eigen::Map<Eigen::ArrayXd> v(out.data(), n);

    const auto l = uu.head(n - 1).max(0.0);
    const auto r = uu.tail(n - 1).min(0.0);
    f.segment(1, n - 1) = (half_a.head(n - 1) * l.square()).max(half_a.tail(n - 1) * r.square());
    f(0) = f(n) = burgers_godunov(a_.back(), a_.front(), u.back(), u.front());
    v = uu - dt * inv * (f.tail(n) - f.head(n));

    SweepStats s;
    s.mass = (v * dx).sum();
    s.max_abs_u = v.abs().maxCoeff();
    s.max_flux = (half_a * v.square()).maxCoeff();
    return s;
  }

  void residual(std::span<const double> v, std::span<const double> u_old, double dt, std::vector<double>& R,
                std::vector<double>& F) const {
    fluxes(v, F);
    R.resize(v.size());
    const auto& dx = mesh_.sizes();
    for (std::size_t i = 0; i < v.size(); ++i) R[i] = v[i] - u_old[i] + dt / dx[i] * (F[i + 1] - F[i]);
  }

 private:
  const FluxModel& flux_;
  const Mesh& mesh_;
  std::vector<double> a_;
  std::vector<double> half_a_;
  std::vector<double> inv_dx_;
  double a_max_ = 0.0;
  bool burgers_ = false;
};

double cfl_dt_impl(const Discretization& disc, const Mesh& mesh, std::span<const double> state, double cfl,
                   double remaining) {
  const double speed = disc.wave_speed(state);
  if (speed == 0.0) return remaining;
  return cfl * mesh.min_h() / speed;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Number of colours for a cyclic tridiagonal column grouping: columns of one
// colour must be at cyclic distance >= 3. Returns n for small meshes.
std::size_t column_colours(std::size_t n) {
  if (n < 6) return n;
  for (std::size_t c = 3;; ++c)
    if ((n - 1) % c >= 2) return c;
}

ImplicitStep implicit_step_impl(const Discretization& disc, std::span<const double> state, double dt,
                                double tol, int max_iter) {
  const std::size_t n = state.size();
  ImplicitStep out;
  out.state.assign(state.begin(), state.end());
  std::vector<double> R, Rp, F, trial(n), probe(n);
  disc.residual(out.state, state, dt, R, F);
  double norm = max_abs(R);

  const std::size_t colours = column_colours(n);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  std::vector<Eigen::Triplet<double>> entries;

  int it = 0;
  while (norm > tol) {
    if (it >= max_iter) break;
    ++it;

    // Finite-difference Jacobian on the cyclic three-point stencil.
    entries.clear();
    entries.reserve(3 * n);
    for (std::size_t colour = 0; colour < colours; ++colour) {
      probe = out.state;
      std::vector<std::pair<std::size_t, double>> cols;
      for (std::size_t j = colour; j < n; j += colours) {
        const double eps = 1e-7 * std::max(1.0, std::abs(out.state[j]));
        probe[j] += eps;
        cols.emplace_back(j, probe[j] - out.state[j]);
      }
      disc.residual(probe, state, dt, Rp, F);
      for (const auto& [j, eps] : cols) {
        std::array<std::size_t, 3> rows = {(j + n - 1) % n, j, (j + 1) % n};
        std::sort(rows.begin(), rows.end());
        auto last = std::unique(rows.begin(), rows.end());
        for (auto r = rows.begin(); r != last; ++r) entries.emplace_back(*r, j, (Rp[*r] - R[*r]) / eps);
      }
    }
    Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    jac.setFromTriplets(entries.begin(), entries.end());
    jac.makeCompressed();
    lu.compute(jac);
    if (lu.info() != Eigen::Success) break;
    Eigen::Map<const Eigen::VectorXd> rhs(R.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd delta = lu.solve(-rhs);
    if (lu.info() != Eigen::Success || !delta.allFinite()) break;

    // Armijo backtracking on the max-norm residual.
    double lambda = 1.0;
    double trial_norm = std::numeric_limits<double>::infinity();
    for (int ls = 0; ls < 30; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = out.state[i] + lambda * delta(static_cast<Eigen::Index>(i));
      disc.residual(trial, state, dt, Rp, F);
      trial_norm = max_abs(Rp);
      if (trial_norm <= (1.0 - 1e-4 * lambda) * norm) break;
      lambda *= 0.5;
    }
    if (!(trial_norm < norm)) break;
    out.state.swap(trial);
    R.swap(Rp);
    norm = trial_norm;
  }
  out.iterations = it;
  out.residual = norm;
  if (!(norm <= tol))
    throw SolveError("backward Euler: Newton did not converge (residual " + format_double(norm) + " after " +
                         std::to_string(it) + " iterations, dt " + format_double(dt) + ")",
                     0);
  return out;
}

}  // namespace

double cfl_dt(const FluxModel& flux, const Mesh& mesh, std::span<const double> state, double cfl_number,
              double remaining) {
  if (state.size() != mesh.cells()) throw std::invalid_argument("cfl_dt: state length mismatch");
  Discretization disc(flux, mesh);
  return cfl_dt_impl(disc, mesh, state, cfl_number, remaining);
}

std::vector<double> forward_euler_step(const FluxModel& flux, const Mesh& mesh, std::span<const double> state,
                                       double dt) {
  if (state.size() != mesh.cells()) throw std::invalid_argument("forward_euler_step: state length mismatch");
  Discretization disc(flux, mesh);
  std::vector<double> out, F;
  disc.explicit_update(state, dt, out, F);
  return out;
}

ImplicitStep backward_euler_step(const FluxModel& flux, const Mesh& mesh, std::span<const double> state, double dt,
                                 double newton_tol, int newton_max_iter) {
  if (state.size() != mesh.cells()) throw std::invalid_argument("backward_euler_step: state length mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("backward_euler_step: dt must be positive");
  Discretization disc(flux, mesh);
  return implicit_step_impl(disc, state, dt, newton_tol, newton_max_iter);
}

Solution solve(const FluxModel& flux, const Mesh& mesh, std::vector<double> initial_state,
               const SolverConfig& config) {
  config.validate();
  if (initial_state.size() != mesh.cells()) throw std::invalid_argument("solve: initial state length mismatch");

  const Discretization disc(flux, mesh);
  Solution sol{mesh, {}, {}, {}, 0.0, 0, 0};

  std::vector<double> outputs;
  for (double t : config.output_times)
    if (t > 0.0 && t < config.t_end) outputs.push_back(t);
  outputs.push_back(config.t_end);
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());

  std::vector<double> u = std::move(initial_state);
  std::vector<double> next, F;
  double t = 0.0;
  std::size_t step = 0;
  sol.times.push_back(0.0);
  sol.states.push_back(u);
  sol.mass_trace.push_back({0, 0.0, total_mass(mesh, u)});
  sol.flux_bound = disc.flux_magnitude(u);

  const double implicit_dt =
      config.implicit_dt > 0.0 ? config.implicit_dt : mesh.domain().length() / static_cast<double>(mesh.cells());

  const bool fused = config.integrator == Integrator::ForwardEuler && disc.burgers();
  double speed = disc.wave_speed(u);

  std::size_t out_index = 0;
  while (out_index < outputs.size()) {
    const double target = outputs[out_index];

    if (fused) {
      double dt = speed == 0.0 ? config.t_end - t : config.cfl_number * mesh.min_h() / speed;
      const bool lands = dt >= target - t;
      if (lands) dt = target - t;
      const auto stats = disc.burgers_explicit_update(u, dt, next, F);
      ++step;
      if (!std::isfinite(stats.mass) || !std::isfinite(stats.max_abs_u))
        throw SolveError("solve: non-finite state at step " + std::to_string(step), step);
      u.swap(next);
      t = lands ? target : t + dt;
      speed = disc.a_max() * stats.max_abs_u;
      sol.mass_trace.push_back({step, t, stats.mass});
      sol.flux_bound = std::max(sol.flux_bound, stats.max_flux);
      if (lands) ++out_index;
      if (lands || config.record_all_steps) {
        sol.times.push_back(t);
        sol.states.push_back(u);
      }
      continue;
    }

    double dt = config.integrator == Integrator::ForwardEuler
                    ? cfl_dt_impl(disc, mesh, u, config.cfl_number, config.t_end - t)
                    : implicit_dt;
    bool lands = false;
    if (dt >= target - t) {
      dt = target - t;
      lands = true;
    }

    if (config.integrator == Integrator::ForwardEuler) {
      disc.explicit_update(u, dt, next, F);
    } else {
      int attempt = 0;
      for (;;) {
        try {
          next = implicit_step_impl(disc, u, dt, config.newton_tol, config.newton_max_iter).state;
          break;
        } catch (const SolveError& e) {
          if (++attempt > 10) throw SolveError(std::string(e.what()) + " at step " + std::to_string(step), step);
          dt *= 0.5;
          lands = false;
          ++sol.retries;
        }
      }
    }
    ++step;
    for (double v : next)
      if (!std::isfinite(v)) throw SolveError("solve: non-finite state at step " + std::to_string(step), step);

    u.swap(next);
    t = lands ? target : t + dt;
    sol.mass_trace.push_back({step, t, total_mass(mesh, u)});
    sol.flux_bound = std::max(sol.flux_bound, disc.flux_magnitude(u));
    if (lands) ++out_index;
    if (lands || config.record_all_steps) {
      sol.times.push_back(t);
      sol.states.push_back(u);
    }
  }
  sol.steps = step;
  return sol;
}

Solution solve(const FluxModel& flux, const Mesh& mesh, const std::function<double(double)>& u0,
               const SolverConfig& config) {
  return solve(flux, mesh, init_cell_averages(u0, mesh), config);
}

}  // namespace jumpflux
