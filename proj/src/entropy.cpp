#include "jumpflux/entropy.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "jumpflux/csv.hpp"

namespace jumpflux {

SteadyState::SteadyState(FluxModel flux, double alpha, Branch branch, double root)
    : flux_(std::move(flux)), alpha_(alpha), branch_(branch), root_(root) {
  if (!std::isfinite(alpha_)) throw std::invalid_argument("SteadyState: alpha must be finite");
  if (flux_.kind() == FluxModel::Kind::MultiplicativeConvex) {
    root_ = flux_.convex().root;
    if (alpha_ < 0.0) throw std::invalid_argument("SteadyState: alpha below the flux minimum 0");
  }
}

double SteadyState::with_coefficient(double a) const {
  if (flux_.kind() != FluxModel::Kind::MultiplicativeConvex)
    throw std::logic_error("SteadyState: coefficient form needs a multiplicative flux");
  const ConvexFlux& f = flux_.convex();
  if (f.is_burgers) {
    const double m = std::sqrt(2.0 * alpha_ / a);
    return branch_ == Branch::Plus ? m : -m;
  }
  const double target = alpha_ / a;
  const double sign = branch_ == Branch::Plus ? 1.0 : -1.0;
  auto g = [&](double s) { return f.f(root_ + sign * s) - target; };
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 200 && g(hi) < 0.0; ++k) hi *= 2.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return root_ + sign * 0.5 * (lo + hi);
}

double SteadyState::operator()(double x) const {
  if (flux_.kind() == FluxModel::Kind::MultiplicativeConvex) return with_coefficient(flux_.coefficient()(x));
  const double sign = branch_ == Branch::Plus ? 1.0 : -1.0;
  auto g = [&](double s) { return flux_(x, root_ + sign * s) - alpha_; };
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 200 && g(hi) < 0.0; ++k) hi *= 2.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return root_ + sign * 0.5 * (lo + hi);
}

double BumpTestFunction::operator()(double x, double t) const {
  auto bump = [](double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; };
  return bump((x - x0) / rx) * bump((t - t0) / rt);
}

namespace {

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double entropy_functional_discrete(const Solution& u, const FluxModel& flux, const SteadyState& steady,
                                   const BumpTestFunction& phi) {
  const Mesh& mesh = u.mesh;
  const Interval dom = mesh.domain();
  if (!(phi.rx > 0.0 && phi.rt > 0.0)) throw std::invalid_argument("entropy: test function radii must be positive");
  if (phi.x0 - phi.rx < dom.left || phi.x0 + phi.rx > dom.right)
    throw std::invalid_argument("entropy: test function support leaves the spatial domain");
  if (phi.t0 + phi.rt > u.final_time())
    throw std::invalid_argument("entropy: test function support reaches past the final time");

  const std::size_t n = mesh.cells();
  const auto& c = mesh.centers();
  const auto& dx = mesh.sizes();
  const auto& xf = mesh.interfaces();

  std::vector<double> a, m(n);
  const bool multiplicative = flux.kind() == FluxModel::Kind::MultiplicativeConvex;
  if (multiplicative) a = flux.coefficient().evaluate(c);
  for (std::size_t i = 0; i < n; ++i) m[i] = multiplicative ? steady.with_coefficient(a[i]) : steady(c[i]);
  auto cell_flux = [&](std::size_t i, double v) { return multiplicative ? a[i] * flux.convex().f(v) : flux(c[i], v); };

  const double alpha = steady.alpha();
  double time_term = 0.0, space_term = 0.0, initial_term = 0.0;
  for (std::size_t k = 0; k + 1 < u.times.size(); ++k) {
    const double t0 = u.times[k], t1 = u.times[k + 1];
    const double tm = 0.5 * (t0 + t1);
    const auto& s = u.states[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = s[i] - m[i];
      time_term += std::abs(diff) * dx[i] * (phi(c[i], t1) - phi(c[i], t0));
      space_term += sign_of(diff) * (cell_flux(i, s[i]) - alpha) * (t1 - t0) * (phi(xf[i + 1], tm) - phi(xf[i], tm));
    }
  }
  const auto& s0 = u.states.front();
  for (std::size_t i = 0; i < n; ++i) initial_term += std::abs(s0[i] - m[i]) * phi(c[i], 0.0) * dx[i];
  return time_term + space_term + initial_term;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1) throw std::invalid_argument("log_spaced: need 0 < lo <= hi, count >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = std::exp(llo + (lhi - llo) * k / (count - 1));
  return out;
}

void write_entropy_csv(std::ostream& out, const std::vector<EntropyRecord>& rows) {
  out << "alpha,test_fn,J,N_x\n";
  for (const auto& r : rows)
    out << format_double(r.alpha) << ',' << r.test_function << ',' << format_double(r.value) << ',' << r.cells << '\n';
}

}  // namespace jumpflux
