#include "jumpflux/jumpfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "jumpflux/csv.hpp"

namespace jumpflux {

namespace {

constexpr double kMinimumGap = 1e-12;
constexpr int kBoundsGrid = 10000;

double uniform_interior(Interval domain, RandomStream& rng) {
  std::uniform_real_distribution<double> u(domain.left, domain.right);
  double x = u(rng);
  while (!(x > domain.left && x < domain.right)) x = u(rng);
  return x;
}

// Poisson draw conditioned to be positive. P(0) for λ = 30 is ~9e-14.
int positive_poisson(double lambda, RandomStream& rng) {
  std::poisson_distribution<int> poi(lambda);
  int k = poi(rng);
  while (k == 0) k = poi(rng);
  return k;
}

}  // namespace

Partition::Partition(Interval domain, std::vector<double> breakpoints)
    : domain_(domain), breakpoints_(std::move(breakpoints)) {
  if (!(domain_.length() > 0.0)) throw std::invalid_argument("Partition: empty domain");
  for (double b : breakpoints_) {
    if (!std::isfinite(b) || !(b > domain_.left && b < domain_.right))
      throw std::invalid_argument("Partition: breakpoint outside the open domain");
  }
  std::sort(breakpoints_.begin(), breakpoints_.end());
  std::vector<double> kept;
  kept.reserve(breakpoints_.size());
  for (double b : breakpoints_) {
    if (kept.empty() || b - kept.back() >= kMinimumGap) kept.push_back(b);
  }
  breakpoints_ = std::move(kept);
}

std::size_t Partition::cell_of(double x) const {
  // Right-continuous: a breakpoint belongs to the cell on its right.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return static_cast<std::size_t>(it - breakpoints_.begin());
}

Partition sample_partition(PoissonCount law, Interval domain, RandomStream& rng) {
  if (!(law.lambda > 0.0)) throw std::invalid_argument("sample_partition: lambda must be positive");
  std::poisson_distribution<int> poi(law.lambda);
  const int count = poi(rng) + 1;
  std::vector<double> points(static_cast<std::size_t>(count));
  for (auto& p : points) p = uniform_interior(domain, rng);
  return Partition(domain, std::move(points));
}

JumpField::JumpField(Partition partition, std::vector<double> heights)
    : JumpField(partition, heights, heights.empty() ? 1.0 : heights.front(),
                heights.empty() ? 1.0 : heights.back()) {}

JumpField::JumpField(Partition partition, std::vector<double> heights, double exterior_left,
                     double exterior_right)
    : partition_(std::move(partition)),
      heights_(std::move(heights)),
      exterior_left_(exterior_left),
      exterior_right_(exterior_right) {
  if (heights_.size() != partition_.cells())
    throw std::invalid_argument("JumpField: need one height per partition cell");
  auto bad = [](double h) { return !std::isfinite(h) || !(h > 0.0); };
  if (std::any_of(heights_.begin(), heights_.end(), bad) || bad(exterior_left_) || bad(exterior_right_))
    throw std::invalid_argument("JumpField: heights must be finite and positive");
}

double JumpField::operator()(double x) const {
  const auto& d = partition_.domain();
  if (x < d.left) return exterior_left_;
  if (x > d.right) return exterior_right_;
  return heights_[partition_.cell_of(x)];
}

SampledCoefficient::SampledCoefficient(Interval domain, ScalarFn mean, ScalarFn transform,
                                       std::optional<KLRealization> gauss,
                                       std::optional<JumpField> jumps)
    : domain_(domain),
      mean_(std::move(mean)),
      transform_(std::move(transform)),
      gauss_(std::move(gauss)),
      jumps_(std::move(jumps)) {
  if (!mean_ || !transform_) throw std::invalid_argument("SampledCoefficient: missing mean or transform");
  if (jumps_) discontinuities_ = jumps_->partition().breakpoints();

  std::vector<double> probe;
  probe.reserve(kBoundsGrid + 2 * discontinuities_.size());
  for (int k = 0; k < kBoundsGrid; ++k)
    probe.push_back(domain_.left + domain_.length() * static_cast<double>(k) / (kBoundsGrid - 1));
  for (double d : discontinuities_) {
    probe.push_back(std::max(domain_.left, d - 1e-12));
    probe.push_back(std::min(domain_.right, d + 1e-12));
  }
  lower_ = std::numeric_limits<double>::infinity();
  upper_ = -std::numeric_limits<double>::infinity();
  for (double v : evaluate(probe)) {
    lower_ = std::min(lower_, v);
    upper_ = std::max(upper_, v);
  }
  if (!(lower_ > 0.0)) throw std::runtime_error("SampledCoefficient: realization is not positive");
}

double SampledCoefficient::without_gauss(double x) const {
  double a = mean_(x);
  if (jumps_) a += (*jumps_)(x);
  return a;
}

double SampledCoefficient::operator()(double x) const {
  if (!std::isfinite(x)) throw std::invalid_argument("coefficient: non-finite point");
  double a = without_gauss(x);
  if (gauss_) a += transform_((*gauss_)(x));
  if (!std::isfinite(a)) throw std::runtime_error("coefficient: non-finite value, invalid realization");
  return a;
}

std::vector<double> SampledCoefficient::evaluate(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  std::transform(xs.begin(), xs.end(), out.begin(), [this](double x) { return (*this)(x); });
  return out;
}

void SampledCoefficient::write_csv(std::ostream& out, int points) const {
  if (points < 2) throw std::invalid_argument("write_csv: need at least two points");
  out << "x,a\n";
  for (int k = 0; k < points; ++k) {
    const double x = domain_.left + domain_.length() * static_cast<double>(k) / (points - 1);
    out << format_double(x) << ',' << format_double((*this)(x)) << '\n';
  }
}

SampledCoefficient make_coefficient(Interval domain, std::optional<KLRealization> gauss,
                                    std::optional<JumpField> jumps) {
  return SampledCoefficient(
      domain, [](double) { return 0.0; }, [](double w) { return std::exp(w); }, std::move(gauss),
      std::move(jumps));
}

SampledCoefficient preset_alternating_exponential(std::shared_ptr<const KLBasis> basis,
                                                  RandomStream& rng) {
  const Interval domain = basis->spec().domain;
  Partition partition = sample_partition(PoissonCount{5.0}, domain, rng);
  std::uniform_real_distribution<double> low(0.25, 0.75);
  std::uniform_real_distribution<double> high(1.25, 1.75);
  std::vector<double> heights(partition.cells());
  // Cells are numbered from 1: odd cells low, even cells high.
  for (std::size_t i = 0; i < heights.size(); ++i) heights[i] = ((i + 1) % 2 == 1) ? low(rng) : high(rng);
  KLRealization w = kl_sample(std::move(basis), rng);
  return make_coefficient(domain, std::move(w), JumpField(std::move(partition), std::move(heights)));
}

SampledCoefficient preset_poisson_squaredexp(std::shared_ptr<const KLBasis> basis, RandomStream& rng) {
  const Interval domain = basis->spec().domain;
  Partition partition = sample_partition(PoissonCount{5.0}, domain, rng);
  std::poisson_distribution<int> poi(5.0);
  std::vector<double> heights(partition.cells());
  for (auto& h : heights) h = static_cast<double>(poi(rng) + 1);
  KLRealization w = kl_sample(std::move(basis), rng);
  return make_coefficient(domain, std::move(w), JumpField(std::move(partition), std::move(heights)));
}

SampledCoefficient preset_inclusions(Interval domain, RandomStream& rng) {
  struct Inclusion {
    double left, right, height;
  };
  std::poisson_distribution<int> poi(10.0);
  const int count = poi(rng) + 1;
  std::uniform_real_distribution<double> size(1e-5, 1e-3);
  std::bernoulli_distribution coin(0.5);

  std::vector<Inclusion> inclusions;
  inclusions.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double center = uniform_interior(domain, rng);
    const double width = size(rng);
    const bool reciprocal = coin(rng);
    const double xi = static_cast<double>(positive_poisson(30.0, rng));
    inclusions.push_back({std::max(domain.left, center - 0.5 * width),
                          std::min(domain.right, center + 0.5 * width), reciprocal ? 1.0 / xi : xi});
  }

  // Paint the inclusions in draw order so later ones overwrite overlaps.
  std::vector<double> edges;
  for (const auto& inc : inclusions) {
    edges.push_back(inc.left);
    edges.push_back(inc.right);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto height_at = [&](double x) {
    double h = 1.0;
    for (const auto& inc : inclusions)
      if (x > inc.left && x < inc.right) h = inc.height;
    return h;
  };

  std::vector<double> cuts;
  std::vector<double> heights;
  double cursor = domain.left;
  double first_edge = domain.right;
  for (double e : edges)
    if (e > domain.left) {
      first_edge = std::min(e, domain.right);
      break;
    }
  heights.push_back(height_at(0.5 * (domain.left + first_edge)));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double e = edges[k];
    if (!(e > domain.left && e < domain.right)) continue;
    const double next = (k + 1 < edges.size()) ? std::min(edges[k + 1], domain.right) : domain.right;
    const double h = height_at(0.5 * (e + next));
    if (h == heights.back() || e - cursor < kMinimumGap) continue;
    cuts.push_back(e);
    heights.push_back(h);
    cursor = e;
  }
  return make_coefficient(domain, std::nullopt, JumpField(Partition(domain, std::move(cuts)), std::move(heights)));
}

SampledCoefficient preset_constant(double value, Interval domain) {
  return make_coefficient(domain, std::nullopt, JumpField(Partition(domain, {}), {value}));
}

SampledCoefficient preset_log_gaussian(std::shared_ptr<const KLBasis> basis, RandomStream& rng) {
  const Interval domain = basis->spec().domain;
  return make_coefficient(domain, kl_sample(std::move(basis), rng), std::nullopt);
}

namespace {

SampledCoefficient three_piece(Interval domain, double lo, double hi, double outer, double inner) {
  return make_coefficient(domain, std::nullopt,
                          JumpField(Partition(domain, {lo, hi}), {outer, inner, outer}));
}

}  // namespace

SampledCoefficient preset_deterministic_study(const UpJump& p, Interval domain) {
  if (!(p.delta > 0.0)) throw std::invalid_argument("UpJump: delta must be positive");
  const double c = 1.0 - std::numbers::pi / 10.0;
  return three_piece(domain, c - 0.5 * p.delta, c + 0.5 * p.delta, 0.5, 1.5 / p.delta);
}

SampledCoefficient preset_deterministic_study(const DownJump& p, Interval domain) {
  if (!(p.delta > 0.0)) throw std::invalid_argument("DownJump: delta must be positive");
  const double c = 1.0 - std::numbers::pi / 10.0;
  return three_piece(domain, c - 0.5 * p.delta, c + 0.5 * p.delta, 1.5, p.delta);
}

SampledCoefficient preset_deterministic_study(const AlternatingFixed& p, RandomStream& rng,
                                              Interval domain) {
  if (p.jumps < 0) throw std::invalid_argument("AlternatingFixed: negative jump count");
  std::vector<double> points(static_cast<std::size_t>(p.jumps));
  for (auto& x : points) x = uniform_interior(domain, rng);
  Partition partition(domain, std::move(points));
  std::vector<double> heights(partition.cells());
  for (std::size_t i = 0; i < heights.size(); ++i) heights[i] = ((i + 1) % 2 == 1) ? 0.5 : 1.5;
  return make_coefficient(domain, std::nullopt, JumpField(std::move(partition), std::move(heights)));
}

SampledCoefficient preset_deterministic_study(const TwoLevel& p, Interval domain) {
  if (!(p.width > 0.0)) throw std::invalid_argument("TwoLevel: width must be positive");
  const double c = std::numbers::pi / 5.0;
  return three_piece(domain, c - 0.5 * p.width, c + 0.5 * p.width, p.outer, p.inner);
}

const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids = {
      "alternating_exponential", "poisson_sqexp", "inclusions", "up_jump",
      "down_jump",               "alternating_fixed", "two_level", "log_gaussian", "constant"};
  return ids;
}

bool PresetSpec::needs_gauss() const {
  return id == "alternating_exponential" || id == "poisson_sqexp" || id == "log_gaussian";
}

PresetSpec PresetSpec::defaults(const std::string& id) {
  PresetSpec p;
  p.id = id;
  if (id == "alternating_exponential") {
    p.covariance = {0.5, 1.0, 0.1, {}};
  } else if (id == "poisson_sqexp" || id == "log_gaussian") {
    p.covariance = {CovarianceSpec::kInfiniteSmoothness, 0.1, 0.1, {}};
  } else if (id == "up_jump" || id == "down_jump") {
    p.delta = 1.0 / 16.0;
  } else if (id == "alternating_fixed") {
    p.jumps = 4;
  } else if (id == "two_level") {
    p.outer = 1.0;
    p.inner = 50.0;
    p.width = 0.1;
  } else if (id == "constant") {
    p.outer = 1.0;
  } else if (id != "inclusions") {
    throw std::invalid_argument("unknown coefficient preset '" + id + "'");
  }
  return p;
}

CoefficientSampler::CoefficientSampler(PresetSpec spec) : spec_(std::move(spec)) {
  const auto& ids = preset_ids();
  if (std::find(ids.begin(), ids.end(), spec_.id) == ids.end())
    throw std::invalid_argument("unknown coefficient preset '" + spec_.id + "'");
  if (spec_.needs_gauss()) {
    CovarianceSpec cov = spec_.covariance;
    cov.domain = spec_.domain;
    basis_ = spec_.cutoff > 0 ? nystrom_eigenpairs(cov, spec_.n_quad, spec_.cutoff)
                              : nystrom_eigenpairs_by_energy(cov, spec_.n_quad, spec_.energy_fraction);
  }
}

SampledCoefficient CoefficientSampler::sample(RandomStream& rng) const {
  const std::string& id = spec_.id;
  if (id == "alternating_exponential") return preset_alternating_exponential(basis_, rng);
  if (id == "poisson_sqexp") return preset_poisson_squaredexp(basis_, rng);
  if (id == "log_gaussian") return preset_log_gaussian(basis_, rng);
  if (id == "inclusions") return preset_inclusions(spec_.domain, rng);
  if (id == "up_jump") return preset_deterministic_study(UpJump{spec_.delta}, spec_.domain);
  if (id == "down_jump") return preset_deterministic_study(DownJump{spec_.delta}, spec_.domain);
  if (id == "constant") return preset_constant(spec_.outer, spec_.domain);
  if (id == "alternating_fixed") return preset_deterministic_study(AlternatingFixed{spec_.jumps}, rng, spec_.domain);
  return preset_deterministic_study(TwoLevel{spec_.outer, spec_.inner, spec_.width}, spec_.domain);
}

}  // namespace jumpflux
