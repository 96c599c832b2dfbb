#pragma once

// Piecewise-constant random jump fields and the composite coefficient
// a(ω, x) = ā(x) + φ(W(ω, x)) + P(ω, x).

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jumpflux/randfield.hpp"

namespace jumpflux {

/// Interior jump locations of a random partition of the domain.
class Partition {
 public:
  Partition() = default;
  /// Sorts, drops points within 1e-12 of a neighbour, rejects points
  /// outside the open interior of `domain`.
  Partition(Interval domain, std::vector<double> breakpoints);

  const Interval& domain() const { return domain_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  std::size_t count() const { return breakpoints_.size(); }
  /// Number of partition cells inside the domain (count() + 1).
  std::size_t cells() const { return breakpoints_.size() + 1; }

  /// Index of the cell containing x, right-continuous at breakpoints.
  /// Points outside the domain map to the first/last cell.
  std::size_t cell_of(double x) const;

 private:
  Interval domain_{};
  std::vector<double> breakpoints_;
};

struct PoissonCount {
  double lambda = 5.0;
};

/// Poi(λ) + 1 breakpoints i.i.d. uniform on the domain.
Partition sample_partition(PoissonCount law, Interval domain, RandomStream& rng);

/// P(x): constant height on each partition cell; separate values left and
/// right of the domain.
class JumpField {
 public:
  JumpField(Partition partition, std::vector<double> heights);
  JumpField(Partition partition, std::vector<double> heights, double exterior_left,
            double exterior_right);

  const Partition& partition() const { return partition_; }
  const std::vector<double>& heights() const { return heights_; }

  double operator()(double x) const;

 private:
  Partition partition_;
  std::vector<double> heights_;
  double exterior_left_;
  double exterior_right_;
};

/// One realization of the coefficient. Immutable; safe to share between threads.
class SampledCoefficient {
 public:
  using ScalarFn = std::function<double(double)>;

  SampledCoefficient(Interval domain, ScalarFn mean, ScalarFn transform,
                     std::optional<KLRealization> gauss, std::optional<JumpField> jumps);

  const Interval& domain() const { return domain_; }
  bool has_gauss() const { return gauss_.has_value(); }
  bool has_jumps() const { return jumps_.has_value(); }
  const std::optional<KLRealization>& gauss() const { return gauss_; }
  const std::optional<JumpField>& jumps() const { return jumps_; }

  /// Sorted discontinuity set (the jump field's breakpoints).
  const std::vector<double>& discontinuities() const { return discontinuities_; }

  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }

  /// a(x); right limit at breakpoints. Throws on a non-finite value.
  double operator()(double x) const;
  /// Same as operator() with the Gaussian term omitted.
  double without_gauss(double x) const;

  std::vector<double> evaluate(std::span<const double> xs) const;

  /// CSV with columns x,a on `points` uniform points of the domain.
  void write_csv(std::ostream& out, int points) const;

 private:
  Interval domain_;
  ScalarFn mean_;
  ScalarFn transform_;
  std::optional<KLRealization> gauss_;
  std::optional<JumpField> jumps_;
  std::vector<double> discontinuities_;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

/// ā ≡ 0, φ = exp.
SampledCoefficient make_coefficient(Interval domain, std::optional<KLRealization> gauss,
                                    std::optional<JumpField> jumps);

/// Breakpoints Poi(5)+1, heights U[1/4,3/4] on odd and U[5/4,7/4] on even
/// cells, exp of a Matérn field (the basis should have ν = 1/2).
SampledCoefficient preset_alternating_exponential(std::shared_ptr<const KLBasis> basis,
                                                  RandomStream& rng);

/// Breakpoints Poi(5)+1, heights Poi(5)+1, exp of a Matérn field
/// (the basis should be squared-exponential).
SampledCoefficient preset_poisson_squaredexp(std::shared_ptr<const KLBasis> basis,
                                             RandomStream& rng);

/// Poi(10)+1 inclusions of width U[1e-5, 1e-3]; height Poi(30) or
/// 1/Poi(30) with probability 1/2 each; 1 elsewhere. No Gaussian part.
SampledCoefficient preset_inclusions(Interval domain, RandomStream& rng);

/// a ≡ value, no discontinuities.
SampledCoefficient preset_constant(double value, Interval domain = {});

/// a = exp(W) with no jump part.
SampledCoefficient preset_log_gaussian(std::shared_ptr<const KLBasis> basis, RandomStream& rng);

struct UpJump {
  double delta;
};
struct DownJump {
  double delta;
};
struct AlternatingFixed {
  int jumps;
};
struct TwoLevel {
  double outer;
  double inner;
  double width;
};

/// The fixed coefficients of the jump-distance, jump-count and two-level
/// studies. Only AlternatingFixed consumes the stream (uniform positions).
SampledCoefficient preset_deterministic_study(const UpJump& p, Interval domain = {});
SampledCoefficient preset_deterministic_study(const DownJump& p, Interval domain = {});
SampledCoefficient preset_deterministic_study(const AlternatingFixed& p, RandomStream& rng,
                                              Interval domain = {});
SampledCoefficient preset_deterministic_study(const TwoLevel& p, Interval domain = {});

/// Named preset with its parameters, as read from an experiment config.
struct PresetSpec {
  std::string id = "alternating_exponential";
  Interval domain{};
  // Gaussian part (ignored by pure jump presets).
  CovarianceSpec covariance{};
  int n_quad = 1024;
  int cutoff = 0;  // 0: choose by energy_fraction
  double energy_fraction = 0.999;
  // Deterministic study parameters.
  double delta = 1.0 / 16.0;
  int jumps = 4;
  double outer = 1.0;
  double inner = 50.0;
  double width = 0.1;

  bool needs_gauss() const;

  /// Parameters of the named preset as used in the reference experiments.
  static PresetSpec defaults(const std::string& id);
};

/// The preset ids accepted by PresetSpec.
const std::vector<std::string>& preset_ids();

/// Builds the KL basis once and draws realizations of a named preset.
class CoefficientSampler {
 public:
  explicit CoefficientSampler(PresetSpec spec);

  const PresetSpec& spec() const { return spec_; }
  const std::shared_ptr<const KLBasis>& basis() const { return basis_; }

  SampledCoefficient sample(RandomStream& rng) const;

 private:
  PresetSpec spec_;
  std::shared_ptr<const KLBasis> basis_;
};

}  // namespace jumpflux
