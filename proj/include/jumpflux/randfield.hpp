#pragma once

// Matérn covariance operators, their Nyström spectral approximation and
// truncated Karhunen-Loève sampling of a Gaussian random field on an interval.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace jumpflux {

/// Closed interval [left, right] of the real line.
struct Interval {
  double left = 0.0;
  double right = 1.0;

  double length() const { return right - left; }
  bool contains(double x) const { return x >= left && x <= right; }
};

/// Per-sample generator. Streams are seeded as master_seed + sample_index.
using RandomStream = std::mt19937_64;

inline RandomStream make_stream(std::uint64_t master_seed, std::uint64_t index) {
  return RandomStream(master_seed + index);
}

struct CovarianceSpec {
  static constexpr double kInfiniteSmoothness = std::numeric_limits<double>::infinity();

  double smoothness = 0.5;  // ν; +inf selects the squared-exponential limit
  double variance = 1.0;    // σ²
  double correlation_length = 0.1;
  Interval domain{};

  bool squared_exponential() const { return smoothness == kInfiniteSmoothness; }

  /// Throws std::invalid_argument if any parameter is out of range.
  void validate() const;
};

/// Matérn kernel value k(x, y). Exactly symmetric; returns σ² for x == y.
double matern_kernel(const CovarianceSpec& spec, double x, double y);

/// Kernel as a function of the distance r = |x - y| >= 0.
double matern_kernel_distance(const CovarianceSpec& spec, double r);

/// Leading eigenpairs of the covariance operator from a midpoint-rule
/// Nyström discretization. Immutable once built.
class KLBasis {
 public:
  KLBasis(CovarianceSpec spec, Eigen::VectorXd nodes, Eigen::VectorXd weights,
          Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors);

  const CovarianceSpec& spec() const { return spec_; }
  int cutoff() const { return static_cast<int>(eigenvalues_.size()); }
  int quadrature_size() const { return static_cast<int>(nodes_.size()); }

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Column i holds e_i at the quadrature nodes, quadrature-orthonormal.
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  /// Σ_j w_j k(x_j, x_j), the trace of the discretized operator.
  double quadrature_trace() const;

  /// Modes retained for off-node (Nyström extension) evaluation:
  /// those with η_i >= 1e-12 η_1.
  int extension_modes() const { return extension_modes_; }

  /// Nyström extension of the i-th eigenfunction to an arbitrary point.
  double eigenfunction(int i, double x) const;

  /// CSV with columns index,eigenvalue.
  void write_eigenvalues_csv(std::ostream& out) const;

 private:
  CovarianceSpec spec_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  int extension_modes_ = 0;
};

/// Builds the basis from n_quad midpoint nodes and keeps the leading
/// `cutoff` eigenpairs.
std::shared_ptr<const KLBasis> nystrom_eigenpairs(const CovarianceSpec& spec, int n_quad,
                                                  int cutoff);

/// Smallest cutoff whose partial eigenvalue sum reaches `fraction` of the
/// full sum, computed from the n_quad-point discretization.
std::shared_ptr<const KLBasis> nystrom_eigenpairs_by_energy(const CovarianceSpec& spec,
                                                            int n_quad, double fraction);

/// One realization W^N(x) = Σ sqrt(η_i) e_i(x) Z_i of the truncated expansion.
class KLRealization {
 public:
  KLRealization(std::shared_ptr<const KLBasis> basis, std::vector<double> z);

  const KLBasis& basis() const { return *basis_; }
  const std::vector<double>& z() const { return z_; }

  /// sup over the quadrature nodes; caps evaluation outside the domain.
  double truncation_cap() const { return truncation_cap_; }

  /// Field value at quadrature node j (exact KL sum, no extension).
  double at_node(int j) const { return node_values_[static_cast<std::size_t>(j)]; }

  /// Field value at x. Inside the domain this is the Nyström-extended
  /// expansion; outside, min(W(x), truncation_cap).
  double operator()(double x) const;

 private:
  std::shared_ptr<const KLBasis> basis_;
  std::vector<double> z_;
  std::vector<double> node_values_;
  // W(x) = Σ_j k(x, x_j) c_j for the retained modes.
  std::vector<double> extension_coeffs_;
  double truncation_cap_ = 0.0;
};

/// Draws N independent standard normals from the stream.
KLRealization kl_sample(std::shared_ptr<const KLBasis> basis, RandomStream& rng);

}  // namespace jumpflux
