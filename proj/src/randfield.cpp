#include "jumpflux/randfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "jumpflux/csv.hpp"

namespace jumpflux {

void CovarianceSpec::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw std::invalid_argument("covariance: variance must be positive and finite");
  if (!(correlation_length > 0.0) || !std::isfinite(correlation_length))
    throw std::invalid_argument("covariance: correlation length must be positive and finite");
  if (!(smoothness > 0.0) || std::isnan(smoothness))
    throw std::invalid_argument("covariance: smoothness must be positive or +inf");
  if (!std::isfinite(domain.left) || !std::isfinite(domain.right) || !(domain.length() > 0.0))
    throw std::invalid_argument("covariance: domain must have positive finite length");
}

double matern_kernel_distance(const CovarianceSpec& spec, double r) {
  const double s2 = spec.variance;
  if (r == 0.0) return s2;
  const double nu = spec.smoothness;
  const double rho = spec.correlation_length;
  if (spec.squared_exponential()) return s2 * std::exp(-r * r / (2.0 * rho * rho));

  // Half-integer orders have elementary closed forms.
  const double z = std::sqrt(2.0 * nu) * r / rho;
  if (nu == 0.5) return s2 * std::exp(-z);
  if (nu == 1.5) return s2 * (1.0 + z) * std::exp(-z);
  if (nu == 2.5) return s2 * (1.0 + z + z * z / 3.0) * std::exp(-z);

  // Beyond ~700 the Bessel factor underflows; the kernel is zero to double precision.
  if (z > 700.0) return 0.0;
  const double log_prefactor = (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(z);
  return s2 * std::exp(log_prefactor) * std::cyl_bessel_k(nu, z);
}

double matern_kernel(const CovarianceSpec& spec, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y))
    throw std::invalid_argument("matern_kernel: non-finite argument");
  return matern_kernel_distance(spec, std::abs(x - y));
}

KLBasis::KLBasis(CovarianceSpec spec, Eigen::VectorXd nodes, Eigen::VectorXd weights,
                 Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors)
    : spec_(spec),
      nodes_(std::move(nodes)),
      weights_(std::move(weights)),
      eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)) {
  if (eigenvectors_.cols() != eigenvalues_.size() || eigenvectors_.rows() != nodes_.size() ||
      weights_.size() != nodes_.size())
    throw std::invalid_argument("KLBasis: inconsistent dimensions");
  const double leading = eigenvalues_.size() > 0 ? eigenvalues_(0) : 0.0;
  extension_modes_ = 0;
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    if (leading > 0.0 && eigenvalues_(i) >= 1e-12 * leading) extension_modes_ = static_cast<int>(i) + 1;
  }
}

double KLBasis::quadrature_trace() const {
  double trace = 0.0;
  for (Eigen::Index j = 0; j < nodes_.size(); ++j)
    trace += weights_(j) * matern_kernel_distance(spec_, 0.0);
  return trace;
}

double KLBasis::eigenfunction(int i, double x) const {
  if (i < 0 || i >= cutoff()) throw std::out_of_range("KLBasis::eigenfunction: mode index");
  if (i >= extension_modes_) return 0.0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < nodes_.size(); ++j)
    acc += weights_(j) * matern_kernel_distance(spec_, std::abs(x - nodes_(j))) * eigenvectors_(j, i);
  return acc / eigenvalues_(i);
}

void KLBasis::write_eigenvalues_csv(std::ostream& out) const {
  out << "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i)
    out << (i + 1) << ',' << format_double(eigenvalues_(i)) << '\n';
}

namespace {

struct FullSpectrum {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  Eigen::VectorXd eigenvalues;   // nonincreasing, clipped at zero
  Eigen::MatrixXd eigenvectors;  // quadrature-orthonormal columns
};

FullSpectrum nystrom_full(const CovarianceSpec& spec, int n_quad) {
  spec.validate();
  if (n_quad < 1) throw std::invalid_argument("nystrom: n_quad must be positive");
  const Eigen::Index n = n_quad;
  const double h = spec.domain.length() / static_cast<double>(n_quad);

  FullSpectrum out;
  out.nodes.resize(n);
  out.weights = Eigen::VectorXd::Constant(n, h);
  for (Eigen::Index j = 0; j < n; ++j) out.nodes(j) = spec.domain.left + (static_cast<double>(j) + 0.5) * h;

  // Stationary kernel on a uniform grid: only n distinct distances.
  std::vector<double> by_offset(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < n; ++d)
    by_offset[static_cast<std::size_t>(d)] = matern_kernel_distance(spec, static_cast<double>(d) * h);

  // Symmetrized operator W^{1/2} K W^{1/2}; with uniform weights this is h K.
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = h * by_offset[static_cast<std::size_t>(std::abs(i - j))];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("nystrom: eigendecomposition failed");

  // Eigen returns ascending order.
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse() / std::sqrt(h);
  for (Eigen::Index i = 0; i < n; ++i) out.eigenvalues(i) = std::max(out.eigenvalues(i), 0.0);

  // Fix the sign convention so realizations do not depend on solver internals.
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    out.eigenvectors.col(i).cwiseAbs().maxCoeff(&arg);
    if (out.eigenvectors(arg, i) < 0.0) out.eigenvectors.col(i) *= -1.0;
  }
  return out;
}

std::shared_ptr<const KLBasis> truncate(const CovarianceSpec& spec, FullSpectrum full, int cutoff) {
  return std::make_shared<const KLBasis>(spec, std::move(full.nodes), std::move(full.weights),
                                         full.eigenvalues.head(cutoff),
                                         full.eigenvectors.leftCols(cutoff));
}

}  // namespace

std::shared_ptr<const KLBasis> nystrom_eigenpairs(const CovarianceSpec& spec, int n_quad, int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("nystrom: cutoff must be positive");
  if (cutoff > n_quad)
    throw std::invalid_argument("nystrom: cutoff " + std::to_string(cutoff) + " exceeds n_quad " +
                                std::to_string(n_quad));
  return truncate(spec, nystrom_full(spec, n_quad), cutoff);
}

std::shared_ptr<const KLBasis> nystrom_eigenpairs_by_energy(const CovarianceSpec& spec, int n_quad,
                                                            double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("nystrom: energy fraction must lie in (0, 1]");
  FullSpectrum full = nystrom_full(spec, n_quad);
  const double total = full.eigenvalues.sum();
  double partial = 0.0;
  int cutoff = n_quad;
  for (int i = 0; i < n_quad; ++i) {
    partial += full.eigenvalues(i);
    if (partial >= fraction * total) {
      cutoff = i + 1;
      break;
    }
  }
  return truncate(spec, std::move(full), cutoff);
}

KLRealization::KLRealization(std::shared_ptr<const KLBasis> basis, std::vector<double> z)
    : basis_(std::move(basis)), z_(std::move(z)) {
  if (!basis_) throw std::invalid_argument("KLRealization: null basis");
  if (static_cast<int>(z_.size()) != basis_->cutoff())
    throw std::invalid_argument("KLRealization: need one normal draw per mode");

  const int n = basis_->quadrature_size();
  const auto& vals = basis_->eigenvalues();
  const auto& vecs = basis_->eigenvectors();
  const auto& w = basis_->weights();

  node_values_.assign(static_cast<std::size_t>(n), 0.0);
  extension_coeffs_.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < basis_->cutoff(); ++i) {
    const double zi = z_[static_cast<std::size_t>(i)];
    const double amp = std::sqrt(vals(i)) * zi;
    const bool extend = i < basis_->extension_modes();
    const double ext = extend ? zi / std::sqrt(vals(i)) : 0.0;
    for (int j = 0; j < n; ++j) {
      node_values_[static_cast<std::size_t>(j)] += amp * vecs(j, i);
      extension_coeffs_[static_cast<std::size_t>(j)] += ext * vecs(j, i);
    }
  }
  for (int j = 0; j < n; ++j) extension_coeffs_[static_cast<std::size_t>(j)] *= w(j);
  truncation_cap_ = n > 0 ? *std::max_element(node_values_.begin(), node_values_.end()) : 0.0;
}

double KLRealization::operator()(double x) const {
  const auto& nodes = basis_->nodes();
  const auto& spec = basis_->spec();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < nodes.size(); ++j)
    acc += matern_kernel_distance(spec, std::abs(x - nodes(j))) * extension_coeffs_[static_cast<std::size_t>(j)];
  if (!spec.domain.contains(x)) acc = std::min(acc, truncation_cap_);
  return acc;
}

KLRealization kl_sample(std::shared_ptr<const KLBasis> basis, RandomStream& rng) {
  if (!basis) throw std::invalid_argument("kl_sample: null basis");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(static_cast<std::size_t>(basis->cutoff()));
  for (auto& zi : z) zi = normal(rng);
  return KLRealization(std::move(basis), std::move(z));
}

}  // namespace jumpflux
