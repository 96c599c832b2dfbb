#include "jumpflux/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "jumpflux/csv.hpp"

namespace jumpflux {

Mesh::Mesh(std::vector<double> interfaces, std::vector<std::size_t> flagged)
    : interfaces_(std::move(interfaces)), flagged_(std::move(flagged)) {
  if (interfaces_.size() < 2) throw std::invalid_argument("Mesh: need at least one cell");
  const std::size_t n = interfaces_.size() - 1;
  sizes_.resize(n);
  centers_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = interfaces_[i];
    const double r = interfaces_[i + 1];
    if (!std::isfinite(l) || !std::isfinite(r) || !(r > l))
      throw std::invalid_argument("Mesh: interfaces must be finite and strictly increasing");
    sizes_[i] = r - l;
    centers_[i] = 0.5 * (l + r);
  }
  std::sort(flagged_.begin(), flagged_.end());
  flagged_.erase(std::unique(flagged_.begin(), flagged_.end()), flagged_.end());
  for (std::size_t k : flagged_)
    if (k == 0 || k >= n) throw std::invalid_argument("Mesh: flagged index must be an interior interface");
  auto [lo, hi] = std::minmax_element(sizes_.begin(), sizes_.end());
  min_h_ = *lo;
  max_h_ = *hi;
}

bool Mesh::is_flagged(std::size_t interface_index) const {
  return std::binary_search(flagged_.begin(), flagged_.end(), interface_index);
}

void Mesh::write_csv(std::ostream& out) const {
  out << "index,x,flagged\n";
  for (std::size_t k = 0; k < interfaces_.size(); ++k)
    out << k << ',' << format_double(interfaces_[k]) << ',' << (is_flagged(k) ? 1 : 0) << '\n';
}

const char* to_string(MeshStrategy s) {
  switch (s) {
    case MeshStrategy::Equidistant: return "equidistant";
    case MeshStrategy::JumpAdapted: return "jump_adapted";
    case MeshStrategy::WaveCell: return "wave_cell";
  }
  return "?";
}

MeshStrategy mesh_strategy_from_string(const std::string& name) {
  if (name == "equidistant") return MeshStrategy::Equidistant;
  if (name == "jump_adapted") return MeshStrategy::JumpAdapted;
  if (name == "wave_cell") return MeshStrategy::WaveCell;
  throw std::invalid_argument("unknown meshing strategy '" + name + "'");
}

namespace {

std::vector<double> uniform_points(int cells, Interval domain) {
  if (cells < 1) throw std::invalid_argument("mesh: cell count must be positive");
  if (!(domain.length() > 0.0)) throw std::invalid_argument("mesh: empty domain");
  std::vector<double> x(static_cast<std::size_t>(cells) + 1);
  const double h = domain.length() / cells;
  for (int k = 0; k <= cells; ++k) x[static_cast<std::size_t>(k)] = domain.left + h * k;
  x.back() = domain.right;
  return x;
}

}  // namespace

Mesh build_equidistant(int cells, Interval domain) { return Mesh(uniform_points(cells, domain)); }

Mesh build_jump_adapted(int target_cells, std::span<const double> jumps, Interval domain) {
  std::vector<double> uniform = uniform_points(target_cells, domain);
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const double d = jumps[k];
    if (!std::isfinite(d) || !(d > domain.left && d < domain.right))
      throw std::invalid_argument("build_jump_adapted: jump outside the open domain");
    if (k > 0 && !(d > jumps[k - 1]))
      throw std::invalid_argument("build_jump_adapted: jumps must be sorted and distinct");
  }
  const double threshold = 0.1 * domain.length() / target_cells;

  // Keep the domain ends; drop interior uniform points crowding a jump.
  std::vector<double> kept;
  kept.reserve(uniform.size() + jumps.size());
  for (std::size_t k = 0; k < uniform.size(); ++k) {
    const double x = uniform[k];
    const bool end = (k == 0 || k + 1 == uniform.size());
    if (!end) {
      auto it = std::lower_bound(jumps.begin(), jumps.end(), x);
      bool crowded = false;
      if (it != jumps.end() && *it - x < threshold) crowded = true;
      if (it != jumps.begin() && x - *(it - 1) < threshold) crowded = true;
      if (crowded) continue;
    }
    kept.push_back(x);
  }

  std::vector<double> merged;
  merged.reserve(kept.size() + jumps.size());
  std::merge(kept.begin(), kept.end(), jumps.begin(), jumps.end(), std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  std::vector<std::size_t> flagged;
  flagged.reserve(jumps.size());
  for (double d : jumps) {
    auto it = std::lower_bound(merged.begin(), merged.end(), d);
    flagged.push_back(static_cast<std::size_t>(it - merged.begin()));
  }
  return Mesh(std::move(merged), std::move(flagged));
}

Mesh refine_wave_cells(const Mesh& mesh) {
  const double m = mesh.min_h();
  const double cap = 2.0 * m * (1.0 - 1e-9);
  const auto& x = mesh.interfaces();
  const std::size_t n = mesh.cells();

  // Interior split point such that [a, p] has size in [m, 2m) and [p, b] >= m.
  // Returns false if rounding makes that impossible.
  auto split_from_left = [&](double a, double b, double& p) {
    const double width = b - a;
    p = a + std::min(0.5 * width, cap);
    while (p - a < m) p = std::nextafter(p, b);
    while (p - a >= 2.0 * m) p = std::nextafter(p, a);
    return p - a >= m && b - p >= m;
  };
  auto split_from_right = [&](double a, double b, double& p) {
    const double width = b - a;
    p = b - std::min(0.5 * width, cap);
    while (b - p < m) p = std::nextafter(p, a);
    while (b - p >= 2.0 * m) p = std::nextafter(p, b);
    return b - p >= m && p - a >= m;
  };

  std::vector<double> out;
  out.reserve(x.size() + 2 * mesh.flagged().size());
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i];
    const double b = x[i + 1];
    out.push_back(a);
    const bool left_jump = mesh.is_flagged(i);
    const bool right_jump = mesh.is_flagged(i + 1);
    if (!left_jump && !right_jump) continue;
    if (b - a < 2.0 * m) continue;

    double p = 0.0;
    if (left_jump) {
      if (!split_from_left(a, b, p)) continue;
      out.push_back(p);
      if (right_jump && b - p >= 2.0 * m) {
        double q = 0.0;
        if (split_from_right(p, b, q)) out.push_back(q);
      }
    } else if (split_from_right(a, b, p)) {
      out.push_back(p);
    }
  }
  out.push_back(x.back());

  // Re-locate the flagged interfaces in the refined list.
  std::vector<std::size_t> flagged;
  flagged.reserve(mesh.flagged().size());
  for (std::size_t k : mesh.flagged()) {
    auto it = std::lower_bound(out.begin(), out.end(), x[k]);
    flagged.push_back(static_cast<std::size_t>(it - out.begin()));
  }
  return Mesh(std::move(out), std::move(flagged));
}

Mesh build_mesh(MeshStrategy strategy, int target_cells, std::span<const double> jumps, Interval domain) {
  switch (strategy) {
    case MeshStrategy::Equidistant: return build_equidistant(target_cells, domain);
    case MeshStrategy::JumpAdapted: return build_jump_adapted(target_cells, jumps, domain);
    case MeshStrategy::WaveCell: return refine_wave_cells(build_jump_adapted(target_cells, jumps, domain));
  }
  throw std::invalid_argument("build_mesh: unknown strategy");
}

std::vector<double> build_time_grid(double t_end, double dt) {
  if (!(t_end > 0.0) || !(dt > 0.0)) throw std::invalid_argument("build_time_grid: t_end and dt must be positive");
  std::vector<double> t{0.0};
  // Steps whose end lies within a relative 1e-12 of t_end land exactly on it.
  for (std::size_t k = 1;; ++k) {
    const double next = static_cast<double>(k) * dt;
    if (next >= t_end * (1.0 - 1e-12)) {
      t.push_back(t_end);
      break;
    }
    t.push_back(next);
  }
  return t;
}

}  // namespace jumpflux
