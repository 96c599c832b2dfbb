#pragma once

// One-dimensional finite-volume meshes: equidistant, aligned with the
// coefficient discontinuities, and with refined wave cells next to them.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jumpflux/randfield.hpp"

namespace jumpflux {

class Mesh {
 public:
  /// `interfaces` must be strictly increasing with at least two entries.
  /// `flagged` lists interface indices that carry a coefficient jump.
  Mesh(std::vector<double> interfaces, std::vector<std::size_t> flagged = {});

  std::size_t cells() const { return interfaces_.size() - 1; }
  const std::vector<double>& interfaces() const { return interfaces_; }
  const std::vector<double>& sizes() const { return sizes_; }
  const std::vector<double>& centers() const { return centers_; }
  /// Sorted interface indices aligned with discontinuities.
  const std::vector<std::size_t>& flagged() const { return flagged_; }
  bool is_flagged(std::size_t interface_index) const;

  Interval domain() const { return {interfaces_.front(), interfaces_.back()}; }
  double min_h() const { return min_h_; }
  double max_h() const { return max_h_; }

  /// CSV with columns index,x,flagged.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<double> interfaces_;
  std::vector<double> sizes_;
  std::vector<double> centers_;
  std::vector<std::size_t> flagged_;
  double min_h_ = 0.0;
  double max_h_ = 0.0;
};

enum class MeshStrategy { Equidistant, JumpAdapted, WaveCell };

const char* to_string(MeshStrategy s);
MeshStrategy mesh_strategy_from_string(const std::string& name);

Mesh build_equidistant(int cells, Interval domain = {});

/// Equidistant grid of `target_cells` with every jump inserted as a flagged
/// interface. Uniform interfaces closer than 0.1 h to a jump are dropped.
Mesh build_jump_adapted(int target_cells, std::span<const double> jumps, Interval domain = {});

/// Splits every wave cell (neighbour of a flagged interface) of size at
/// least 2 min_h so that the piece touching the discontinuity lies in
/// [min_h, 2 min_h). min_h is taken from the input mesh and never decreases.
Mesh refine_wave_cells(const Mesh& mesh);

/// Builds the mesh of the given strategy for a coefficient with jumps at `jumps`.
Mesh build_mesh(MeshStrategy strategy, int target_cells, std::span<const double> jumps,
                Interval domain = {});

/// Uniform time levels 0, dt, 2dt, ... with the last step clamped onto t_end.
std::vector<double> build_time_grid(double t_end, double dt);

}  // namespace jumpflux
