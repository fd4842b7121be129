#ifndef RIESZWAVE_GRID_HPP
#define RIESZWAVE_GRID_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rieszwave/errors.hpp"

namespace rieszwave {

/// Space-time grid on the periodic box [-L, L)^k. Space is split into n_space
/// cells per axis; the sample point of cell j is its centre
/// x_j = -L + (j + 1/2) dx. Times are t_n = n dt for n = 0..n_time.
struct GridSpec {
  double L = 1.0;
  int n_space = 64;
  double dt = 1.0 / 32.0;
  int n_time = 32;
  int k = 1;

  double dx() const { return 2.0 * L / n_space; }
  double cell_volume() const;
  /// Number of spatial points n_space^k.
  std::size_t points() const;
  double time(int n) const { return n * dt; }
  double coord(int j) const { return -L + (j + 0.5) * dx(); }
  /// Index of the cell containing x along one axis (clamped to the grid).
  int cell_of(double x) const;
  /// Multi-index to flat row-major offset and back.
  std::size_t flat(const std::vector<int>& index) const;
  std::vector<int> unflat(std::size_t offset) const;
  Eigen::VectorXd point(std::size_t offset) const;

  /// Throws DomainError naming the violated field.
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// Signed frequency index of DFT bin p on an n-point axis.
inline int signed_bin(int p, int n) { return p <= n / 2 ? p : p - n; }

/// |xi|^2 of the flat DFT bin `offset` on the grid.
double frequency_norm_sq(const GridSpec& grid, std::size_t offset);

}  // namespace rieszwave

#endif  // RIESZWAVE_GRID_HPP
