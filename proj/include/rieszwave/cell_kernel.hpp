#ifndef RIESZWAVE_CELL_KERNEL_HPP
#define RIESZWAVE_CELL_KERNEL_HPP

// Integrals of the Riesz kernel |x-y|^{-gamma} over pairs of lattice cells.
// For unit cells C_0 = [0,1]^k and C_D = D + [0,1]^k,
//   I(D) = \int_{C_0} \int_{C_D} |x-y|^{-gamma} dx dy = \int_{[-1,1]^k} prod(1-|u_i|) |u+D|^{-gamma} du,
// and a cell pair of side h scales as h^{2k-gamma} I(D).

#include <array>
#include <map>
#include <mutex>
#include <span>
#include <vector>

namespace rieszwave {

/// \int_{R1} \int_{R2} |x-y|^{-gamma} dx dy for axis-aligned boxes in R^k,
/// k = lo1.size() in {1,2,3}. Throws DomainError when the integral diverges.
double box_pair_integral(std::span<const double> lo1, std::span<const double> hi1,
                         std::span<const double> lo2, std::span<const double> hi2, double gamma);

/// 1-D closed form: F(D+1) - 2F(D) + F(D-1) with F'' = |z|^{-gamma}.
double cell_pair_unit_1d(long long offset, double gamma);

/// I(D) for k = offset.size() in {1,2,3} and gamma < k. gamma may be <= 0.
double cell_pair_unit(std::span<const int> offset, double gamma);

/// Mean of |x-y|^{-gamma} over a pair of cells of side h at lattice offset D.
double cell_pair_mean(std::span<const int> offset, double h, double gamma);

/// Mean of log|x-y| over a pair of cells of side h at lattice offset D.
double cell_pair_mean_log(std::span<const int> offset, double h);

/// Memoized unit-cell means for one (k, gamma). Offsets with sup-norm above
/// exact_radius use the midpoint value |D|^{-gamma} (or -log|D| for the
/// logarithmic kernel, selected by log_kernel). Thread-safe.
class CellKernelTable {
 public:
  CellKernelTable(int k, double gamma, int exact_radius, bool log_kernel = false);

  /// Unit-side mean of the kernel (|.|^{-gamma}, or log|.| when log_kernel).
  double unit_mean(std::span<const int> offset) const;
  int k() const { return k_; }
  double gamma() const { return gamma_; }
  bool log_kernel() const { return log_; }

 private:
  int k_;
  double gamma_;
  int radius_;
  bool log_;
  mutable std::mutex mutex_;
  mutable std::map<std::array<int, 3>, double> cache_;
};

}  // namespace rieszwave

#endif  // RIESZWAVE_CELL_KERNEL_HPP
