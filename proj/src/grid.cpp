#include "rieszwave/grid.hpp"
#include <algorithm>

#include <cmath>
#include <numbers>

namespace rieszwave {

double GridSpec::cell_volume() const { return std::pow(dx(), k); }

std::size_t GridSpec::points() const {
  std::size_t n = 1;
  for (int i = 0; i < k; ++i) n *= static_cast<std::size_t>(n_space);
  return n;
}

int GridSpec::cell_of(double x) const {
  const int j = static_cast<int>(std::floor((x + L) / dx()));
  return std::clamp(j, 0, n_space - 1);
}

std::size_t GridSpec::flat(const std::vector<int>& index) const {
  if (static_cast<int>(index.size()) != k) throw IndexError("grid index has wrong rank");
  std::size_t off = 0;
  for (int a = 0; a < k; ++a) {
    if (index[a] < 0 || index[a] >= n_space) throw IndexError("grid index out of range");
    off = off * n_space + static_cast<std::size_t>(index[a]);
  }
  return off;
}

std::vector<int> GridSpec::unflat(std::size_t offset) const {
  std::vector<int> index(k);
  for (int a = k - 1; a >= 0; --a) {
    index[a] = static_cast<int>(offset % n_space);
    offset /= n_space;
  }
  return index;
}

Eigen::VectorXd GridSpec::point(std::size_t offset) const {
  const auto index = unflat(offset);
  Eigen::VectorXd x(k);
  for (int a = 0; a < k; ++a) x(a) = coord(index[a]);
  return x;
}

void GridSpec::validate() const {
  if (k < 1 || k > 3) throw DomainError("grid.k must be 1, 2 or 3");
  if (n_space < 8 || (n_space & (n_space - 1)) != 0) {
    throw DomainError("grid.n_space must be a power of two >= 8");
  }
  if (!(L > 0)) throw DomainError("grid.L must be > 0");
  if (!(dt > 0)) throw DomainError("grid.dt must be > 0");
  if (n_time < 1) throw DomainError("grid.n_time must be >= 1");
}

double frequency_norm_sq(const GridSpec& grid, std::size_t offset) {
  const double base = 2.0 * std::numbers::pi / (2.0 * grid.L);
  double s = 0;
  for (int a = grid.k - 1; a >= 0; --a) {
    const int p = static_cast<int>(offset % grid.n_space);
    offset /= grid.n_space;
    const double xi = base * signed_bin(p, grid.n_space);
    s += xi * xi;
  }
  return s;
}

}  // namespace rieszwave
