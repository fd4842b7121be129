#include "rieszwave/cell_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "rieszwave/errors.hpp"
#include "rieszwave/numerics.hpp"

namespace rieszwave {

namespace {

// Second antiderivative of |z|^{-gamma}, vanishing at 0 where finite.
double second_antiderivative(double z, double gamma) {
  const double a = std::abs(z);
  if (a == 0.0) return 0.0;
  if (gamma == 1.0) return a * std::log(a) - a;
  if (gamma == 2.0) return -std::log(a);
  return std::pow(a, 2.0 - gamma) / ((1.0 - gamma) * (2.0 - gamma));
}

using Vec3 = std::array<double, 3>;

// Overlap length |[lo1,hi1] ∩ [lo2+u, hi2+u]| along one axis.
struct Trapezoid {
  double lo1, hi1, lo2, hi2;
  double operator()(double u) const {
    return std::max(0.0, std::min(hi1, hi2 + u) - std::max(lo1, lo2 + u));
  }
  std::vector<double> breaks() const {
    std::vector<double> b = {lo1 - hi2, lo1 - lo2, hi1 - hi2, hi1 - lo2};
    std::sort(b.begin(), b.end());
    return b;
  }
};

// \int prod_i T_i(u_i) |u|^{-gamma} du, the kernel singular at u = 0 only.
class PairIntegrator {
 public:
  PairIntegrator(int k, double gamma, std::vector<Trapezoid> axes)
      : k_(k), gamma_(gamma), axes_(std::move(axes)), gl_(gauss_legendre(10)),
        jac_(12, k - 1.0 - gamma) {}

  double run() {
    std::array<std::vector<double>, 3> cuts;
    for (int i = 0; i < k_; ++i) {
      auto b = axes_[i].breaks();
      if (0.0 > b.front() && 0.0 < b.back()) b.push_back(0.0);
      std::sort(b.begin(), b.end());
      b.erase(std::unique(b.begin(), b.end()), b.end());
      cuts[i] = b;
    }
    double total = 0;
    std::array<std::size_t, 3> idx{0, 0, 0};
    std::array<std::size_t, 3> count{1, 1, 1};
    for (int i = 0; i < k_; ++i) count[i] = cuts[i].size() - 1;
    for (idx[2] = 0; idx[2] < count[2]; ++idx[2]) {
      for (idx[1] = 0; idx[1] < count[1]; ++idx[1]) {
        for (idx[0] = 0; idx[0] < count[0]; ++idx[0]) {
          Vec3 lo{}, hi{};
          bool empty = false;
          for (int i = 0; i < k_; ++i) {
            lo[i] = cuts[i][idx[i]];
            hi[i] = cuts[i][idx[i] + 1];
            if (!(hi[i] > lo[i])) empty = true;
          }
          if (!empty) total += piece(lo, hi, 0);
        }
      }
    }
    return total;
  }

 private:
  double weight(const Vec3& u) const {
    double t = 1.0;
    for (int i = 0; i < k_; ++i) t *= axes_[i](u[i]);
    return t;
  }

  double kernel(const Vec3& u) const {
    double r2 = 0;
    for (int i = 0; i < k_; ++i) r2 += u[i] * u[i];
    return std::pow(r2, -0.5 * gamma_);
  }

  double piece(const Vec3& lo, const Vec3& hi, int depth) {
    bool at_corner = true;
    double dist2 = 0, diam2 = 0;
    for (int i = 0; i < k_; ++i) {
      if (!(lo[i] == 0.0 || hi[i] == 0.0)) at_corner = false;
      const double d = lo[i] > 0 ? lo[i] : (hi[i] < 0 ? -hi[i] : 0.0);
      dist2 += d * d;
      diam2 += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    }
    if (at_corner) return duffy(lo, hi);
    if (dist2 >= 2.25 * diam2 || depth >= 48) return tensor(lo, hi);
    double total = 0;
    for (int mask = 0; mask < (1 << k_); ++mask) {
      Vec3 a{}, b{};
      for (int i = 0; i < k_; ++i) {
        const double mid = 0.5 * (lo[i] + hi[i]);
        a[i] = (mask >> i & 1) ? mid : lo[i];
        b[i] = (mask >> i & 1) ? hi[i] : mid;
      }
      total += piece(a, b, depth + 1);
    }
    return total;
  }

  double tensor(const Vec3& lo, const Vec3& hi) const {
    const int n = static_cast<int>(gl_.nodes.size());
    int count = 1;
    for (int i = 0; i < k_; ++i) count *= n;
    double total = 0;
    for (int flat = 0; flat < count; ++flat) {
      int f = flat;
      double w = 1.0;
      Vec3 u{};
      for (int i = 0; i < k_; ++i) {
        const int q = f % n;
        f /= n;
        const double half = 0.5 * (hi[i] - lo[i]);
        u[i] = lo[i] + half * (1.0 + gl_.nodes[q]);
        w *= gl_.weights[q] * half;
      }
      total += w * weight(u) * kernel(u);
    }
    return total;
  }

  // Singular corner at the origin: u_i = dir_i L_i y_i with y in [0,1]^k, split
  // by the largest y_j = t, integrate t^{k-1-gamma} exactly against the weight.
  double duffy(const Vec3& lo, const Vec3& hi) const {
    Vec3 len{}, dir{};
    double jac = 1.0;
    for (int i = 0; i < k_; ++i) {
      len[i] = hi[i] - lo[i];
      dir[i] = lo[i] == 0.0 ? 1.0 : -1.0;
      jac *= len[i];
    }
    const int n = static_cast<int>(gl_.nodes.size());
    int wcount = 1;
    for (int i = 1; i < k_; ++i) wcount *= n;
    double total = 0;
    for (int j = 0; j < k_; ++j) {
      for (int flat = 0; flat < wcount; ++flat) {
        Vec3 w{};
        double ww = 1.0;
        int f = flat;
        for (int i = 0; i < k_; ++i) {
          if (i == j) {
            w[i] = 1.0;
            continue;
          }
          const int q = f % n;
          f /= n;
          w[i] = 0.5 * (1.0 + gl_.nodes[q]);
          ww *= 0.5 * gl_.weights[q];
        }
        double s2 = 0;
        for (int i = 0; i < k_; ++i) s2 += len[i] * len[i] * w[i] * w[i];
        const double angular = std::pow(s2, -0.5 * gamma_);
        double radial = 0;
        for (std::size_t q = 0; q < jac_.nodes.size(); ++q) {
          const double t = jac_.nodes[q];
          Vec3 u{};
          for (int i = 0; i < k_; ++i) u[i] = dir[i] * len[i] * t * w[i];
          radial += jac_.weights[q] * weight(u);
        }
        total += ww * angular * radial;
      }
    }
    return jac * total;
  }

  int k_;
  double gamma_;
  std::vector<Trapezoid> axes_;
  const GaussLegendre<double>& gl_;
  GaussJacobi01 jac_;
};

}  // namespace

double box_pair_integral(std::span<const double> lo1, std::span<const double> hi1,
                         std::span<const double> lo2, std::span<const double> hi2, double gamma) {
  const int k = static_cast<int>(lo1.size());
  if (k < 1 || k > 3 || hi1.size() != lo1.size() || lo2.size() != lo1.size() ||
      hi2.size() != lo1.size()) {
    throw DomainError("box_pair_integral: boxes must share a dimension in {1,2,3}");
  }
  bool overlap = true;
  for (int i = 0; i < k; ++i) {
    if (!(hi1[i] >= lo1[i] && hi2[i] >= lo2[i])) throw DomainError("box_pair_integral: empty box");
    if (hi1[i] - lo1[i] == 0.0 || hi2[i] - lo2[i] == 0.0) return 0.0;
    if (!(lo1[i] < hi2[i] && lo2[i] < hi1[i])) overlap = false;
  }
  if (k == 1) {
    if (overlap && !(gamma < 1.0)) throw DomainError("box_pair_integral: diverges for gamma >= 1");
    auto F = [gamma](double z) { return second_antiderivative(z, gamma); };
    return -(F(hi1[0] - hi2[0]) - F(hi1[0] - lo2[0]) - F(lo1[0] - hi2[0]) + F(lo1[0] - lo2[0]));
  }
  if (!(gamma < k)) {
    // Touching or overlapping boxes diverge; separated ones do not.
    bool touching = true;
    for (int i = 0; i < k; ++i) {
      if (!(lo1[i] <= hi2[i] && lo2[i] <= hi1[i])) touching = false;
    }
    if (touching) throw DomainError("box_pair_integral: diverges for gamma >= k");
  }
  std::vector<Trapezoid> axes;
  for (int i = 0; i < k; ++i) axes.push_back({lo1[i], hi1[i], lo2[i], hi2[i]});
  return PairIntegrator(k, std::min(gamma, k - 1e-9), std::move(axes)).run();
}

double cell_pair_unit_1d(long long offset, double gamma) {
  const double d = static_cast<double>(offset);
  if (offset == 0 && !(gamma < 1.0)) {
    throw DomainError("cell_pair_unit_1d: self pair diverges for gamma >= 1");
  }
  if (std::llabs(offset) == 1 && !(gamma < 2.0)) {
    throw DomainError("cell_pair_unit_1d: adjacent pair diverges for gamma >= 2");
  }
  return second_antiderivative(d + 1.0, gamma) - 2.0 * second_antiderivative(d, gamma) +
         second_antiderivative(d - 1.0, gamma);
}

double cell_pair_unit(std::span<const int> offset, double gamma) {
  const int k = static_cast<int>(offset.size());
  if (k < 1 || k > 3) throw DomainError("cell_pair_unit: dimension must be 1, 2 or 3");
  if (k == 1) return cell_pair_unit_1d(offset[0], gamma);
  std::array<double, 3> lo1{}, hi1{}, lo2{}, hi2{};
  for (int i = 0; i < k; ++i) {
    hi1[i] = 1.0;
    lo2[i] = offset[i];
    hi2[i] = offset[i] + 1.0;
  }
  return box_pair_integral(std::span<const double>(lo1.data(), k), std::span<const double>(hi1.data(), k),
                           std::span<const double>(lo2.data(), k), std::span<const double>(hi2.data(), k),
                           gamma);
}

double cell_pair_mean(std::span<const int> offset, double h, double gamma) {
  if (!(h > 0)) throw DomainError("cell_pair_mean: h must be > 0");
  return std::pow(h, -gamma) * cell_pair_unit(offset, gamma);
}

double cell_pair_mean_log(std::span<const int> offset, double h) {
  if (!(h > 0)) throw DomainError("cell_pair_mean_log: h must be > 0");
  double unit;
  if (offset.size() == 1) {
    auto F = [](double z) {
      const double a = std::abs(z);
      return a == 0.0 ? 0.0 : 0.5 * a * a * std::log(a) - 0.75 * a * a;
    };
    const double d = offset[0];
    unit = F(d + 1.0) - 2.0 * F(d) + F(d - 1.0);
  } else {
    const double step = 1e-5;
    unit = -(cell_pair_unit(offset, step) - cell_pair_unit(offset, -step)) / (2.0 * step);
  }
  return std::log(h) + unit;
}

CellKernelTable::CellKernelTable(int k, double gamma, int exact_radius, bool log_kernel)
    : k_(k), gamma_(gamma), radius_(exact_radius), log_(log_kernel) {
  if (k < 1 || k > 3) throw DomainError("CellKernelTable: k must be 1, 2 or 3");
}

double CellKernelTable::unit_mean(std::span<const int> offset) const {
  std::array<int, 3> key{0, 0, 0};
  int sup = 0;
  for (int i = 0; i < k_; ++i) {
    key[i] = std::abs(offset[i]);
    sup = std::max(sup, key[i]);
  }
  std::sort(key.begin(), key.begin() + k_);
  if (sup > radius_) {
    double r2 = 0;
    for (int i = 0; i < k_; ++i) r2 += double(key[i]) * key[i];
    return log_ ? 0.5 * std::log(r2) : std::pow(r2, -0.5 * gamma_);
  }
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  std::span<const int> canon(key.data(), k_);
  const double v = log_ ? cell_pair_mean_log(canon, 1.0) : cell_pair_unit(canon, gamma_);
  std::lock_guard lock(mutex_);
  cache_.emplace(key, v);
  return v;
}

}  // namespace rieszwave
