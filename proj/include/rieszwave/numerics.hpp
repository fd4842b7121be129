#ifndef RIESZWAVE_NUMERICS_HPP
#define RIESZWAVE_NUMERICS_HPP

// Quadrature, series acceleration and deterministic reduction helpers shared
// by every module.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "rieszwave/errors.hpp"

namespace rieszwave {

template <typename Scalar>
struct QuadratureResult {
  Scalar value{0};
  Scalar error{0};
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
template <typename Scalar>
struct GaussLegendre {
  std::vector<Scalar> nodes;
  std::vector<Scalar> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
    for (int i = 0; i < (n + 1) / 2; ++i) {
      Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
      Scalar dp = 0;
      for (int iter = 0; iter < 100; ++iter) {
        Scalar p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        const Scalar dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < Scalar(1e-16)) break;
      }
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Scalar w = 2 / ((1 - x * x) * dp * dp);
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
  }

  /// Integrates f over [a, b].
  template <typename F>
  Scalar integrate(F&& f, Scalar a, Scalar b) const {
    const Scalar half = (b - a) / 2, mid = (a + b) / 2;
    Scalar s = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

/// Shared read-only rule instances (built once; safe for concurrent reads).
const GaussLegendre<double>& gauss_legendre(int n);

/// n-point rule for integrals of the form \int_0^1 s^alpha f(s) ds, alpha > -1
/// (Golub-Welsch on the Jacobi recurrence).
struct GaussJacobi01 {
  std::vector<double> nodes;
  std::vector<double> weights;
  GaussJacobi01(int n, double alpha);
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
QuadratureResult<double> gauss_kronrod15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kKronrodNodes[j];
    const double f1 = f(c - dx), f2 = f(c + dx);
    kronrod += kKronrodWeights[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive 15-point Gauss-Kronrod quadrature on a finite interval.
/// Throws ConvergenceError (carrying the partial estimate) when the interval
/// budget is exhausted before abs_tol or rel_tol*|value| is met.
template <typename F>
QuadratureResult<double> integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                            double rel_tol, int max_intervals = 4000) {
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  std::priority_queue<Piece> heap;
  auto first = detail::gauss_kronrod15(f, a, b);
  heap.push({a, b, first.value, first.error});
  double total = first.value, err = first.error;
  int n = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (n >= max_intervals) {
      throw ConvergenceError("adaptive quadrature exceeded its interval budget", total);
    }
    Piece p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    auto left = detail::gauss_kronrod15(f, p.a, m);
    auto right = detail::gauss_kronrod15(f, m, p.b);
    total += left.value + right.value - p.value;
    err += left.error + right.error - p.error;
    heap.push({p.a, m, left.value, left.error});
    heap.push({m, p.b, right.value, right.error});
    n += 1;
  }
  // Re-sum to shed the drift of the incremental updates.
  total = 0;
  err = 0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {total, err};
}

/// Wynn's epsilon algorithm over a growing sequence of partial sums.
class WynnEpsilon {
 public:
  /// Appends a partial sum and returns the current accelerated estimate.
  double push(double partial_sum);
  double estimate() const { return estimate_; }
  /// Difference between the last two accelerated estimates.
  double change() const { return change_; }

 private:
  std::vector<double> row_;
  double estimate_ = 0;
  double change_ = 0;
  std::size_t count_ = 0;
};

/// Pairwise (cascade) summation in a fixed tree order.
double pairwise_sum(std::span<const double> values);

struct MeanStderr {
  double mean = 0;
  double stderr_ = 0;
};

/// Sample mean and standard error, reduced with pairwise summation.
MeanStderr mean_and_stderr(std::span<const double> values);

/// Runs body(i) for i in [0, n) on `workers` threads. Work is split into
/// contiguous blocks; results must be written to per-index slots so the
/// outcome does not depend on the worker count.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

/// Worker count used when callers pass 0.
unsigned default_workers();

}  // namespace rieszwave

#endif  // RIESZWAVE_NUMERICS_HPP
