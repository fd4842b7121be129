#include "rieszwave/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace rieszwave {

const GaussLegendre<double>& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre<double>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre<double>>(n);
  return *slot;
}

GaussJacobi01::GaussJacobi01(int n, double alpha) : nodes(n), weights(n) {
  if (n < 1 || !(alpha > -1.0)) throw DomainError("GaussJacobi01: need n >= 1 and alpha > -1");
  // Weight (1+x)^alpha on [-1, 1], then x = 2s - 1.
  const double a = 0.0, b = alpha;
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
  for (int i = 0; i < n; ++i) {
    const double s = 2.0 * i + a + b;
    diag(i) = (i == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
  }
  for (int i = 1; i < n; ++i) {
    const double s = 2.0 * i + a + b;
    const double num = 4.0 * i * (i + a) * (i + b) * (i + a + b);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    sub(i - 1) = std::sqrt(num / den);
  }
  const double mu0 = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
  if (n == 1) {
    nodes[0] = 0.5 * (diag(0) + 1.0);
    weights[0] = mu0 / std::pow(2.0, alpha + 1.0);
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
  const double scale = 1.0 / std::pow(2.0, alpha + 1.0);
  for (int i = 0; i < n; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    nodes[i] = 0.5 * (eig.eigenvalues()(i) + 1.0);
    weights[i] = mu0 * v0 * v0 * scale;
  }
}

double WynnEpsilon::push(double partial_sum) {
  // row_ holds the last computed diagonal of the epsilon table.
  std::vector<double> next;
  next.reserve(row_.size() + 1);
  next.push_back(partial_sum);
  double prev_col_prev = 0.0;  // eps_{k-1} of the previous diagonal
  for (std::size_t j = 0; j < row_.size(); ++j) {
    const double diff = next[j] - row_[j];
    double value;
    if (diff == 0.0) {
      value = std::numeric_limits<double>::infinity();
    } else {
      value = (j == 0 ? 0.0 : prev_col_prev) + 1.0 / diff;
    }
    prev_col_prev = row_[j];
    next.push_back(value);
    if (!std::isfinite(value)) break;
  }
  row_ = std::move(next);
  ++count_;
  // Even columns carry the accelerated estimates; take the deepest finite one.
  double best = partial_sum;
  for (std::size_t j = 0; j < row_.size(); j += 2) {
    if (std::isfinite(row_[j])) best = row_[j];
  }
  change_ = count_ > 1 ? std::abs(best - estimate_) : std::abs(best);
  estimate_ = best;
  return estimate_;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MeanStderr mean_and_stderr(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  const double mean = pairwise_sum(values) / double(n);
  if (n == 1) return {mean, 0.0};
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(sq) / double(n - 1);
  return {mean, std::sqrt(var / double(n))};
}

unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = default_workers();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * block, hi = std::min(n, lo + block);
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace rieszwave
