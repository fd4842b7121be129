#include "rieszwave/noise_field.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "rieszwave/cell_kernel.hpp"
#include "rieszwave/errors.hpp"
#include "rieszwave/fft.hpp"
#include "rieszwave/numerics.hpp"
#include "rieszwave/rng.hpp"
#include "rieszwave/wave_kernel.hpp"

namespace rieszwave {

namespace {

using std::numbers::pi;

// \int_{[-1,1]^k} |theta|^{beta-k} d theta via the self-similar shell.
double box_singular_integral(int k, double beta) {
  const auto& gl = gauss_legendre(16);
  const double edges[4] = {-1.0, -0.5, 0.5, 1.0};
  int count = 1;
  for (int i = 0; i < k; ++i) count *= 3;
  double shell = 0;
  for (int cell = 0; cell < count; ++cell) {
    int c = cell;
    std::array<int, 3> idx{1, 1, 1};
    bool centre = true;
    for (int i = 0; i < k; ++i) {
      idx[i] = c % 3;
      c /= 3;
      if (idx[i] != 1) centre = false;
    }
    if (centre) continue;
    int nodes = 1;
    for (int i = 0; i < k; ++i) nodes *= 16;
    for (int q = 0; q < nodes; ++q) {
      int r = q;
      double w = 1.0, r2 = 0.0;
      for (int i = 0; i < k; ++i) {
        const int m = r % 16;
        r /= 16;
        const double a = edges[idx[i]], b = edges[idx[i] + 1];
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[m];
        w *= 0.5 * (b - a) * gl.weights[m];
        r2 += x * x;
      }
      shell += w * std::pow(r2, 0.5 * (beta - k));
    }
  }
  return shell / (1.0 - std::pow(2.0, -beta));
}

NoiseSpectrum spectrum_k1(const GridSpec& grid, double beta) {
  const int n = grid.n_space;
  const double h = grid.dx();
  ComplexArray c(n);
  const double scale = std::pow(h, 2.0 - beta);
  for (int j = 0; j < n; ++j) c[j] = scale * cell_pair_unit_1d(std::min(j, n - j), beta);
  fft_cube(c, n, 1, false);
  NoiseSpectrum s;
  s.lambda.resize(n);
  for (int p = 0; p < n; ++p) {
    const double v = c[p].real();
    if (v < 0) s.clipped += -v;
    s.lambda[p] = std::max(v, 0.0);
  }
  return s;
}

NoiseSpectrum spectrum_aliased(const GridSpec& grid, double beta) {
  const int k = grid.k, n = grid.n_space;
  const double h = grid.dx();
  const double ck = calibrate_ckbeta(beta, k);
  const int Q = k == 2 ? 8 : 4;
  const double pref = std::pow(2.0 * pi, k) * std::pow(h, 2.0 * k - beta) * ck;
  const std::size_t N = grid.points();
  NoiseSpectrum s;
  s.lambda.resize(static_cast<Eigen::Index>(N));
  const double dc_avg = std::pow(n / (2.0 * pi), k) * std::pow(pi / n, beta) * box_singular_integral(k, beta);
  const int span = 2 * Q + 1;
  int alias_count = 1;
  for (int i = 0; i < k; ++i) alias_count *= span;
  for (std::size_t off = 0; off < N; ++off) {
    std::array<double, 3> theta{};
    std::size_t rest = off;
    bool dc = true;
    for (int i = k - 1; i >= 0; --i) {
      const int p = static_cast<int>(rest % n);
      rest /= n;
      theta[i] = 2.0 * pi * signed_bin(p, n) / n;
      if (p != 0) dc = false;
    }
    double sum = 0;
    for (int a = 0; a < alias_count; ++a) {
      int r = a;
      bool zero_alias = true;
      double r2 = 0, sinc2 = 1;
      for (int i = 0; i < k; ++i) {
        const int q = r % span - Q;
        r /= span;
        if (q != 0) zero_alias = false;
        const double t = theta[i] + 2.0 * pi * q;
        r2 += t * t;
        if (t != 0.0) {
          const double sc = std::sin(0.5 * t) / (0.5 * t);
          sinc2 *= sc * sc;
        }
      }
      if (dc && zero_alias) {
        sum += dc_avg;
      } else {
        sum += std::pow(r2, 0.5 * (beta - k)) * sinc2;
      }
    }
    s.lambda[static_cast<Eigen::Index>(off)] = pref * sum;
  }
  return s;
}

double scaled_bessel_i0(double x) {
  if (x < 500.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  const double t = 1.0 / (8.0 * x);
  return (1.0 + t * (1.0 + 4.5 * t * (1.0 + 25.0 / 3.0 * t))) / std::sqrt(2.0 * pi * x);
}

// \int\int bump1(x) bump2(y) |x-y|^{-beta} dx dy.
double bump_pair(const TestFunction& f, const TestFunction& g, double beta, int k) {
  const double s2 = f.width * f.width + g.width * g.width;
  const double s = std::sqrt(s2);
  const double m = (f.center - g.center).norm();
  const double pref = f.amplitude * g.amplitude *
                      std::pow(2.0 * pi * f.width * f.width * g.width * g.width / s2, 0.5 * k);
  auto angular = [&](double rho) {
    const double em = std::exp(-(rho - m) * (rho - m) / (2.0 * s2));
    const double ep = std::exp(-(rho + m) * (rho + m) / (2.0 * s2));
    switch (k) {
      case 1: return em + ep;
      case 2: return 2.0 * pi * scaled_bessel_i0(rho * m / s2) * em;
      default: {
        const double x = rho * m / s2;
        if (x < 1e-8) return 4.0 * pi * std::exp(-(rho * rho + m * m) / (2.0 * s2));
        return 4.0 * pi * (em - ep) / (2.0 * x);
      }
    }
  };
  const double e = k - beta;
  auto integrand = [&](double v) { return angular(std::pow(v, 1.0 / e)) / e; };
  const double lo = std::max(0.0, m - 12.0 * s), hi = m + 12.0 * s;
  double total = 0;
  if (lo > 0) total += integrate_adaptive(integrand, 0.0, std::pow(lo, e), 1e-300, 1e-12).value;
  total += integrate_adaptive(integrand, std::pow(lo, e), std::pow(hi, e), 1e-300, 1e-12).value;
  return pref * total;
}

struct WeightedBox {
  std::array<double, 3> lo{}, hi{};
  double weight = 1.0;
};

std::vector<WeightedBox> as_boxes(const TestFunction& f) {
  const int k = f.dim();
  std::vector<WeightedBox> out;
  if (f.kind == TestFunction::Kind::IndicatorBox) {
    WeightedBox b;
    for (int i = 0; i < k; ++i) {
      b.lo[i] = f.lo(i);
      b.hi[i] = f.hi(i);
    }
    out.push_back(b);
    return out;
  }
  std::size_t total = 1;
  for (int n : f.shape) total *= n;
  for (std::size_t off = 0; off < total; ++off) {
    const double v = f.values[static_cast<Eigen::Index>(off)];
    if (v == 0.0) continue;
    WeightedBox b;
    b.weight = v;
    std::size_t rest = off;
    for (int i = k - 1; i >= 0; --i) {
      const int idx = static_cast<int>(rest % f.shape[i]);
      rest /= f.shape[i];
      b.lo[i] = f.origin(i) + idx * f.cell;
      b.hi[i] = b.lo[i] + f.cell;
    }
    out.push_back(b);
  }
  return out;
}

// Cell averages of a bump on cubic cells of side width/8 over +-7 widths.
TestFunction discretize_bump(const TestFunction& f) {
  const int k = f.dim();
  const double h = f.width / 8.0;
  const int n = 112;
  Eigen::VectorXd origin = f.center.array() - 0.5 * n * h;
  std::vector<int> shape(k, n);
  std::vector<double> axis(n);
  const double sw = std::sqrt(2.0) * f.width;
  std::vector<std::vector<double>> factors(k, std::vector<double>(n));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = origin(i) + j * h - f.center(i), b = a + h;
      factors[i][j] = std::sqrt(pi / 2.0) * f.width * (std::erf(b / sw) - std::erf(a / sw)) / h;
    }
  }
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= n;
  Eigen::ArrayXd values(static_cast<Eigen::Index>(total));
  for (std::size_t off = 0; off < total; ++off) {
    std::size_t rest = off;
    double v = f.amplitude;
    for (int i = k - 1; i >= 0; --i) {
      v *= factors[i][rest % n];
      rest /= n;
    }
    values[static_cast<Eigen::Index>(off)] = v;
  }
  return TestFunction::grid_function(origin, h, shape, values);
}

bool aligned_grids(const TestFunction& f, const TestFunction& g) {
  if (f.kind != TestFunction::Kind::GridFunction || g.kind != TestFunction::Kind::GridFunction) return false;
  if (std::abs(f.cell - g.cell) > 1e-12 * f.cell) return false;
  for (int i = 0; i < f.dim(); ++i) {
    const double shift = (g.origin(i) - f.origin(i)) / f.cell;
    if (std::abs(shift - std::round(shift)) > 1e-9) return false;
  }
  return true;
}

double grid_pair_aligned(const TestFunction& f, const TestFunction& g, double beta, int k) {
  const CellKernelTable table(k, beta, 1 << 20);
  std::array<int, 3> shift{0, 0, 0};
  for (int i = 0; i < k; ++i) shift[i] = static_cast<int>(std::lround((g.origin(i) - f.origin(i)) / f.cell));
  auto index_of = [k](const TestFunction& t, std::size_t off) {
    std::array<int, 3> idx{0, 0, 0};
    for (int i = k - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(off % t.shape[i]);
      off /= t.shape[i];
    }
    return idx;
  };
  std::vector<std::pair<std::array<int, 3>, double>> fa, ga;
  for (Eigen::Index a = 0; a < f.values.size(); ++a) {
    if (f.values[a] != 0.0) fa.push_back({index_of(f, a), f.values[a]});
  }
  for (Eigen::Index b = 0; b < g.values.size(); ++b) {
    if (g.values[b] != 0.0) ga.push_back({index_of(g, b), g.values[b]});
  }
  std::vector<double> rows(fa.size());
  for (std::size_t a = 0; a < fa.size(); ++a) {
    double row = 0;
    for (const auto& [gi, gv] : ga) {
      std::array<int, 3> d{0, 0, 0};
      for (int i = 0; i < k; ++i) d[i] = gi[i] + shift[i] - fa[a].first[i];
      row += gv * table.unit_mean(std::span<const int>(d.data(), k));
    }
    rows[a] = fa[a].second * row;
  }
  return std::pow(f.cell, 2.0 * k - beta) * pairwise_sum(rows);
}

double spatial_pair(const TestFunction& f0, const TestFunction& g0, double beta, int k) {
  using Kind = TestFunction::Kind;
  if (f0.is_zero() || g0.is_zero()) return 0.0;
  if (f0.kind == Kind::GaussianBump && g0.kind == Kind::GaussianBump) return bump_pair(f0, g0, beta, k);
  const TestFunction f = f0.kind == Kind::GaussianBump ? discretize_bump(f0) : f0;
  const TestFunction g = g0.kind == Kind::GaussianBump ? discretize_bump(g0) : g0;
  if (aligned_grids(f, g)) return grid_pair_aligned(f, g, beta, k);
  const auto fb = as_boxes(f), gb = as_boxes(g);
  std::vector<double> rows(fb.size());
  for (std::size_t a = 0; a < fb.size(); ++a) {
    double row = 0;
    for (const auto& b : gb) {
      row += b.weight * box_pair_integral(std::span<const double>(fb[a].lo.data(), k),
                                          std::span<const double>(fb[a].hi.data(), k),
                                          std::span<const double>(b.lo.data(), k),
                                          std::span<const double>(b.hi.data(), k), beta);
    }
    rows[a] = fb[a].weight * row;
  }
  return pairwise_sum(rows);
}

void check_function(const TestFunction& f, int k) {
  if (f.dim() != k) throw DomainError("test function dimension does not match k");
}

}  // namespace

std::uint64_t NoiseGrid::slice_seed(int n, int j) const {
  return substream_seed(master_seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(j)});
}

std::shared_ptr<const NoiseSpectrum> noise_spectrum(const GridSpec& grid, double beta) {
  grid.validate();
  WaveParams{grid.k, beta}.validate();
  using Key = std::tuple<int, int, long long, long long>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const NoiseSpectrum>> cache;
  const Key key{grid.k, grid.n_space, std::llround(grid.L * 1e12), std::llround(beta * 1e12)};
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto spec = std::make_shared<const NoiseSpectrum>(grid.k == 1 ? spectrum_k1(grid, beta)
                                                                : spectrum_aliased(grid, beta));
  std::lock_guard lock(mutex);
  return cache.emplace(key, spec).first->second;
}

void spectral_draw(const GridSpec& grid, const Eigen::ArrayXd& mode_variance, std::uint64_t seed,
                   Eigen::Ref<Eigen::ArrayXd> out) {
  const auto N = static_cast<Eigen::Index>(grid.points());
  Rng rng(seed);
  std::normal_distribution<double> normal;
  ComplexArray a(N);
  for (Eigen::Index i = 0; i < N; ++i) a[i] = normal(rng);
  fft_cube(a, grid.n_space, grid.k, false);
  a *= mode_variance.sqrt().cast<std::complex<double>>();
  fft_cube(a, grid.n_space, grid.k, true);
  out = a.real();
}

NoiseGrid zero_noise(const GridSpec& grid, int d, double beta) {
  grid.validate();
  if (d < 1) throw DomainError("noise component count d must be >= 1");
  NoiseGrid g;
  g.grid = grid;
  g.d = d;
  g.beta = beta;
  g.increments = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(grid.points() * d * grid.n_time));
  return g;
}

NoiseGrid sample_noise(const GridSpec& grid, int d, double beta, std::uint64_t master_seed, unsigned workers) {
  WaveParams{grid.k, beta}.validate();
  NoiseGrid g = zero_noise(grid, d, beta);
  g.master_seed = master_seed;
  const auto spec = noise_spectrum(grid, beta);
  const Eigen::ArrayXd var = spec->lambda * grid.dt;
  parallel_for(static_cast<std::size_t>(grid.n_time) * d, workers, [&](std::size_t s) {
    const int n = static_cast<int>(s / d), j = static_cast<int>(s % d);
    spectral_draw(grid, var, g.slice_seed(n, j), g.slice(n, j));
  });
  return g;
}

int TestFunction::dim() const {
  switch (kind) {
    case Kind::IndicatorBox: return static_cast<int>(lo.size());
    case Kind::GaussianBump: return static_cast<int>(center.size());
    default: return static_cast<int>(shape.size());
  }
}

bool TestFunction::is_zero() const {
  switch (kind) {
    case Kind::IndicatorBox:
      for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(hi(i) > lo(i))) return true;
      }
      return false;
    case Kind::GaussianBump: return amplitude == 0.0;
    default: return values.size() == 0 || (values == 0.0).all();
  }
}

TestFunction TestFunction::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() != hi.size() || lo.size() < 1) throw DomainError("box corners must share a dimension");
  TestFunction f;
  f.kind = Kind::IndicatorBox;
  f.lo = std::move(lo);
  f.hi = std::move(hi);
  return f;
}

TestFunction TestFunction::bump(Eigen::VectorXd center, double width, double amplitude) {
  if (!(width > 0)) throw DomainError("bump width must be > 0");
  TestFunction f;
  f.kind = Kind::GaussianBump;
  f.center = std::move(center);
  f.width = width;
  f.amplitude = amplitude;
  return f;
}

TestFunction TestFunction::grid_function(Eigen::VectorXd origin, double cell, std::vector<int> shape,
                                         Eigen::ArrayXd values) {
  std::size_t total = 1;
  for (int n : shape) total *= static_cast<std::size_t>(n);
  if (!(cell > 0) || static_cast<std::size_t>(values.size()) != total ||
      static_cast<std::size_t>(origin.size()) != shape.size()) {
    throw DomainError("grid function: inconsistent origin/cell/shape/values");
  }
  TestFunction f;
  f.kind = Kind::GridFunction;
  f.origin = std::move(origin);
  f.cell = cell;
  f.shape = std::move(shape);
  f.values = std::move(values);
  return f;
}

TestFunction TestFunction::during(double t0, double t1) const {
  if (!(t1 >= t0) || t0 < 0) throw DomainError("time interval must satisfy 0 <= t0 <= t1");
  TestFunction f = *this;
  f.time_interval = std::make_pair(t0, t1);
  return f;
}

double covariance_functional(const TestFunction& phi, const TestFunction& psi, double beta, int k) {
  WaveParams{k, beta}.validate();
  check_function(phi, k);
  check_function(psi, k);
  if (phi.time_interval.has_value() != psi.time_interval.has_value()) {
    throw DomainError("covariance_functional: both or neither test function must carry a time factor");
  }
  double time = 1.0;
  if (phi.time_interval) {
    time = std::max(0.0, std::min(phi.time_interval->second, psi.time_interval->second) -
                             std::max(phi.time_interval->first, psi.time_interval->first));
  }
  if (time == 0.0) return 0.0;
  return time * spatial_pair(phi, psi, beta, k);
}

double h_norm_realspace(const TestFunction& phi, double beta, int k) {
  WaveParams{k, beta}.validate();
  check_function(phi, k);
  return spatial_pair(phi, phi, beta, k);
}

double h_norm_fourier(const TestFunction& phi, double beta, int k) {
  WaveParams{k, beta}.validate();
  check_function(phi, k);
  if (phi.is_zero()) return 0.0;
  if (phi.kind == TestFunction::Kind::GaussianBump) {
    // |F phi|^2 = a^2 (2 pi w^2)^k exp(-w^2 rho^2); rho = s / w, s = v^{1/beta}.
    const double w = phi.width;
    auto integrand = [beta](double v) { return std::exp(-std::pow(v, 2.0 / beta)) / beta; };
    const double radial = integrate_adaptive(integrand, 0.0, std::pow(7.0, beta), 1e-300, 1e-13).value;
    return phi.amplitude * phi.amplitude * std::pow(2.0 * pi * w * w, k) * sphere_area(k) *
           std::pow(w, -beta) * radial;
  }
  if (phi.kind == TestFunction::Kind::IndicatorBox && k == 1) {
    const double a = 0.5 * (phi.hi(0) - phi.lo(0));
    return 4.0 * std::pow(a, 2.0 - beta) * riesz_constant(WaveParams{1, beta}).value;
  }
  throw UnsupportedError("h_norm_fourier: supported for gaussian bumps and k = 1 boxes");
}

CalibrationReport calibration_battery(double beta, int k) {
  WaveParams{k, beta}.validate();
  CalibrationReport rep;
  for (double w : {0.3, 0.5, 0.8, 1.2, 2.0}) {
    const auto f = TestFunction::bump(Eigen::VectorXd::Zero(k), w);
    rep.ratios.push_back(h_norm_realspace(f, beta, k) / h_norm_fourier(f, beta, k));
  }
  const Eigen::Map<const Eigen::ArrayXd> r(rep.ratios.data(), static_cast<Eigen::Index>(rep.ratios.size()));
  rep.value = r.mean();
  const double var = (r - rep.value).square().sum() / double(r.size() - 1);
  rep.coefficient_of_variation = std::sqrt(var) / rep.value;
  return rep;
}

double calibrate_ckbeta(double beta, int k) {
  if (auto c = cached_ckbeta(k, beta)) return *c;
  const auto rep = calibration_battery(beta, k);
  if (!(rep.coefficient_of_variation < 1e-3)) {
    throw CalibrationError("calibrate_ckbeta: battery coefficient of variation above 1e-3");
  }
  return store_ckbeta(k, beta, rep.value);
}

double apply_to_slice(const NoiseGrid& noise, int n, int j, const TestFunction& box) {
  if (box.kind != TestFunction::Kind::IndicatorBox) throw UnsupportedError("apply_to_slice: box test functions only");
  const GridSpec& g = noise.grid;
  if (box.dim() != g.k) throw DomainError("apply_to_slice: dimension mismatch");
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < g.k; ++i) {
    const double a = (box.lo(i) + g.L) / g.dx(), b = (box.hi(i) + g.L) / g.dx();
    if (std::abs(a - std::round(a)) > 1e-9 || std::abs(b - std::round(b)) > 1e-9) {
      throw DomainError("apply_to_slice: box edges must lie on cell boundaries");
    }
    lo[i] = static_cast<int>(std::lround(a));
    hi[i] = static_cast<int>(std::lround(b));
    if (lo[i] < 0 || hi[i] > g.n_space) throw DomainError("apply_to_slice: box leaves the grid");
  }
  const auto s = noise.slice(n, j);
  double total = 0;
  for (std::size_t off = 0; off < g.points(); ++off) {
    const auto idx = g.unflat(off);
    bool inside = true;
    for (int i = 0; i < g.k; ++i) inside = inside && idx[i] >= lo[i] && idx[i] < hi[i];
    if (inside) total += s[static_cast<Eigen::Index>(off)];
  }
  return total;
}

}  // namespace rieszwave
