#include "rieszwave/wave_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>

#include "rieszwave/numerics.hpp"

namespace rieszwave {

namespace {

using std::numbers::pi;

using CacheKey = std::pair<int, long long>;

CacheKey make_key(int k, double beta) { return {k, std::llround(beta * 1e12)}; }

std::shared_mutex ckbeta_mutex;
std::map<CacheKey, double>& ckbeta_cache() {
  static std::map<CacheKey, double> cache;
  return cache;
}

std::mutex riesz_mutex;
std::map<CacheKey, RieszConstant>& riesz_cache() {
  static std::map<CacheKey, RieszConstant> cache;
  return cache;
}

RieszConstant compute_riesz_constant(const WaveParams& p) {
  const double beta = p.beta;
  // Near part, w = v^{1/beta}: \int_0^1 sin^2 w w^{beta-3} dw = (1/beta) \int_0^1 (sin w / w)^2 dv.
  auto near_integrand = [beta](double v) {
    if (v <= 0) return 1.0 / beta;
    const double w = std::pow(v, 1.0 / beta);
    const double s = std::sin(w) / w;
    return s * s / beta;
  };
  const auto near = integrate_adaptive(near_integrand, 0.0, 1.0, 1e-15, 1e-14);

  // Tail: sin^2 = (1 - cos 2w)/2; the constant part is closed form, the cosine
  // part is an alternating series over the half periods of cos(2w).
  const double flat = 0.5 / (2.0 - beta);
  const auto& gl = gauss_legendre(24);
  auto cos_part = [beta](double w) { return std::cos(2.0 * w) * std::pow(w, beta - 3.0); };
  double a = 1.0;
  double b = 0.75 * pi;
  double head = gl.integrate(cos_part, a, b);
  WynnEpsilon wynn;
  double partial = 0;
  int quiet = 0;
  double last_term = 0;
  for (int m = 0; m < 400; ++m) {
    a = b;
    b = a + 0.5 * pi;
    last_term = gl.integrate(cos_part, a, b);
    partial += last_term;
    wynn.push(partial);
    if (m > 6 && wynn.change() < 1e-16 * (1.0 + std::abs(wynn.estimate()))) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  const double cos_integral = head + wynn.estimate();
  const double tail = flat - 0.5 * cos_integral;
  const double omega = sphere_area(p.k);
  RieszConstant out;
  out.params = p;
  out.value = omega * (near.value + tail);
  out.quadrature_error = omega * (near.error + 0.5 * wynn.change() + 1e-15 * std::abs(cos_integral));
  if (!(out.quadrature_error < 1e-6 * out.value)) {
    throw ConvergenceError("riesz_constant: tolerance not reached", out.value);
  }
  return out;
}

}  // namespace

void WaveParams::validate() const {
  if (k < 1 || k > 3) throw DomainError("k must be 1, 2 or 3");
  const double upper = std::min(2.0, static_cast<double>(k));
  if (!(beta > 0.0 && beta < upper)) {
    std::ostringstream msg;
    msg << "beta = " << beta << " violates (C1): need 0 < beta < min(2, k) = " << upper;
    throw DomainError(msg.str());
  }
}

double sphere_area(int k) {
  switch (k) {
    case 1: return 2.0;
    case 2: return 2.0 * pi;
    case 3: return 4.0 * pi;
    default: throw DomainError("sphere_area: k must be 1, 2 or 3");
  }
}

RieszConstant riesz_constant(const WaveParams& params) {
  params.validate();
  const auto key = make_key(params.k, params.beta);
  {
    std::lock_guard lock(riesz_mutex);
    auto it = riesz_cache().find(key);
    if (it != riesz_cache().end()) return it->second;
  }
  RieszConstant c = compute_riesz_constant(params);
  std::lock_guard lock(riesz_mutex);
  return riesz_cache().emplace(key, c).first->second;
}

double kernel_h_norm_sq(double r, const WaveParams& params) {
  if (!(r > 0)) throw DomainError("kernel_h_norm_sq: r must be > 0");
  return riesz_constant(params).value * std::pow(r, 2.0 - params.beta);
}

double time_integrated_norm(double s, double eps, const WaveParams& params) {
  if (!(eps > 0)) throw DomainError("time_integrated_norm: eps must be > 0");
  if (s < 0) throw DomainError("time_integrated_norm: s must be >= 0");
  const double e = 3.0 - params.beta;
  const double c = riesz_constant(params).value;
  return c * (std::pow(s + eps, e) - std::pow(s, e)) / e;
}

double spectral_h_norm_sq(double r, const WaveParams& params, int half_periods) {
  params.validate();
  if (!(r > 0)) throw DomainError("spectral_h_norm_sq: r must be > 0");
  const double beta = params.beta;
  const double period = pi / r;
  // First half period carries the rho^{beta-1} endpoint behaviour.
  const GaussJacobi01 jac(24, beta - 1.0);
  double first = 0;
  for (std::size_t i = 0; i < jac.nodes.size(); ++i) {
    const double rho = period * jac.nodes[i];
    const double g = fourier_symbol(r, rho);
    first += jac.weights[i] * g * g;
  }
  first *= std::pow(period, beta);
  const auto& gl = gauss_legendre(20);
  auto integrand = [&](double rho) {
    const double g = fourier_symbol(r, rho);
    return g * g * std::pow(rho, beta - 1.0);
  };
  std::vector<double> pieces(half_periods);
  for (int m = 1; m <= half_periods; ++m) {
    pieces[m - 1] = gl.integrate(integrand, m * period, (m + 1) * period);
  }
  const double R = (half_periods + 1) * period;
  const double tail = 0.5 * std::pow(R, beta - 2.0) / (2.0 - beta);
  return sphere_area(params.k) * (first + pairwise_sum(pieces) + tail);
}

double phi_k1(double z, double lambda, double beta) {
  if (!(beta > 0 && beta < 1)) throw DomainError("phi_k1: need 0 < beta < 1 for k = 1");
  if (lambda < 0) throw DomainError("phi_k1: lambda must be >= 0");
  const double norm = (1.0 - beta) * (2.0 - beta);
  auto B = [&](double y) { return std::pow(std::abs(y), 2.0 - beta) / norm; };
  const double fixed = B(z + lambda) + B(z - lambda);
  auto inner = [&](double r) { return B(z + 2.0 * r + lambda) - fixed + B(z - 2.0 * r - lambda); };
  // Split the r-range where an argument of B crosses zero.
  std::vector<double> cuts = {0.0, 1.0};
  for (double c : {(-z - lambda) / 2.0, (z - lambda) / 2.0}) {
    if (c > 0.0 && c < 1.0) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0) continue;
    total += integrate_adaptive(inner, cuts[i], cuts[i + 1], 1e-15, 1e-13).value;
  }
  return total;
}

double cross_inner_product_k1(double eps, double h, double offset, double beta) {
  if (!(eps > 0)) throw DomainError("cross_inner_product_k1: eps must be > 0");
  if (h < 0 || h > eps) throw DomainError("cross_inner_product_k1: need 0 <= h <= eps");
  return std::pow(eps, 3.0 - beta) * phi_k1(offset / eps, h / eps, beta);
}

double phi_fourier(double z_norm, double lambda, const WaveParams& params) {
  params.validate();
  const double ck = spectral_density(1.0, params);
  const double beta = params.beta;
  const double z = std::abs(z_norm);
  auto angular = [&](double x) {
    switch (params.k) {
      case 1: return 2.0 * std::cos(x);
      case 2: return 2.0 * pi * std::cyl_bessel_j(0.0, x);
      default: return x == 0.0 ? 4.0 * pi : 4.0 * pi * std::sin(x) / x;
    }
  };
  // T(rho) = \int_0^1 sin(r rho) sin((r+lambda) rho) dr.
  auto T = [&](double rho) {
    if (rho < 1e-3) {
      const auto& gl = gauss_legendre(12);
      return gl.integrate([&](double r) { return std::sin(r * rho) * std::sin((r + lambda) * rho); }, 0.0, 1.0);
    }
    return 0.5 * (std::cos(lambda * rho) -
                  (std::sin((2.0 + lambda) * rho) - std::sin(lambda * rho)) / (2.0 * rho));
  };
  auto f = [&](double rho) { return T(rho) / (rho * rho) * angular(rho * z); };
  const double freq = 2.0 + lambda + z;
  const double step = pi / freq;
  const GaussJacobi01 jac(24, beta - 1.0);
  double first = 0;
  for (std::size_t i = 0; i < jac.nodes.size(); ++i) first += jac.weights[i] * f(step * jac.nodes[i]);
  first *= std::pow(step, beta);
  const double R = std::max(4000.0, 200.0 * freq);
  const int chunks = static_cast<int>(std::ceil(R / step));
  const auto& gl = gauss_legendre(16);
  std::vector<double> pieces(chunks);
  for (int m = 1; m <= chunks; ++m) {
    pieces[m - 1] = gl.integrate([&](double rho) { return f(rho) * std::pow(rho, beta - 1.0); },
                                 m * step, (m + 1) * step);
  }
  double tail = 0;
  const double end = (chunks + 1) * step;
  if (lambda == 0.0 && z == 0.0) tail = 0.5 * angular(0.0) * std::pow(end, beta - 2.0) / (2.0 - beta);
  return 4.0 * ck * (first + pairwise_sum(pieces) + tail);
}

std::optional<double> cached_ckbeta(int k, double beta) {
  std::shared_lock lock(ckbeta_mutex);
  auto it = ckbeta_cache().find(make_key(k, beta));
  if (it == ckbeta_cache().end()) return std::nullopt;
  return it->second;
}

double store_ckbeta(int k, double beta, double value) {
  std::unique_lock lock(ckbeta_mutex);
  return ckbeta_cache().emplace(make_key(k, beta), value).first->second;
}

void clear_ckbeta_cache() {
  std::unique_lock lock(ckbeta_mutex);
  ckbeta_cache().clear();
}

double spectral_density(double xi_norm, const WaveParams& params) {
  params.validate();
  if (!(xi_norm > 0)) throw DomainError("spectral_density: xi_norm must be > 0");
  const auto c = cached_ckbeta(params.k, params.beta);
  if (!c) throw StateError("spectral_density: c_{k,beta} has not been calibrated");
  return *c * std::pow(xi_norm, params.beta - params.k);
}

std::vector<OracleRow> oracle_table(const WaveParams& params) {
  params.validate();
  std::vector<OracleRow> rows;
  std::ostringstream base;
  base << "k=" << params.k << ";beta=" << params.beta;
  const auto c = riesz_constant(params);
  rows.push_back({"riesz_constant", base.str(), c.value, c.quadrature_error});
  for (double r : {0.25, 0.5, 1.0, 2.0}) {
    std::ostringstream p;
    p << base.str() << ";r=" << r;
    rows.push_back({"kernel_h_norm_sq", p.str(), kernel_h_norm_sq(r, params),
                    c.quadrature_error * std::pow(r, 2.0 - params.beta)});
    const double s = spectral_h_norm_sq(r, params);
    rows.push_back({"spectral_h_norm_sq", p.str(), s, std::abs(s - kernel_h_norm_sq(r, params))});
  }
  rows.push_back({"time_integrated_norm", base.str() + ";s=0;eps=1",
                  time_integrated_norm(0.0, 1.0, params), c.quadrature_error / (3.0 - params.beta)});
  rows.push_back({"fourier_symbol", "t=0.5;xi=2", fourier_symbol(0.5, 2.0), 0.0});
  if (params.k == 1) {
    for (double z : {0.0, 1.0, 4.0, 32.0}) {
      std::ostringstream p;
      p << base.str() << ";z=" << z << ";lambda=0.5";
      rows.push_back({"phi_k1", p.str(), phi_k1(z, 0.5, params.beta), 0.0});
    }
  }
  return rows;
}

void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows) {
  out << "op,params,value,error_estimate\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.op << ',' << r.params << ',' << r.value << ',' << r.error_estimate << '\n';
  }
}

}  // namespace rieszwave
