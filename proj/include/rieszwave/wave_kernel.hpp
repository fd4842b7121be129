#ifndef RIESZWAVE_WAVE_KERNEL_HPP
#define RIESZWAVE_WAVE_KERNEL_HPP

// Fundamental solution of the wave operator in k = 1, 2, 3 space dimensions,
// its Fourier symbol, and the H-norm identities built on the Riesz spectral
// measure |xi|^{beta-k} d xi.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rieszwave/errors.hpp"

namespace rieszwave {

struct WaveParams {
  int k = 1;
  double beta = 0.5;

  /// Throws DomainError unless k in {1,2,3} and 0 < beta < min(2, k).
  void validate() const;
  bool operator==(const WaveParams&) const = default;
};

/// Surface area of the unit sphere in R^k (2, 2 pi, 4 pi).
double sphere_area(int k);

/// sin(t |xi|) / |xi|.
template <typename Scalar>
Scalar fourier_symbol(Scalar t, Scalar xi_norm) {
  if (!(xi_norm > Scalar(0))) throw DomainError("fourier_symbol: xi_norm must be > 0");
  if (t < Scalar(0)) throw DomainError("fourier_symbol: t must be >= 0");
  if (t == Scalar(0)) return Scalar(0);
  using std::sin;
  return sin(t * xi_norm) / xi_norm;
}

struct RieszConstant {
  double value = 0;
  WaveParams params;
  double quadrature_error = 0;
};

/// c = \int_{R^k} sin^2|w| |w|^{beta-k-2} dw. Cached per (k, beta).
RieszConstant riesz_constant(const WaveParams& params);

/// ||G(r, x - .)||_H^2 = c r^{2-beta}.
double kernel_h_norm_sq(double r, const WaveParams& params);

/// \int_0^eps ||G(s + r, .)||_H^2 dr = c ((s+eps)^{3-beta} - s^{3-beta}) / (3-beta).
double time_integrated_norm(double s, double eps, const WaveParams& params);

/// Direct radial quadrature of \int |F G(r)(xi)|^2 |xi|^{beta-k} d xi, summing the
/// oscillatory integrand over half periods and adding the asymptotic tail.
double spectral_h_norm_sq(double r, const WaveParams& params, int half_periods = 4000);

/// phi(z, lambda) = \int_0^1 dr \int_{-r}^{r} du \int_{-lambda-r}^{lambda+r} dv |z+u-v|^{-beta}
/// for k = 1, 0 < beta < 1.
double phi_k1(double z, double lambda, double beta);

/// eps^{3-beta} phi((x-y)/eps, h/eps) with 0 <= h <= eps.
double cross_inner_product_k1(double eps, double h, double offset, double beta);

/// Fourier form of phi for any k, using the calibrated c_{k,beta}. Provided as a
/// convenience for k = 2, 3; unverified beyond its agreement with phi_k1 at k = 1.
double phi_fourier(double z_norm, double lambda, const WaveParams& params);

/// Normalization of the spectral measure of |x|^{-beta}: mu(d xi) = c_{k,beta} |xi|^{beta-k} d xi.
/// Stored by calibrate_ckbeta; concurrent reads, serialized writes.
std::optional<double> cached_ckbeta(int k, double beta);
/// Stores a calibration unless one exists; returns the value held by the cache.
double store_ckbeta(int k, double beta, double value);
/// Removes all cached calibrations (tests only).
void clear_ckbeta_cache();

/// c_{k,beta} |xi|^{beta-k}; StateError if (k, beta) was never calibrated.
double spectral_density(double xi_norm, const WaveParams& params);

struct OracleRow {
  std::string op;
  std::string params;
  double value = 0;
  double error_estimate = 0;
};

/// A fixed set of oracle values for the given parameters.
std::vector<OracleRow> oracle_table(const WaveParams& params);
void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows);

}  // namespace rieszwave

#endif  // RIESZWAVE_WAVE_KERNEL_HPP
