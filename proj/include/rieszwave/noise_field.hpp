#ifndef RIESZWAVE_NOISE_FIELD_HPP
#define RIESZWAVE_NOISE_FIELD_HPP

// Gaussian noise white in time with spatial covariance |x-y|^{-beta}, sampled
// as cell increments M([t_n, t_{n+1}) x cell) on a periodic grid.

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rieszwave/grid.hpp"

namespace rieszwave {

struct NoiseGrid {
  GridSpec grid;
  int d = 1;
  double beta = 0.5;
  std::uint64_t master_seed = 0;
  /// Flat (time, component, row-major space) layout.
  Eigen::ArrayXd increments;

  std::size_t slice_offset(int n, int j) const {
    return (static_cast<std::size_t>(n) * d + j) * grid.points();
  }
  Eigen::Map<const Eigen::ArrayXd> slice(int n, int j) const {
    return {increments.data() + slice_offset(n, j), static_cast<Eigen::Index>(grid.points())};
  }
  Eigen::Map<Eigen::ArrayXd> slice(int n, int j) {
    return {increments.data() + slice_offset(n, j), static_cast<Eigen::Index>(grid.points())};
  }
  /// Substream seed of slice (n, j).
  std::uint64_t slice_seed(int n, int j) const;
};

/// Per-mode variances (per unit time) of one noise slice: the DFT eigenvalues
/// of the cell-increment covariance on the periodic grid.
struct NoiseSpectrum {
  Eigen::ArrayXd lambda;
  /// Total negative mass removed when clipping eigenvalues at 0.
  double clipped = 0;
};

/// Cached per (grid geometry, beta).
std::shared_ptr<const NoiseSpectrum> noise_spectrum(const GridSpec& grid, double beta);

NoiseGrid sample_noise(const GridSpec& grid, int d, double beta, std::uint64_t master_seed,
                       unsigned workers = 1);

/// All increments zero (same header fields as sample_noise).
NoiseGrid zero_noise(const GridSpec& grid, int d, double beta);

/// Draws one slice with the given per-mode variances into `out`:
/// out = IDFT(sqrt(var) * DFT(white)).
void spectral_draw(const GridSpec& grid, const Eigen::ArrayXd& mode_variance, std::uint64_t seed,
                   Eigen::Ref<Eigen::ArrayXd> out);

struct TestFunction {
  enum class Kind { IndicatorBox, GaussianBump, GridFunction };

  Kind kind = Kind::IndicatorBox;
  // Indicator box [lo, hi].
  Eigen::VectorXd lo, hi;
  // amplitude * exp(-|x - center|^2 / (2 width^2)).
  Eigen::VectorXd center;
  double width = 1.0;
  double amplitude = 1.0;
  // Piecewise constant on cubic cells of side `cell` from `origin`, row-major.
  Eigen::VectorXd origin;
  double cell = 0.0;
  std::vector<int> shape;
  Eigen::ArrayXd values;
  // Optional product-form time factor 1_{[t0, t1)}(s).
  std::optional<std::pair<double, double>> time_interval;

  int dim() const;
  bool is_zero() const;

  static TestFunction box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static TestFunction bump(Eigen::VectorXd center, double width, double amplitude = 1.0);
  static TestFunction grid_function(Eigen::VectorXd origin, double cell, std::vector<int> shape,
                                    Eigen::ArrayXd values);
  TestFunction during(double t0, double t1) const;
};

/// \int ds \int\int phi(s,x) psi(s,y) |x-y|^{-beta} dx dy. Spatial-only test
/// functions skip the time integral; if both carry time factors their overlap
/// length multiplies the spatial part.
double covariance_functional(const TestFunction& phi, const TestFunction& psi, double beta, int k);

/// \int\int phi(x) phi(y) |x-y|^{-beta} dx dy.
double h_norm_realspace(const TestFunction& phi, double beta, int k);

/// \int |F phi(xi)|^2 |xi|^{beta-k} d xi with F phi(xi) = \int e^{-i xi.x} phi(x) dx.
/// Supported for gaussian bumps (any k) and boxes at k = 1.
double h_norm_fourier(const TestFunction& phi, double beta, int k);

/// Ratio realspace / fourier averaged over a fixed battery of 5 bumps; stored
/// in the shared cache on first use. CalibrationError if the battery's
/// coefficient of variation reaches 1e-3.
double calibrate_ckbeta(double beta, int k);

struct CalibrationReport {
  double value = 0;
  double coefficient_of_variation = 0;
  std::vector<double> ratios;
};
/// Runs the battery without touching the cache.
CalibrationReport calibration_battery(double beta, int k);

/// Sum of a noise slice over the cells of a box test function (cells must align
/// with the grid): the increment M(1_box) over one time step.
double apply_to_slice(const NoiseGrid& noise, int n, int j, const TestFunction& box);

}  // namespace rieszwave

#endif  // RIESZWAVE_NOISE_FIELD_HPP
