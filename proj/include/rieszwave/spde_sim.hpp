#ifndef RIESZWAVE_SPDE_SIM_HPP
#define RIESZWAVE_SPDE_SIM_HPP

// Sample paths of the mild solution u(t,x) = \int_0^t \int G(t-r, x-z) sigma(u) M(dr,dz)
// + \int_0^t \int G(t-r, x-z) b(u) dr dz on a periodic grid.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rieszwave/coefficients.hpp"
#include "rieszwave/grid.hpp"
#include "rieszwave/noise_field.hpp"
#include "rieszwave/wave_kernel.hpp"

namespace rieszwave {

enum class NoiseHypothesis { C1, C1Prime };

struct ModelSpec {
  WaveParams params;
  int d = 1;
  Coefficients coeffs;
  NoiseHypothesis noise = NoiseHypothesis::C1;

  void validate() const;
  /// Stable 64-bit digest of (k, beta, d, coefficient description, hypothesis).
  std::uint64_t hash() const;
};

ModelSpec additive_model(int k, double beta, int d = 1);

struct SolutionField {
  GridSpec grid;
  int d = 1;
  double beta = 0;
  /// Flat (time, space, component) layout; time index 0..n_time.
  Eigen::ArrayXd values;
  std::uint64_t master_seed = 0;
  std::uint64_t model_hash = 0;
  /// True when every grid point's domain of dependence fits in a half period,
  /// so the periodic field has the law of the whole-space field pointwise.
  bool contained = false;

  using SliceMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  std::size_t index(int n, std::size_t x, int i) const {
    return (static_cast<std::size_t>(n) * grid.points() + x) * d + i;
  }
  double at(int n, std::size_t x, int i) const { return values[static_cast<Eigen::Index>(index(n, x, i))]; }
  /// points x d matrix of the values at time index n.
  SliceMap slice(int n) const {
    return SliceMap(values.data() + index(n, 0, 0), static_cast<Eigen::Index>(grid.points()), d);
  }
};

struct SimOptions {
  /// Allow a nonzero drift in the additive synthesis (operator splitting).
  bool enable_drift = false;
};

/// Additive noise: per Fourier mode, u_{n+1} = S u_n - u_{n-1} + K1 (F_n + F_{n-1})
/// with F_n = sigma dM_n + b(u_n) dt h^k. For k = 1 with dt = dx the multipliers are
/// those of the exact cell/step averages of G = 1/2 1_{|x|<t}.
SolutionField simulate_additive(const ModelSpec& model, const GridSpec& grid, std::uint64_t master_seed,
                                const SimOptions& options = {});
SolutionField simulate_additive_driven(const ModelSpec& model, const NoiseGrid& noise,
                                       const SimOptions& options = {});

/// k = 1, dt = dx: explicit light-cone window sums with sigma(u), b(u) frozen at
/// the left end of each step. O(n_time^2 n_space).
SolutionField simulate_nonlinear_k1(const ModelSpec& model, const GridSpec& grid, std::uint64_t master_seed);
SolutionField simulate_nonlinear_k1_driven(const ModelSpec& model, const NoiseGrid& noise);

/// Picks the additive synthesis or the k = 1 stepper from the model.
SolutionField simulate(const ModelSpec& model, const GridSpec& grid, std::uint64_t master_seed,
                       const SimOptions& options = {});

/// Per-mode variance of a single slice u(t_n, .) of the additive b = 0 field
/// driven by one noise component.
Eigen::ArrayXd additive_slice_variance(const WaveParams& params, const GridSpec& grid, int time_index);

/// Draws u(t_n, .) alone (points x d), same law as the slice of simulate_additive.
Eigen::MatrixXd sample_additive_slice(const ModelSpec& model, const GridSpec& grid, int time_index,
                                      std::uint64_t seed);

/// Seed of path p of an ensemble.
std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path);

struct SpaceTimePoint {
  int n = 0;
  std::vector<int> x;
};

struct MomentEstimate {
  double mean = 0;
  double stderr_ = 0;
};

/// E|u(t,x) - u(s,y)|^q (Euclidean norm over components) over the ensemble.
std::vector<MomentEstimate> increment_moments(std::span<const SolutionField> ensemble, int q,
                                              const std::vector<std::pair<SpaceTimePoint, SpaceTimePoint>>& pairs);

struct MomentRow {
  double separation = 0;  // |t-s| + |x-y|
  double moment = 0;
  double stderr_ = 0;
};
using MomentTable = std::vector<MomentRow>;

struct SpatialMomentDesign {
  int time_index = 0;
  std::vector<int> lags;  // in cells
  int q = 2;
};

/// Moments of spatial increments at one time, pooled over all positions and
/// axes within each path, then averaged across paths (stderr across paths).
MomentTable spatial_moment_table(const ModelSpec& model, const GridSpec& grid, const SpatialMomentDesign& design,
                                 std::size_t n_paths, std::uint64_t master_seed, unsigned workers = 1);

struct HolderFit {
  double delta_hat = 0;
  double stderr_ = 0;
  std::vector<std::size_t> excluded;
  std::size_t used = 0;
};

/// Least-squares slope of log moment against log separation, divided by q;
/// parametric bootstrap standard error.
HolderFit fit_holder_exponent(const MomentTable& table, int q, int resamples = 200,
                              std::uint64_t seed = 0x401de5);

}  // namespace rieszwave

#endif  // RIESZWAVE_SPDE_SIM_HPP
