#ifndef RIESZWAVE_HIT_ANALYSIS_HPP
#define RIESZWAVE_HIT_ANALYSIS_HPP

// Hitting probabilities P{u(I x K) ∩ A != ∅} by Monte Carlo, the exponents of
// the capacity / Hausdorff bounds and the polarity of points.

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rieszwave/grid.hpp"
#include "rieszwave/potential_theory.hpp"
#include "rieszwave/spde_sim.hpp"

namespace rieszwave {

struct SpaceTimeWindow {
  double t_min = 0;
  double t_max = 0;
  Eigen::VectorXd lo;  // space region [lo, hi] in R^k
  Eigen::VectorXd hi;

  void validate() const;
};

enum class Polarity { Polar, NonPolar, Open };
std::string to_string(Polarity p);

/// Polar if d > 2(k+1)/(2-beta); NonPolar if d(1 + 4d/(2-beta)) < 2(k+1)/(2-beta).
Polarity polarity_classify(int d, int k, double beta);

/// d - 2(k+1)/(2-beta).
double gaussian_order(int d, int k, double beta);

enum class BoundCase { AdditiveC1, AdditiveC1Prime, MultK1, MultK2, MultK3 };
std::string to_string(BoundCase c);
BoundCase parse_bound_case(const std::string& s);

/// Parameters of the noise hypotheses; only those the case needs are read.
struct HypothesisParams {
  double beta = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
};

/// Regularity exponent delta of the case.
double case_delta(int k, BoundCase c, const HypothesisParams& p);

/// d - zeta - (k+1)/delta.
double upper_bound_order(int d, int k, BoundCase c, const HypothesisParams& p, double zeta);

enum class CapacityVariant { SpaceTime, FixedX, FixedT };
std::string to_string(CapacityVariant v);

/// d(1 + 4d(rho-(2-beta))/(2-beta)) + delta - E with E = 2(k+1)/(2-beta),
/// 2/(2-beta) or 2k/(2-beta). Without rho, rho = 3 - beta + delta is taken in the
/// reduced form d(1 + 4d/(2-beta)) + delta - E.
double lower_bound_capacity_order(int d, int k, double beta, double delta, std::optional<double> rho,
                                  CapacityVariant variant);

struct ExponentReport {
  int d = 1;
  int k = 1;
  double beta = 0;
  double zeta = 0;
  double delta = 0;
  BoundCase bound_case = BoundCase::AdditiveC1;
  double upper_hausdorff_order = 0;
  std::array<double, 3> lower_capacity_orders{};  // spacetime, fixed_x, fixed_t
  double gaussian_order = 0;
  Polarity polarity = Polarity::Open;

  nlohmann::json to_json() const;
};

ExponentReport exponent_report(int d, int k, double beta, double zeta, double delta,
                               BoundCase bound_case = BoundCase::AdditiveC1, HypothesisParams params = {});

/// Wilson score interval at 95%.
std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n);

struct HitOptions {
  /// Snap distance; default: RMS one-cell plus RMS one-step increment of the
  /// simulated paths inside the window.
  std::optional<double> eps_snap;
  unsigned workers = 1;
};

struct HitEstimate {
  double p_hat = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::size_t hits = 0;
  std::size_t n_paths = 0;
  double eps_snap = 0;
};

/// All targets see the same paths. The window plus its light cone must fit in
/// one period of the grid.
std::vector<HitEstimate> mc_hitting_probabilities(const ModelSpec& model, const SpaceTimeWindow& window,
                                                  const std::vector<TargetSet>& targets, const GridSpec& grid,
                                                  std::size_t n_paths, std::uint64_t master_seed,
                                                  const HitOptions& options = {});

HitEstimate mc_hitting_probability(const ModelSpec& model, const SpaceTimeWindow& window, const TargetSet& target,
                                   const GridSpec& grid, std::size_t n_paths, std::uint64_t master_seed,
                                   const HitOptions& options = {});

struct SandwichRow {
  std::string target_id;
  HitEstimate hit;
  double capacity_order = 0;
  double capacity = 0;
  double hausdorff_order = 0;
  double hausdorff = 0;
  Polarity polarity = Polarity::Open;
};

struct SandwichOptions {
  HitOptions hit;
  int n_grid = 400;
  int hausdorff_depth = 16;
  double zeta = 0.01;   // non-Gaussian models only
  double delta = 0.01;  // non-Gaussian models only
};

struct SandwichReport {
  std::vector<SandwichRow> rows;
  /// Along the family order, rows whose capacity (or Hausdorff content at a
  /// positive order) vanishes have p_hat non-increasing up to the previous
  /// row's upper confidence limit.
  bool ordering_ok = true;
};

SandwichReport sandwich_report(const ModelSpec& model, const SpaceTimeWindow& window,
                               const std::vector<TargetSet>& targets, const GridSpec& grid, std::size_t n_paths,
                               std::uint64_t master_seed, const SandwichOptions& options = {});

/// target_id,p_hat,ci_low,ci_high,capacity_order,capacity,hausdorff_order,hausdorff,polarity
std::string sandwich_csv(const SandwichReport& report);

}  // namespace rieszwave

#endif  // RIESZWAVE_HIT_ANALYSIS_HPP
