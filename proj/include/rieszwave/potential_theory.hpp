#ifndef RIESZWAVE_POTENTIAL_THEORY_HPP
#define RIESZWAVE_POTENTIAL_THEORY_HPP

// Bessel-Riesz kernels K_gamma, energies, capacities and dyadic Hausdorff
// content of target sets in R^d.

#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace rieszwave {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Ball {
  Eigen::VectorXd center;
  double radius = 0;
};

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct PointSet {
  std::vector<Eigen::VectorXd> points;
};

using Primitive = std::variant<Ball, Box, PointSet>;

/// Finite union of balls, boxes and point sets.
class TargetSet {
 public:
  TargetSet() = default;
  TargetSet(int dim, std::vector<Primitive> primitives);

  static TargetSet empty(int dim);
  static TargetSet ball(Eigen::VectorXd center, double radius);
  static TargetSet box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static TargetSet points(std::vector<Eigen::VectorXd> pts);

  /// {"dim": d, "primitives": [{"type": "ball", "center": [...], "radius": r},
  ///  {"type": "box", "min": [...], "max": [...]}, {"type": "points", "points": [[...], ...]}]}
  /// or {"dim": d, "empty": true}.
  static TargetSet from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  int dim() const { return dim_; }
  bool is_empty() const { return primitives_.empty(); }
  const std::vector<Primitive>& primitives() const { return primitives_; }

  /// Euclidean distance from x to the set (+inf for the empty set).
  double distance(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const { return distance(x) <= tol; }
  /// Smallest axis-aligned box holding the set. Empty set: lo > hi.
  Box bounding_box() const;
  double diameter() const;
  /// Half-width N of the smallest origin-centred cube [-N, N]^d holding the set.
  double enclosing_half_width() const;

  /// Bounding box of (set ∩ [lo, hi)), or nullopt when they do not meet.
  std::optional<Box> clip(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const;

 private:
  int dim_ = 1;
  std::vector<Primitive> primitives_;
};

struct DiscreteMeasure {
  Eigen::MatrixXd support;  // n x d
  Eigen::VectorXd weights;

  /// Throws DomainError unless weights are >= 0 and sum to 1 within 1e-12, and
  /// (when a set is given) every support point lies in it within 1e-9.
  void validate(const TargetSet* set = nullptr) const;
};

struct KernelOrder {
  double gamma = 0;
  /// c in K_0(r) = log(c / r); nullopt picks 2 x diameter of the working set.
  std::optional<double> log_constant_c;
};

/// r^{-gamma} (gamma > 0), log(c/r) (gamma = 0), 1 (gamma < 0).
double bessel_riesz_kernel(double r, const KernelOrder& order);

/// Sum_ij w_i w_j K(|x_i - x_j|); kInfinity when a positive weight sits on a
/// coincident pair and gamma >= 0.
double energy(const DiscreteMeasure& mu, const KernelOrder& order);

struct CapacityResult {
  double estimate = 0;
  double energy = kInfinity;
  double gap = 0;  // final 2 (E - min_i (Qw)_i)
  int iterations = 0;
  std::size_t n_cells = 0;
  double cell_side = 0;
  /// gamma at or above the dimension of the set: the discrete energy grows
  /// without bound under refinement.
  bool diverged = false;
  DiscreteMeasure optimizer;
};

/// Minimal energy over measures carried by ~n_grid lattice cells covering the
/// set; cell pairs use the exact mean of the kernel near the diagonal and the
/// midpoint value beyond. Projected gradient on the simplex, stopped when the
/// duality gap falls below tol * energy. Atoms get weight 0 when gamma >= 0.
CapacityResult capacity(const TargetSet& set, const KernelOrder& order, int n_grid = 400, double tol = 1e-6,
                        int max_iterations = 200000);

struct HausdorffResult {
  double estimate = 0;
  int depth = 0;  // depth attaining the minimum
  bool still_decreasing = false;
  bool budget_exhausted = false;
  std::vector<double> per_depth;
};

/// Min over dyadic depths h <= max_depth of sum over cells Q of side 2^{-h}
/// meeting the set of diam(bbox(set ∩ Q))^gamma (0^0 = 1). kInfinity for gamma < 0.
HausdorffResult hausdorff_measure(const TargetSet& set, double gamma, int max_depth = 16,
                                  std::size_t cell_budget = std::size_t{1} << 22);

nlohmann::json to_json(const CapacityResult& r);
nlohmann::json to_json(const HausdorffResult& r);

}  // namespace rieszwave

#endif  // RIESZWAVE_POTENTIAL_THEORY_HPP
