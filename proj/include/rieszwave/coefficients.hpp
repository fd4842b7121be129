#ifndef RIESZWAVE_COEFFICIENTS_HPP
#define RIESZWAVE_COEFFICIENTS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rieszwave {

using SigmaFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using DriftFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Diffusion matrix sigma(x) and drift b(x) of a d-component system, with the
/// bounds they are declared to satisfy.
struct Coefficients {
  int d = 1;
  SigmaFn sigma;
  DriftFn b;
  bool additive = false;
  bool zero_drift = true;
  double lipschitz = 1.0;
  double rho0 = 1.0;
  /// Canonical text used for hashing and reporting.
  std::string description;

  /// Constant sigma, zero drift.
  static Coefficients constant(const Eigen::MatrixXd& sigma);
  /// Same sigma with a drift attached.
  Coefficients with_drift(DriftFn drift, double drift_lipschitz, std::string drift_description) const;
};

/// Built-in coefficient sets: "identity-additive", "diag-trig", "tanh-bounded".
Coefficients coefficient_preset(const std::string& name, int d);
std::vector<std::string> coefficient_preset_names();

/// Scalar expression over x1..xd: numbers, + - *, parentheses, sin, cos, tanh.
class Expression {
 public:
  Expression() = default;
  /// Throws ConfigError with the offending position on bad input.
  static Expression parse(const std::string& text, int d);
  double operator()(const Eigen::VectorXd& x) const;
  /// True when the expression does not reference any coordinate.
  bool is_constant() const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

/// Coefficients built from expression trees: sigma is d x d, b has d entries.
Coefficients coefficients_from_expressions(const std::vector<std::vector<std::string>>& sigma,
                                           const std::vector<std::string>& b, double lipschitz,
                                           double rho0);

struct HypothesisReport {
  double min_ellipticity = 0;   // min over probes of the smallest singular value of sigma(x)
  double lipschitz_sigma = 0;   // max ||sigma(x)-sigma(y)|| / |x-y| over probe pairs
  double lipschitz_b = 0;
  double sigma_sup = 0;         // max operator norm of sigma over probes
  bool constant_sigma = false;
  double min_abs_det = 0;
  std::vector<std::string> violations;
  bool passed() const { return violations.empty(); }
};

/// Probes sigma and b at probe_budget points of the ball of radius 10.
HypothesisReport check_hypotheses(const Coefficients& coeffs, int probe_budget,
                                  std::uint64_t seed = 0x5eed);

}  // namespace rieszwave

#endif  // RIESZWAVE_COEFFICIENTS_HPP
