#include "rieszwave/coefficients.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "rieszwave/errors.hpp"
#include "rieszwave/rng.hpp"

namespace rieszwave {

struct Expression::Node {
  enum class Op { Const, Var, Add, Sub, Mul, Neg, Sin, Cos, Tanh } op = Op::Const;
  double value = 0;
  int index = 0;
  std::shared_ptr<const Node> a, b;

  double eval(const Eigen::VectorXd& x) const {
    switch (op) {
      case Op::Const: return value;
      case Op::Var: return x(index);
      case Op::Add: return a->eval(x) + b->eval(x);
      case Op::Sub: return a->eval(x) - b->eval(x);
      case Op::Mul: return a->eval(x) * b->eval(x);
      case Op::Neg: return -a->eval(x);
      case Op::Sin: return std::sin(a->eval(x));
      case Op::Cos: return std::cos(a->eval(x));
      case Op::Tanh: return std::tanh(a->eval(x));
    }
    return 0;
  }
  bool constant() const {
    if (op == Op::Var) return false;
    return (!a || a->constant()) && (!b || b->constant());
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

class Parser {
 public:
  Parser(const std::string& s, int d) : s_(s), d_(d) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "expression \"" << s_ << "\": " << what << " at position " << pos_;
    throw ConfigError(msg.str());
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
  NodePtr expr() {
    auto left = term();
    for (;;) {
      skip();
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        const char c = s_[pos_++];
        left = make(c == '+' ? Op::Add : Op::Sub, left, term());
      } else {
        return left;
      }
    }
  }
  NodePtr term() {
    auto left = factor();
    for (;;) {
      skip();
      if (pos_ < s_.size() && s_[pos_] == '*') {
        ++pos_;
        left = make(Op::Mul, left, factor());
      } else {
        return left;
      }
    }
  }
  NodePtr factor() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '-') {
      ++pos_;
      return make(Op::Neg, factor());
    }
    if (c == '(') {
      ++pos_;
      auto n = expr();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Const;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") {
        start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("coordinate needs an index, e.g. x1");
        const int idx = std::stoi(s_.substr(start, pos_ - start));
        if (idx < 1 || idx > d_) fail("coordinate index out of range 1..d");
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Var;
        n->index = idx - 1;
        return n;
      }
      Op op;
      if (name == "sin") {
        op = Op::Sin;
      } else if (name == "cos") {
        op = Op::Cos;
      } else if (name == "tanh") {
        op = Op::Tanh;
      } else {
        fail("unknown function '" + name + "'");
      }
      skip();
      if (pos_ >= s_.size() || s_[pos_] != '(') fail("expected '(' after function name");
      ++pos_;
      auto arg = expr();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return make(op, arg);
    }
    fail("unexpected character");
  }

  const std::string& s_;
  int d_;
  std::size_t pos_ = 0;
};

Coefficients diagonal(int d, double (*f)(double), const std::string& name) {
  Coefficients c;
  c.d = d;
  c.sigma = [d, f](const Eigen::VectorXd& x) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) s(i, i) = 2.0 + f(x(i));
    return s;
  };
  c.b = [d](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); };
  c.additive = false;
  c.zero_drift = true;
  c.lipschitz = 1.0;
  c.rho0 = 1.0;
  c.description = name;
  return c;
}

double sin_fn(double x) { return std::sin(x); }
double tanh_fn(double x) { return std::tanh(x); }

}  // namespace

Expression Expression::parse(const std::string& text, int d) {
  Expression e;
  e.root_ = Parser(text, d).parse();
  e.text_ = text;
  return e;
}

double Expression::operator()(const Eigen::VectorXd& x) const { return root_ ? root_->eval(x) : 0.0; }

bool Expression::is_constant() const { return !root_ || root_->constant(); }

Coefficients Coefficients::constant(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) throw DomainError("sigma must be square");
  Coefficients c;
  c.d = static_cast<int>(sigma.rows());
  c.sigma = [sigma](const Eigen::VectorXd&) { return sigma; };
  const int d = c.d;
  c.b = [d](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); };
  c.additive = true;
  c.zero_drift = true;
  c.lipschitz = 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma);
  c.rho0 = svd.singularValues().minCoeff();
  std::ostringstream desc;
  desc.precision(17);
  desc << "constant[";
  for (Eigen::Index i = 0; i < sigma.size(); ++i) desc << (i ? "," : "") << sigma.data()[i];
  desc << "]";
  c.description = desc.str();
  return c;
}

Coefficients Coefficients::with_drift(DriftFn drift, double drift_lipschitz, std::string drift_description) const {
  Coefficients c = *this;
  c.b = std::move(drift);
  c.zero_drift = false;
  c.lipschitz = std::max(lipschitz, drift_lipschitz);
  c.description += ";b=" + drift_description;
  return c;
}

std::vector<std::string> coefficient_preset_names() { return {"identity-additive", "diag-trig", "tanh-bounded"}; }

Coefficients coefficient_preset(const std::string& name, int d) {
  if (d < 1) throw ConfigError("model.d must be >= 1");
  if (name == "identity-additive") {
    auto c = Coefficients::constant(Eigen::MatrixXd::Identity(d, d));
    c.description = "identity-additive";
    return c;
  }
  if (name == "diag-trig") return diagonal(d, sin_fn, "diag-trig");
  if (name == "tanh-bounded") return diagonal(d, tanh_fn, "tanh-bounded");
  throw ConfigError("unknown coefficient preset '" + name + "'");
}

Coefficients coefficients_from_expressions(const std::vector<std::vector<std::string>>& sigma,
                                           const std::vector<std::string>& b, double lipschitz,
                                           double rho0) {
  const int d = static_cast<int>(sigma.size());
  if (d < 1) throw ConfigError("inline sigma must have at least one row");
  if (static_cast<int>(b.size()) != d) throw ConfigError("inline b must have d entries");
  if (!(lipschitz > 0)) throw ConfigError("inline lipschitz must be > 0");
  if (!(rho0 > 0)) throw ConfigError("inline rho0 must be > 0");
  std::vector<Expression> s, drift;
  std::ostringstream desc;
  desc << "inline;sigma=";
  bool constant = true;
  for (const auto& row : sigma) {
    if (static_cast<int>(row.size()) != d) throw ConfigError("inline sigma must be square");
    for (const auto& e : row) {
      s.push_back(Expression::parse(e, d));
      constant = constant && s.back().is_constant();
      desc << e << '|';
    }
  }
  bool zero_drift = true;
  desc << ";b=";
  for (const auto& e : b) {
    drift.push_back(Expression::parse(e, d));
    zero_drift = zero_drift && drift.back().is_constant() && drift.back()(Eigen::VectorXd::Zero(d)) == 0.0;
    desc << e << '|';
  }
  Coefficients c;
  c.d = d;
  c.sigma = [s, d](const Eigen::VectorXd& x) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m(i, j) = s[i * d + j](x);
    }
    return m;
  };
  c.b = [drift, d](const Eigen::VectorXd& x) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = drift[i](x);
    return v;
  };
  c.additive = constant;
  c.zero_drift = zero_drift;
  c.lipschitz = lipschitz;
  c.rho0 = rho0;
  c.description = desc.str();
  return c;
}

HypothesisReport check_hypotheses(const Coefficients& coeffs, int probe_budget, std::uint64_t seed) {
  if (probe_budget < 100) throw DomainError("check_hypotheses: probe_budget must be >= 100");
  const int d = coeffs.d;
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto ball_point = [&]() {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
    const double r = 10.0 * std::pow(unif(rng), 1.0 / d);
    return Eigen::VectorXd(v.normalized() * r);
  };
  HypothesisReport rep;
  rep.min_ellipticity = std::numeric_limits<double>::infinity();
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  rep.constant_sigma = true;
  const Eigen::MatrixXd s0 = coeffs.sigma(Eigen::VectorXd::Zero(d));
  for (int p = 0; p < probe_budget; ++p) {
    const Eigen::VectorXd x = ball_point();
    const Eigen::MatrixXd s = coeffs.sigma(x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
    rep.min_ellipticity = std::min(rep.min_ellipticity, svd.singularValues().minCoeff());
    rep.sigma_sup = std::max(rep.sigma_sup, svd.singularValues().maxCoeff());
    rep.min_abs_det = std::min(rep.min_abs_det, std::abs(s.determinant()));
    if ((s - s0).cwiseAbs().maxCoeff() != 0.0) rep.constant_sigma = false;
    // Lipschitz quotients on a nearby and a distant partner.
    for (double scale : {1e-3, 1.0}) {
      Eigen::VectorXd dir(d);
      for (int i = 0; i < d; ++i) dir(i) = normal(rng);
      const Eigen::VectorXd y = x + scale * dir.normalized();
      const double dist = (x - y).norm();
      rep.lipschitz_sigma = std::max(rep.lipschitz_sigma, (coeffs.sigma(y) - s).norm() / dist);
      rep.lipschitz_b = std::max(rep.lipschitz_b, (coeffs.b(y) - coeffs.b(x)).norm() / dist);
    }
  }
  const double slack = 1e-6;
  if (rep.min_ellipticity < coeffs.rho0 * (1.0 - 1e-12)) {
    rep.violations.push_back("(P2) ellipticity below declared rho0");
  }
  if (rep.lipschitz_sigma > coeffs.lipschitz * (1.0 + slack)) {
    rep.violations.push_back("(P1) sigma Lipschitz quotient above declared bound");
  }
  if (rep.lipschitz_b > coeffs.lipschitz * (1.0 + slack)) {
    rep.violations.push_back("(P1) b Lipschitz quotient above declared bound");
  }
  if (!std::isfinite(rep.sigma_sup)) rep.violations.push_back("(P1) sigma not bounded on probes");
  if (coeffs.additive && (!rep.constant_sigma || rep.min_abs_det == 0.0)) {
    rep.violations.push_back("additive flag requires constant sigma with nonzero determinant");
  }
  return rep;
}

}  // namespace rieszwave
