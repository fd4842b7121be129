#include "rieszwave/potential_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rieszwave/cell_kernel.hpp"
#include "rieszwave/errors.hpp"
#include "rieszwave/fft.hpp"

namespace rieszwave {

namespace {

void check_dim(const Eigen::VectorXd& v, int dim, const char* what) {
  if (v.size() != dim) throw DomainError(std::string(what) + ": dimension differs from the set's dim");
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) throw ConfigError(std::string("target set: '") + field + "' must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string("target set: '") + field + "' must hold numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

nlohmann::json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double box_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return (x - x.cwiseMax(lo).cwiseMin(hi)).norm();
}

bool is_atom(const Primitive& p) {
  if (const auto* b = std::get_if<Ball>(&p)) return b->radius == 0.0;
  if (const auto* b = std::get_if<Box>(&p)) return (b->hi - b->lo).maxCoeff() == 0.0;
  return true;
}

void grow(Box& acc, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  acc.lo = acc.lo.cwiseMin(lo);
  acc.hi = acc.hi.cwiseMax(hi);
}

Box empty_box(int dim) {
  return {Eigen::VectorXd::Constant(dim, kInfinity), Eigen::VectorXd::Constant(dim, -kInfinity)};
}

}  // namespace

TargetSet::TargetSet(int dim, std::vector<Primitive> primitives) : dim_(dim), primitives_(std::move(primitives)) {
  if (dim < 1) throw DomainError("target set: dim must be >= 1");
  for (const auto& p : primitives_) {
    if (const auto* b = std::get_if<Ball>(&p)) {
      check_dim(b->center, dim, "ball center");
      if (!(b->radius >= 0)) throw DomainError("ball radius must be >= 0");
    } else if (const auto* b = std::get_if<Box>(&p)) {
      check_dim(b->lo, dim, "box min");
      check_dim(b->hi, dim, "box max");
      if ((b->hi.array() < b->lo.array()).any()) throw DomainError("box min must not exceed max");
    } else {
      const auto& ps = std::get<PointSet>(p);
      if (ps.points.empty()) throw DomainError("point list must not be empty");
      for (const auto& x : ps.points) check_dim(x, dim, "point");
    }
  }
}

TargetSet TargetSet::empty(int dim) { return TargetSet(dim, {}); }

TargetSet TargetSet::ball(Eigen::VectorXd center, double radius) {
  const int d = static_cast<int>(center.size());
  return TargetSet(d, {Ball{std::move(center), radius}});
}

TargetSet TargetSet::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  const int d = static_cast<int>(lo.size());
  return TargetSet(d, {Box{std::move(lo), std::move(hi)}});
}

TargetSet TargetSet::points(std::vector<Eigen::VectorXd> pts) {
  if (pts.empty()) throw DomainError("point list must not be empty");
  const int d = static_cast<int>(pts.front().size());
  return TargetSet(d, {PointSet{std::move(pts)}});
}

TargetSet TargetSet::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("target set: expected an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "dim" && key != "primitives" && key != "empty") throw ConfigError("target set: unknown key '" + key + "'");
  }
  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) throw ConfigError("target set: 'dim' must be an integer");
  const int dim = doc["dim"].get<int>();
  if (dim < 1) throw ConfigError("target set: 'dim' must be >= 1");
  const bool empty_marker = doc.value("empty", false);
  if (!doc.contains("primitives")) {
    if (empty_marker) return TargetSet::empty(dim);
    throw ConfigError("target set: 'primitives' is required unless \"empty\": true");
  }
  const auto& list = doc["primitives"];
  if (!list.is_array()) throw ConfigError("target set: 'primitives' must be an array");
  if (list.empty() && !empty_marker) throw ConfigError("target set: empty primitive list needs \"empty\": true");
  if (!list.empty() && empty_marker) throw ConfigError("target set: \"empty\": true with primitives");
  std::vector<Primitive> prims;
  for (const auto& p : list) {
    const std::string type = p.value("type", "");
    auto allow = [&](std::initializer_list<const char*> keys) {
      for (const auto& [key, _] : p.items()) {
        if (key == "type") continue;
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
          throw ConfigError("target set: unknown key '" + key + "' in " + type);
        }
      }
    };
    try {
      if (type == "ball") {
        allow({"center", "radius"});
        prims.push_back(Ball{vec_from_json(p.at("center"), "center"), p.at("radius").get<double>()});
      } else if (type == "box") {
        allow({"min", "max"});
        prims.push_back(Box{vec_from_json(p.at("min"), "min"), vec_from_json(p.at("max"), "max")});
      } else if (type == "points") {
        allow({"points"});
        PointSet ps;
        for (const auto& x : p.at("points")) ps.points.push_back(vec_from_json(x, "points"));
        prims.push_back(std::move(ps));
      } else {
        throw ConfigError("target set: primitive type must be ball, box or points");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("target set: ") + e.what());
    }
  }
  try {
    return TargetSet(dim, std::move(prims));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("target set: ") + e.what());
  }
}

nlohmann::json TargetSet::to_json() const {
  nlohmann::json doc{{"dim", dim_}};
  if (is_empty()) {
    doc["empty"] = true;
    return doc;
  }
  auto list = nlohmann::json::array();
  for (const auto& p : primitives_) {
    if (const auto* b = std::get_if<Ball>(&p)) {
      list.push_back({{"type", "ball"}, {"center", vec_to_json(b->center)}, {"radius", b->radius}});
    } else if (const auto* b = std::get_if<Box>(&p)) {
      list.push_back({{"type", "box"}, {"min", vec_to_json(b->lo)}, {"max", vec_to_json(b->hi)}});
    } else {
      auto pts = nlohmann::json::array();
      for (const auto& x : std::get<PointSet>(p).points) pts.push_back(vec_to_json(x));
      list.push_back({{"type", "points"}, {"points", pts}});
    }
  }
  doc["primitives"] = list;
  return doc;
}

double TargetSet::distance(const Eigen::VectorXd& x) const {
  check_dim(x, dim_, "query point");
  double best = kInfinity;
  for (const auto& p : primitives_) {
    if (const auto* b = std::get_if<Ball>(&p)) {
      best = std::min(best, std::max(0.0, (x - b->center).norm() - b->radius));
    } else if (const auto* b = std::get_if<Box>(&p)) {
      best = std::min(best, box_distance(x, b->lo, b->hi));
    } else {
      for (const auto& q : std::get<PointSet>(p).points) best = std::min(best, (x - q).norm());
    }
  }
  return best;
}

Box TargetSet::bounding_box() const {
  Box acc = empty_box(dim_);
  for (const auto& p : primitives_) {
    if (const auto* b = std::get_if<Ball>(&p)) {
      grow(acc, b->center.array() - b->radius, b->center.array() + b->radius);
    } else if (const auto* b = std::get_if<Box>(&p)) {
      grow(acc, b->lo, b->hi);
    } else {
      for (const auto& q : std::get<PointSet>(p).points) grow(acc, q, q);
    }
  }
  return acc;
}

double TargetSet::diameter() const {
  if (is_empty()) return 0;
  const Box b = bounding_box();
  return (b.hi - b.lo).norm();
}

double TargetSet::enclosing_half_width() const {
  if (is_empty()) return 0;
  const Box b = bounding_box();
  return std::max(b.lo.cwiseAbs().maxCoeff(), b.hi.cwiseAbs().maxCoeff());
}

std::optional<Box> TargetSet::clip(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
  Box acc = empty_box(dim_);
  bool hit = false;
  for (const auto& p : primitives_) {
    if (const auto* b = std::get_if<Box>(&p)) {
      const Eigen::VectorXd a = b->lo.cwiseMax(lo), z = b->hi.cwiseMin(hi);
      if ((a.array() <= b->hi.array()).all() && (a.array() < hi.array()).all()) {
        grow(acc, a, z);
        hit = true;
      }
    } else if (const auto* b = std::get_if<Ball>(&p)) {
      // Extent along axis a of ball ∩ cell: (t - c_a)^2 + dist^2 over the other axes <= r^2.
      Eigen::VectorXd off = (b->center - b->center.cwiseMax(lo).cwiseMin(hi)).cwiseAbs2();
      const double total = off.sum();
      if (total > b->radius * b->radius) continue;
      Eigen::VectorXd a(dim_), z(dim_);
      bool ok = true;
      for (int i = 0; i < dim_ && ok; ++i) {
        const double rho = std::sqrt(std::max(0.0, b->radius * b->radius - (total - off[i])));
        a[i] = std::max(b->center[i] - rho, lo[i]);
        z[i] = std::min(b->center[i] + rho, hi[i]);
        ok = a[i] <= z[i] && a[i] < hi[i];
      }
      if (ok) {
        grow(acc, a, z);
        hit = true;
      }
    } else {
      for (const auto& q : std::get<PointSet>(p).points) {
        if ((q.array() >= lo.array()).all() && (q.array() < hi.array()).all()) {
          grow(acc, q, q);
          hit = true;
        }
      }
    }
  }
  if (!hit) return std::nullopt;
  return acc;
}

void DiscreteMeasure::validate(const TargetSet* set) const {
  if (support.rows() != weights.size()) throw DomainError("measure: support and weights differ in length");
  if (weights.size() == 0) throw DomainError("measure: empty support");
  if ((weights.array() < 0).any()) throw DomainError("measure: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw DomainError("measure: weights must sum to 1");
  if (set) {
    if (support.cols() != set->dim()) throw DomainError("measure: support dimension differs from the set");
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
      if (!set->contains(support.row(i).transpose(), 1e-9)) throw DomainError("measure: support point outside the set");
    }
  }
}

double bessel_riesz_kernel(double r, const KernelOrder& order) {
  if (!(r > 0)) throw DomainError("bessel_riesz_kernel: r must be > 0");
  if (order.gamma > 0) return std::pow(r, -order.gamma);
  if (order.gamma < 0) return 1.0;
  if (!order.log_constant_c || !(*order.log_constant_c > 0)) {
    throw DomainError("bessel_riesz_kernel: gamma = 0 needs a positive constant c");
  }
  return std::log(*order.log_constant_c / r);
}

double energy(const DiscreteMeasure& mu, const KernelOrder& order) {
  mu.validate();
  if (order.gamma < 0) return 1.0;
  KernelOrder ord = order;
  if (order.gamma == 0 && !ord.log_constant_c) {
    double diam = 0;
    for (Eigen::Index i = 0; i < mu.support.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < mu.support.rows(); ++j) {
        diam = std::max(diam, (mu.support.row(i) - mu.support.row(j)).norm());
      }
    }
    ord.log_constant_c = diam > 0 ? 2.0 * diam : 1.0;
  }
  double e = 0;
  for (Eigen::Index i = 0; i < mu.support.rows(); ++i) {
    if (mu.weights[i] == 0) continue;
    for (Eigen::Index j = 0; j < mu.support.rows(); ++j) {
      if (mu.weights[j] == 0) continue;
      const double r = (mu.support.row(i) - mu.support.row(j)).norm();
      if (r == 0) return kInfinity;
      e += mu.weights[i] * mu.weights[j] * bessel_riesz_kernel(r, ord);
    }
  }
  return e;
}

namespace {

// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0, theta = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / double(j + 1);
    if (u[j] - t > 0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

// Cells of a uniform lattice whose centres lie in the continuous part of the set,
// restricted to the axes along which that part has extent.
struct Lattice {
  std::vector<int> axes;
  Eigen::VectorXd fixed;  // full-dimensional coordinates of the inactive axes
  Eigen::VectorXd origin;
  double h = 0;
  std::vector<int> shape;
  std::vector<std::vector<int>> cells;
};

struct ContinuousPart {
  std::vector<Primitive> prims;
  Box box;
};

std::vector<std::vector<int>> lattice_cells(const TargetSet& part, const Lattice& lat) {
  std::vector<std::vector<int>> out;
  const int k = static_cast<int>(lat.axes.size());
  std::size_t total = 1;
  for (int m : lat.shape) total *= static_cast<std::size_t>(m);
  std::vector<int> idx(k, 0);
  Eigen::VectorXd x = lat.fixed;
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rest = c;
    for (int a = k - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % lat.shape[a]);
      rest /= lat.shape[a];
      x[lat.axes[a]] = lat.origin[a] + (idx[a] + 0.5) * lat.h;
    }
    if (part.distance(x) <= 1e-12 * (1.0 + lat.h)) out.push_back(idx);
  }
  return out;
}

Lattice build_lattice(const TargetSet& part, int n_grid) {
  const Box bb = part.bounding_box();
  const int d = part.dim();
  Lattice lat;
  lat.fixed = 0.5 * (bb.lo + bb.hi);
  for (int i = 0; i < d; ++i) {
    if (bb.hi[i] > bb.lo[i]) lat.axes.push_back(i);
  }
  const int k = static_cast<int>(lat.axes.size());
  if (k > 3) throw UnsupportedError("capacity: continuous parts of dimension above 3 are not supported");
  for (const auto& p : part.primitives()) {
    const Box pb = TargetSet(d, {p}).bounding_box();
    for (int i = 0; i < d; ++i) {
      if (bb.hi[i] == bb.lo[i]) continue;
      if (pb.hi[i] == pb.lo[i] && k > 1) {
        throw UnsupportedError("capacity: a flat piece inside a higher-dimensional set is not supported");
      }
    }
  }
  lat.origin.resize(k);
  Eigen::VectorXd ext(k);
  for (int a = 0; a < k; ++a) {
    lat.origin[a] = bb.lo[lat.axes[a]];
    ext[a] = bb.hi[lat.axes[a]] - bb.lo[lat.axes[a]];
  }
  const double longest = ext.maxCoeff();
  auto trial = [&](long long m) {
    Lattice t = lat;
    t.h = longest / double(m);
    t.shape.resize(k);
    for (int a = 0; a < k; ++a) t.shape[a] = std::max(1, static_cast<int>(std::ceil(ext[a] / t.h - 1e-9)));
    t.cells = lattice_cells(part, t);
    return t;
  };
  long long lo_m = 1, hi_m = 0;
  Lattice best = trial(1);
  for (long long m = 2; m <= (1LL << 20); m *= 2) {
    Lattice t = trial(m);
    if (static_cast<long long>(t.cells.size()) > n_grid) {
      hi_m = m;
      break;
    }
    best = std::move(t);
    lo_m = m;
  }
  while (hi_m > lo_m + 1) {
    const long long mid = (lo_m + hi_m) / 2;
    Lattice t = trial(mid);
    if (static_cast<long long>(t.cells.size()) > n_grid) {
      hi_m = mid;
    } else {
      best = std::move(t);
      lo_m = mid;
    }
  }
  if (best.cells.empty()) throw ConvergenceError("capacity: no lattice cell centre falls inside the set", 0.0);
  return best;
}

// Q w for the cell-averaged kernel, as a zero-padded lattice convolution.
class ToeplitzOperator {
 public:
  ToeplitzOperator(const Lattice& lat, double gamma, double log_c) {
    const int k = static_cast<int>(lat.axes.size());
    padded_.resize(k);
    std::size_t total = 1;
    for (int a = 0; a < k; ++a) {
      padded_[a] = 2 * lat.shape[a];
      total *= static_cast<std::size_t>(padded_[a]);
    }
    const bool log_kernel = gamma == 0.0;
    CellKernelTable table(k, gamma, 4, log_kernel);
    kernel_ = ComplexArray::Zero(static_cast<Eigen::Index>(total));
    std::vector<int> off(k);
    for (std::size_t c = 0; c < total; ++c) {
      std::size_t rest = c;
      for (int a = k - 1; a >= 0; --a) {
        const int o = static_cast<int>(rest % padded_[a]);
        rest /= padded_[a];
        off[a] = o < lat.shape[a] ? o : o - padded_[a];
      }
      const double unit = table.unit_mean(off);
      kernel_[static_cast<Eigen::Index>(c)] =
          log_kernel ? std::log(log_c) - std::log(lat.h) - unit : std::pow(lat.h, -gamma) * unit;
    }
    fft_nd(kernel_, padded_, false);
    offsets_.reserve(lat.cells.size());
    for (const auto& cell : lat.cells) {
      std::size_t flat = 0;
      for (int a = 0; a < k; ++a) flat = flat * padded_[a] + cell[a];
      offsets_.push_back(static_cast<Eigen::Index>(flat));
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& w) const {
    ComplexArray buf = ComplexArray::Zero(kernel_.size());
    for (std::size_t i = 0; i < offsets_.size(); ++i) buf[offsets_[i]] = w[static_cast<Eigen::Index>(i)];
    fft_nd(buf, padded_, false);
    buf *= kernel_;
    fft_nd(buf, padded_, true);
    Eigen::VectorXd out(w.size());
    for (std::size_t i = 0; i < offsets_.size(); ++i) out[static_cast<Eigen::Index>(i)] = buf[offsets_[i]].real();
    return out;
  }

 private:
  std::vector<int> padded_;
  ComplexArray kernel_;
  std::vector<Eigen::Index> offsets_;
};

DiscreteMeasure uniform_on(const std::vector<Eigen::VectorXd>& pts, int dim) {
  DiscreteMeasure mu;
  mu.support.resize(static_cast<Eigen::Index>(pts.size()), dim);
  for (std::size_t i = 0; i < pts.size(); ++i) mu.support.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  mu.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(pts.size()), 1.0 / double(pts.size()));
  return mu;
}

Eigen::VectorXd cell_centre(const Lattice& lat, const std::vector<int>& cell) {
  Eigen::VectorXd x = lat.fixed;
  for (std::size_t a = 0; a < lat.axes.size(); ++a) x[lat.axes[a]] = lat.origin[a] + (cell[a] + 0.5) * lat.h;
  return x;
}

}  // namespace

CapacityResult capacity(const TargetSet& set, const KernelOrder& order, int n_grid, double tol, int max_iterations) {
  if (n_grid < 50 || n_grid > 100000) throw DomainError("capacity: n_grid must be in [50, 1e5]");
  if (!(tol > 0)) throw DomainError("capacity: tol must be > 0");
  CapacityResult res;
  if (set.is_empty()) return res;

  std::vector<Primitive> cont;
  std::vector<Eigen::VectorXd> atoms;
  for (const auto& p : set.primitives()) {
    if (!is_atom(p)) {
      cont.push_back(p);
    } else if (const auto* b = std::get_if<Ball>(&p)) {
      atoms.push_back(b->center);
    } else if (const auto* b = std::get_if<Box>(&p)) {
      atoms.push_back(b->lo);
    } else {
      for (const auto& q : std::get<PointSet>(p).points) atoms.push_back(q);
    }
  }
  const int d = set.dim();
  if (cont.empty()) {
    res.optimizer = uniform_on(atoms, d);
    if (order.gamma < 0) {
      res.estimate = res.energy = 1.0;
    }
    return res;
  }

  const TargetSet part(d, cont);
  const Lattice lat = build_lattice(part, n_grid);
  const int k = static_cast<int>(lat.axes.size());
  res.n_cells = lat.cells.size();
  res.cell_side = lat.h;
  std::vector<Eigen::VectorXd> centres;
  for (const auto& c : lat.cells) centres.push_back(cell_centre(lat, c));
  res.optimizer = uniform_on(centres, d);

  if (order.gamma < 0) {
    res.estimate = res.energy = 1.0;
    return res;
  }
  if (order.gamma >= k) {
    res.diverged = true;
    return res;
  }
  double log_c = 0;
  if (order.gamma == 0) {
    const double diam = set.diameter();
    log_c = order.log_constant_c.value_or(2.0 * diam);
    if (!(log_c > diam)) throw DomainError("capacity: log kernel constant c must exceed the set diameter");
  }

  const ToeplitzOperator Q(lat, order.gamma, log_c);
  const auto n = static_cast<Eigen::Index>(lat.cells.size());
  const double l_max = Q.apply(Eigen::VectorXd::Ones(n)).maxCoeff();
  const double step = 1.0 / (2.0 * l_max);

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / double(n)), y = w;
  Eigen::VectorXd Qw = Q.apply(w), Qy = Qw;
  double t = 1.0, E = w.dot(Qw), gap = 2.0 * (E - Qw.minCoeff());
  int it = 0;
  for (; it < max_iterations && gap > tol * E; ++it) {
    if (it > 0) Qy = Q.apply(y);
    Eigen::VectorXd w_new = project_simplex(y - 2.0 * step * Qy);
    Eigen::VectorXd Qw_new = Q.apply(w_new);
    if (Qy.dot(w_new - w) > 0) {
      t = 1.0;
      y = w_new;
    } else {
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = w_new + ((t - 1.0) / t_new) * (w_new - w);
      t = t_new;
    }
    w = std::move(w_new);
    Qw = std::move(Qw_new);
    E = w.dot(Qw);
    gap = 2.0 * (E - Qw.minCoeff());
  }
  if (gap > tol * E) throw ConvergenceError("capacity: duality gap above tolerance after max_iterations", 1.0 / E);
  res.energy = E;
  res.estimate = 1.0 / E;
  res.gap = gap;
  res.iterations = it;
  res.optimizer.weights = w;
  return res;
}

HausdorffResult hausdorff_measure(const TargetSet& set, double gamma, int max_depth, std::size_t cell_budget) {
  if (max_depth < 2 || max_depth > 24) throw DomainError("hausdorff_measure: max_depth must be in [2, 24]");
  HausdorffResult res;
  if (gamma < 0) {
    res.estimate = kInfinity;
    return res;
  }
  if (set.is_empty()) return res;
  const int d = set.dim();
  const Box bb = set.bounding_box();

  // Cells as integer corners at the current depth, d entries per cell.
  std::vector<long long> cells;
  {
    std::vector<long long> lo(d), hi(d);
    std::size_t count = 1;
    for (int i = 0; i < d; ++i) {
      lo[i] = static_cast<long long>(std::floor(bb.lo[i]));
      hi[i] = static_cast<long long>(std::floor(bb.hi[i]));
      count *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
    }
    if (count > cell_budget) {
      res.budget_exhausted = true;
      res.estimate = kInfinity;
      return res;
    }
    std::vector<long long> idx(lo);
    for (std::size_t c = 0; c < count; ++c) {
      cells.insert(cells.end(), idx.begin(), idx.end());
      for (int i = d - 1; i >= 0; --i) {
        if (++idx[i] <= hi[i]) break;
        idx[i] = lo[i];
      }
    }
  }

  Eigen::VectorXd lo(d), hi(d);
  for (int depth = 0; depth <= max_depth; ++depth) {
    const double side = std::ldexp(1.0, -depth);
    std::vector<long long> kept;
    double score = 0;
    for (std::size_t c = 0; c < cells.size(); c += d) {
      for (int i = 0; i < d; ++i) {
        lo[i] = double(cells[c + i]) * side;
        hi[i] = lo[i] + side;
      }
      const auto clip = set.clip(lo, hi);
      if (!clip) continue;
      const double diam = (clip->hi - clip->lo).norm();
      score += gamma == 0 ? 1.0 : std::pow(diam, gamma);
      kept.insert(kept.end(), cells.begin() + static_cast<std::ptrdiff_t>(c),
                  cells.begin() + static_cast<std::ptrdiff_t>(c + d));
    }
    res.per_depth.push_back(score);
    if (depth == max_depth) break;
    const std::size_t children = (kept.size() / d) << d;
    if (children > cell_budget) {
      res.budget_exhausted = true;
      break;
    }
    cells.clear();
    cells.reserve(children * d);
    for (std::size_t c = 0; c < kept.size(); c += d) {
      for (int mask = 0; mask < (1 << d); ++mask) {
        for (int i = 0; i < d; ++i) cells.push_back(2 * kept[c + i] + ((mask >> i) & 1));
      }
    }
  }
  const auto best = std::min_element(res.per_depth.begin(), res.per_depth.end());
  res.estimate = *best;
  res.depth = static_cast<int>(best - res.per_depth.begin());
  const std::size_t m = res.per_depth.size();
  res.still_decreasing = m >= 2 && res.per_depth[m - 1] < res.per_depth[m - 2] * (1.0 - 1e-12);
  return res;
}

nlohmann::json to_json(const CapacityResult& r) {
  nlohmann::json j{{"estimate", r.estimate},
                   {"energy", std::isinf(r.energy) ? nlohmann::json("inf") : nlohmann::json(r.energy)},
                   {"gap", r.gap},
                   {"iterations", r.iterations},
                   {"n_grid", r.n_cells},
                   {"cell_side", r.cell_side},
                   {"diverged", r.diverged}};
  return j;
}

nlohmann::json to_json(const HausdorffResult& r) {
  nlohmann::json j{{"estimate", std::isinf(r.estimate) ? nlohmann::json("inf") : nlohmann::json(r.estimate)},
                   {"depth", r.depth},
                   {"still_decreasing", r.still_decreasing},
                   {"budget_exhausted", r.budget_exhausted},
                   {"per_depth", r.per_depth}};
  return j;
}

}  // namespace rieszwave
