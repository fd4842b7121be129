#include "rieszwave/hit_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "rieszwave/errors.hpp"
#include "rieszwave/numerics.hpp"

namespace rieszwave {

namespace {

constexpr double kWilsonZ = 1.959963984540054;

void check_common(int d, int k, double beta) {
  if (d < 1) throw DomainError("d must be >= 1");
  if (k < 1 || k > 3) throw DomainError("k must be 1, 2 or 3");
  if (!(beta > 0 && beta <= std::min(2.0, double(k)) && beta < 2.0)) {
    throw DomainError("(C1): beta must lie in ]0, 2 ^ k] with beta < 2");
  }
}

double flag_nan(double v, const char* name, const char* hyp) {
  if (std::isnan(v)) throw DomainError(std::string(hyp) + ": parameter " + name + " is required");
  return v;
}

}  // namespace

void SpaceTimeWindow::validate() const {
  if (!(t_min > 0)) throw DomainError("window: t_min must be > 0");
  if (!(t_max > t_min)) throw DomainError("window: t_max must exceed t_min");
  if (lo.size() == 0 || lo.size() != hi.size()) throw DomainError("window: space region corners must share a dimension");
  if ((hi.array() < lo.array()).any()) throw DomainError("window: space region min exceeds max");
}

std::string to_string(Polarity p) {
  switch (p) {
    case Polarity::Polar: return "Polar";
    case Polarity::NonPolar: return "NonPolar";
    default: return "Open";
  }
}

Polarity polarity_classify(int d, int k, double beta) {
  check_common(d, k, beta);
  const double e = 2.0 * (k + 1) / (2.0 - beta);
  const bool polar = d > e;
  const bool non_polar = d * (1.0 + 4.0 * d / (2.0 - beta)) < e;
  if (polar && non_polar) throw std::logic_error("polarity_classify: both conditions hold");
  if (polar) return Polarity::Polar;
  if (non_polar) return Polarity::NonPolar;
  return Polarity::Open;
}

double gaussian_order(int d, int k, double beta) {
  check_common(d, k, beta);
  return d - 2.0 * (k + 1) / (2.0 - beta);
}

std::string to_string(BoundCase c) {
  switch (c) {
    case BoundCase::AdditiveC1: return "additive-C1";
    case BoundCase::AdditiveC1Prime: return "additive-C1'";
    case BoundCase::MultK1: return "mult-k1";
    case BoundCase::MultK2: return "mult-k2";
    default: return "mult-k3";
  }
}

BoundCase parse_bound_case(const std::string& s) {
  for (auto c : {BoundCase::AdditiveC1, BoundCase::AdditiveC1Prime, BoundCase::MultK1, BoundCase::MultK2,
                 BoundCase::MultK3}) {
    if (to_string(c) == s) return c;
  }
  throw DomainError("unknown bound case '" + s + "'");
}

double case_delta(int k, BoundCase c, const HypothesisParams& p) {
  if (k < 1 || k > 3) throw DomainError("k must be 1, 2 or 3");
  switch (c) {
    case BoundCase::AdditiveC1: {
      const double beta = flag_nan(p.beta, "beta", "(C1)");
      check_common(1, k, beta);
      return (2.0 - beta) / 2.0;
    }
    case BoundCase::AdditiveC1Prime: {
      const double alpha = flag_nan(p.alpha, "alpha", "(C1')");
      if (!(alpha > 0 && alpha < 1)) throw DomainError("(C1'): alpha must lie in ]0, 1[");
      return 1.0 - alpha;
    }
    case BoundCase::MultK1: {
      if (k != 1) throw DomainError("(C3): case mult-k1 needs k = 1");
      const double beta = flag_nan(p.beta, "beta", "(C3)");
      if (!(beta > 0 && beta <= 1)) throw DomainError("(C3): beta must lie in ]0, 2 ^ k]");
      return (2.0 - beta) / 2.0;
    }
    case BoundCase::MultK2: {
      if (k != 2) throw DomainError("(C2): case mult-k2 needs k = 2");
      const double eta = flag_nan(p.eta, "eta", "(C2)");
      if (!(eta > 0 && eta < 1)) throw DomainError("(C2): eta must lie in ]0, 1[");
      return eta / 2.0;
    }
    default: {
      if (k != 3) throw DomainError("(C3): case mult-k3 needs k = 3");
      const double beta = flag_nan(p.beta, "beta", "(C3)");
      const double mu = flag_nan(p.mu, "mu", "(C3)");
      if (!(beta > 0 && beta < 2)) throw DomainError("(C3): beta must lie in ]0, 2 ^ k[");
      if (!(mu > 0 && mu <= 1)) throw DomainError("(C3): mu must lie in ]0, 1]");
      return std::min((2.0 - beta) / 2.0, (1.0 + mu) / 2.0);
    }
  }
}

double upper_bound_order(int d, int k, BoundCase c, const HypothesisParams& p, double zeta) {
  if (d < 1) throw DomainError("d must be >= 1");
  if (!(zeta > 0 && zeta < d)) throw DomainError("zeta must lie in ]0, d[");
  return d - zeta - (k + 1) / case_delta(k, c, p);
}

std::string to_string(CapacityVariant v) {
  switch (v) {
    case CapacityVariant::SpaceTime: return "spacetime";
    case CapacityVariant::FixedX: return "fixed_x";
    default: return "fixed_t";
  }
}

double lower_bound_capacity_order(int d, int k, double beta, double delta, std::optional<double> rho,
                                  CapacityVariant variant) {
  check_common(d, k, beta);
  if (!(delta > 0)) throw DomainError("delta must be > 0");
  const double g = 2.0 - beta;
  const double e = variant == CapacityVariant::SpaceTime ? 2.0 * (k + 1) / g
                   : variant == CapacityVariant::FixedX  ? 2.0 / g
                                                         : 2.0 * k / g;
  if (!rho) return d * (1.0 + 4.0 * d / g) + delta - e;
  if (!std::isfinite(*rho)) throw DomainError("rho must be finite");
  return d * (1.0 + 4.0 * d * (*rho - g) / g) + delta - e;
}

nlohmann::json ExponentReport::to_json() const {
  return {{"d", d},
          {"k", k},
          {"beta", beta},
          {"zeta", zeta},
          {"delta", delta},
          {"case", rieszwave::to_string(bound_case)},
          {"upper_hausdorff_order", upper_hausdorff_order},
          {"lower_capacity_orders",
           {{"spacetime", lower_capacity_orders[0]},
            {"fixed_x", lower_capacity_orders[1]},
            {"fixed_t", lower_capacity_orders[2]}}},
          {"gaussian_order", gaussian_order},
          {"polarity", rieszwave::to_string(polarity)}};
}

ExponentReport exponent_report(int d, int k, double beta, double zeta, double delta, BoundCase bound_case,
                               HypothesisParams params) {
  ExponentReport r;
  r.d = d;
  r.k = k;
  r.beta = beta;
  r.zeta = zeta;
  r.delta = delta;
  r.bound_case = bound_case;
  if (std::isnan(params.beta)) params.beta = beta;
  r.upper_hausdorff_order = upper_bound_order(d, k, bound_case, params, zeta);
  r.lower_capacity_orders = {lower_bound_capacity_order(d, k, beta, delta, std::nullopt, CapacityVariant::SpaceTime),
                             lower_bound_capacity_order(d, k, beta, delta, std::nullopt, CapacityVariant::FixedX),
                             lower_bound_capacity_order(d, k, beta, delta, std::nullopt, CapacityVariant::FixedT)};
  r.gaussian_order = rieszwave::gaussian_order(d, k, beta);
  r.polarity = polarity_classify(d, k, beta);
  return r;
}

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n) {
  if (n == 0) throw DomainError("wilson_interval: n must be > 0");
  const double p = double(hits) / double(n), z2 = kWilsonZ * kWilsonZ, nn = double(n);
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = kWilsonZ / (1 + z2 / nn) * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
  // At p = 0 or 1 the bound equals p analytically; pin it against round-off.
  const double lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = hits == n ? 1.0 : std::min(1.0, centre + half);
  return {std::min(lo, p), std::max(hi, p)};
}

namespace {

struct WindowPoints {
  std::vector<int> times;
  std::vector<std::size_t> cells;
  // Pairs (cell index, neighbour index) one cell apart inside the window.
  std::vector<std::pair<std::size_t, std::size_t>> space_pairs;
};

WindowPoints window_points(const SpaceTimeWindow& w, const GridSpec& grid) {
  const double tol = 1e-12 * std::max(1.0, w.t_max);
  WindowPoints out;
  for (int n = 0; n <= grid.n_time; ++n) {
    if (grid.time(n) >= w.t_min - tol && grid.time(n) <= w.t_max + tol) out.times.push_back(n);
  }
  const std::size_t N = grid.points();
  std::vector<long long> pos(N, -1);
  for (std::size_t x = 0; x < N; ++x) {
    const auto idx = grid.unflat(x);
    bool in = true;
    for (int a = 0; a < grid.k && in; ++a) {
      const double c = grid.coord(idx[a]);
      in = c >= w.lo[a] && c <= w.hi[a];
    }
    if (in) {
      pos[x] = static_cast<long long>(out.cells.size());
      out.cells.push_back(x);
    }
  }
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    const auto idx = grid.unflat(out.cells[i]);
    for (int a = 0; a < grid.k; ++a) {
      if (idx[a] + 1 >= grid.n_space) continue;
      auto nb = idx;
      ++nb[a];
      const long long j = pos[grid.flat(nb)];
      if (j >= 0) out.space_pairs.emplace_back(i, static_cast<std::size_t>(j));
    }
  }
  if (out.times.empty() || out.cells.empty()) throw DomainError("window contains no grid points");
  return out;
}

}  // namespace

std::vector<HitEstimate> mc_hitting_probabilities(const ModelSpec& model, const SpaceTimeWindow& window,
                                                  const std::vector<TargetSet>& targets, const GridSpec& grid,
                                                  std::size_t n_paths, std::uint64_t master_seed,
                                                  const HitOptions& options) {
  model.validate();
  grid.validate();
  window.validate();
  if (n_paths < 100) throw DomainError("n_paths must be >= 100");
  if (window.lo.size() != grid.k) throw DomainError("window dimension differs from grid k");
  if (window.t_max > grid.time(grid.n_time) * (1 + 1e-12)) throw DomainError("window extends past the last time");
  for (int a = 0; a < grid.k; ++a) {
    if (window.lo[a] < -grid.L || window.hi[a] > grid.L) throw DomainError("window space region outside the grid");
    if (window.hi[a] - window.lo[a] + 2 * window.t_max > 2 * grid.L * (1 + 1e-12)) {
      throw DomainError("window plus its light cone exceeds one period of the grid");
    }
  }
  for (const auto& t : targets) {
    if (t.dim() != model.d) throw DomainError("target dimension differs from model d");
  }
  if (options.eps_snap && !(*options.eps_snap >= 0)) throw DomainError("eps_snap must be >= 0");

  const WindowPoints wp = window_points(window, grid);
  const std::size_t T = targets.size();
  const int d = model.d;
  std::vector<double> min_dist(n_paths * T, kInfinity);
  std::vector<double> space_sq(n_paths, 0), time_sq(n_paths, 0);
  parallel_for(n_paths, options.workers, [&](std::size_t p) {
    const SolutionField f = simulate(model, grid, path_seed(master_seed, p));
    Eigen::VectorXd u(d);
    double ss = 0, ts = 0;
    for (std::size_t ti = 0; ti < wp.times.size(); ++ti) {
      const int n = wp.times[ti];
      const auto slice = f.slice(n);
      for (std::size_t x : wp.cells) {
        u = slice.row(static_cast<Eigen::Index>(x)).transpose();
        for (std::size_t t = 0; t < T; ++t) {
          if (targets[t].is_empty()) continue;
          auto& m = min_dist[p * T + t];
          m = std::min(m, targets[t].distance(u));
        }
      }
      for (const auto& [i, j] : wp.space_pairs) {
        ss += (slice.row(static_cast<Eigen::Index>(wp.cells[i])) - slice.row(static_cast<Eigen::Index>(wp.cells[j])))
                  .squaredNorm();
      }
      if (ti > 0 && wp.times[ti - 1] == n - 1) {
        const auto prev = f.slice(n - 1);
        for (std::size_t x : wp.cells) {
          ts += (slice.row(static_cast<Eigen::Index>(x)) - prev.row(static_cast<Eigen::Index>(x))).squaredNorm();
        }
      }
    }
    space_sq[p] = ss;
    time_sq[p] = ts;
  });

  double eps = 0;
  if (options.eps_snap) {
    eps = *options.eps_snap;
  } else {
    const double n_space_pairs = double(wp.space_pairs.size() * wp.times.size() * n_paths);
    const double n_time_pairs = double(wp.cells.size() * (wp.times.size() - 1) * n_paths);
    if (n_space_pairs > 0) eps += std::sqrt(pairwise_sum(space_sq) / n_space_pairs);
    if (n_time_pairs > 0) eps += std::sqrt(pairwise_sum(time_sq) / n_time_pairs);
  }

  std::vector<HitEstimate> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t hits = 0;
    for (std::size_t p = 0; p < n_paths; ++p) hits += min_dist[p * T + t] <= eps ? 1 : 0;
    auto& e = out[t];
    e.hits = hits;
    e.n_paths = n_paths;
    e.p_hat = double(hits) / double(n_paths);
    std::tie(e.ci_low, e.ci_high) = wilson_interval(hits, n_paths);
    e.eps_snap = eps;
  }
  return out;
}

HitEstimate mc_hitting_probability(const ModelSpec& model, const SpaceTimeWindow& window, const TargetSet& target,
                                   const GridSpec& grid, std::size_t n_paths, std::uint64_t master_seed,
                                   const HitOptions& options) {
  return mc_hitting_probabilities(model, window, {target}, grid, n_paths, master_seed, options).front();
}

SandwichReport sandwich_report(const ModelSpec& model, const SpaceTimeWindow& window,
                               const std::vector<TargetSet>& targets, const GridSpec& grid, std::size_t n_paths,
                               std::uint64_t master_seed, const SandwichOptions& options) {
  model.validate();
  const int d = model.d, k = model.params.k;
  const double beta = model.params.beta;
  const bool gaussian = model.coeffs.additive && model.coeffs.zero_drift;
  double cap_order, haus_order;
  if (gaussian) {
    cap_order = haus_order = gaussian_order(d, k, beta);
  } else {
    if (k != 1) throw UnsupportedError("sandwich_report: non-Gaussian models are simulated for k = 1 only");
    HypothesisParams hp;
    hp.beta = beta;
    haus_order = upper_bound_order(d, k, BoundCase::MultK1, hp, options.zeta);
    cap_order = lower_bound_capacity_order(d, k, beta, options.delta, std::nullopt, CapacityVariant::SpaceTime);
  }
  const auto hits = mc_hitting_probabilities(model, window, targets, grid, n_paths, master_seed, options.hit);
  SandwichReport rep;
  const Polarity pol = polarity_classify(d, k, beta);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    SandwichRow row;
    row.target_id = "target_" + std::to_string(i);
    row.hit = hits[i];
    row.capacity_order = cap_order;
    row.capacity = capacity(targets[i], KernelOrder{cap_order, std::nullopt}, options.n_grid).estimate;
    row.hausdorff_order = haus_order;
    row.hausdorff = hausdorff_measure(targets[i], haus_order, options.hausdorff_depth).estimate;
    row.polarity = pol;
    rep.rows.push_back(std::move(row));
  }
  auto collapsed = [](const SandwichRow& r) {
    return r.capacity == 0.0 || (r.hausdorff == 0.0 && r.hausdorff_order > 0);
  };
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (collapsed(rep.rows[i]) && collapsed(rep.rows[i - 1]) &&
        rep.rows[i].hit.p_hat > rep.rows[i - 1].hit.ci_high) {
      rep.ordering_ok = false;
    }
  }
  return rep;
}

std::string sandwich_csv(const SandwichReport& report) {
  std::ostringstream s;
  s << std::setprecision(12);
  s << "target_id,p_hat,ci_low,ci_high,capacity_order,capacity,hausdorff_order,hausdorff,polarity\n";
  for (const auto& r : report.rows) {
    s << r.target_id << ',' << r.hit.p_hat << ',' << r.hit.ci_low << ',' << r.hit.ci_high << ',' << r.capacity_order
      << ',' << r.capacity << ',' << r.hausdorff_order << ',';
    if (std::isinf(r.hausdorff)) {
      s << "inf";
    } else {
      s << r.hausdorff;
    }
    s << ',' << to_string(r.polarity) << '\n';
  }
  return s.str();
}

}  // namespace rieszwave
