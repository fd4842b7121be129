#include "rieszwave/spde_sim.hpp"

#include <Eigen/QR>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "rieszwave/errors.hpp"
#include "rieszwave/fft.hpp"
#include "rieszwave/numerics.hpp"
#include "rieszwave/rng.hpp"

namespace rieszwave {

namespace {

using std::numbers::pi;

struct Multipliers {
  Eigen::ArrayXd S;   // u_{n+1} = S u_n - u_{n-1} + K1 (F_n + F_{n-1})
  Eigen::ArrayXd K1;
};

bool lockstep(const GridSpec& grid) { return std::abs(grid.dt - grid.dx()) <= 1e-12 * grid.dx(); }

Multipliers multipliers(const GridSpec& grid) {
  const auto N = static_cast<Eigen::Index>(grid.points());
  Multipliers m{Eigen::ArrayXd(N), Eigen::ArrayXd(N)};
  const double h = grid.dx(), dt = grid.dt;
  const double hk = std::pow(h, grid.k);
  const bool exact_k1 = grid.k == 1 && lockstep(grid);
  for (Eigen::Index p = 0; p < N; ++p) {
    if (exact_k1) {
      const double c = std::cos(2.0 * pi * signed_bin(static_cast<int>(p), grid.n_space) / grid.n_space);
      m.S[p] = 2.0 * c;
      m.K1[p] = 0.375 + 0.125 * c;
    } else {
      const double w = std::sqrt(frequency_norm_sq(grid, static_cast<std::size_t>(p)));
      const double a = w * dt;
      m.S[p] = 2.0 * std::cos(a);
      if (a < 1e-8) {
        m.K1[p] = dt / (2.0 * hk);
      } else {
        const double s = std::sin(0.5 * a);
        m.K1[p] = 2.0 * s * s / (dt * w * w * hk);
      }
    }
  }
  return m;
}

bool light_cone_contained(const GridSpec& grid) { return 2.0 * grid.n_time * grid.dt <= grid.L * (1.0 + 1e-12); }

SolutionField empty_field(const ModelSpec& model, const GridSpec& grid, std::uint64_t seed) {
  SolutionField f;
  f.grid = grid;
  f.d = model.d;
  f.beta = model.params.beta;
  f.values = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>((grid.n_time + 1) * grid.points() * model.d));
  f.master_seed = seed;
  f.model_hash = model.hash();
  f.contained = light_cone_contained(grid);
  return f;
}

void check_noise(const ModelSpec& model, const NoiseGrid& noise) {
  model.validate();
  noise.grid.validate();
  if (noise.grid.k != model.params.k) throw DomainError("noise grid dimension differs from model k");
  if (noise.d != model.d) throw DomainError("noise component count differs from model d");
  if (std::abs(noise.beta - model.params.beta) > 1e-12) throw DomainError("noise beta differs from model beta");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void ModelSpec::validate() const {
  params.validate();
  if (d < 1) throw DomainError("model.d must be >= 1");
  if (coeffs.d != d) throw DomainError("coefficients dimension differs from model.d");
  if (!coeffs.sigma || !coeffs.b) throw DomainError("coefficients must define sigma and b");
}

std::uint64_t ModelSpec::hash() const {
  std::ostringstream s;
  s << std::setprecision(17) << params.k << '|' << params.beta << '|' << d << '|' << coeffs.description << '|'
    << (noise == NoiseHypothesis::C1 ? "C1" : "C1'");
  return fnv1a(s.str());
}

ModelSpec additive_model(int k, double beta, int d) {
  ModelSpec m;
  m.params = WaveParams{k, beta};
  m.d = d;
  m.coeffs = coefficient_preset("identity-additive", d);
  m.validate();
  return m;
}

std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path) {
  return substream_seed(master_seed, {0x7061746873ULL, static_cast<std::uint64_t>(path)});
}

SolutionField simulate_additive_driven(const ModelSpec& model, const NoiseGrid& noise, const SimOptions& options) {
  check_noise(model, noise);
  if (!model.coeffs.additive) throw UnsupportedError("simulate_additive: sigma is not constant");
  if (!model.coeffs.zero_drift && !options.enable_drift) {
    throw UnsupportedError("simulate_additive: nonzero drift requires drift stepping to be enabled");
  }
  const GridSpec& grid = noise.grid;
  const int d = model.d, n_time = grid.n_time;
  const auto N = static_cast<Eigen::Index>(grid.points());
  const Multipliers mult = multipliers(grid);
  const Eigen::MatrixXd sigma = model.coeffs.sigma(Eigen::VectorXd::Zero(d));
  const bool drift = !model.coeffs.zero_drift;
  const double drift_scale = grid.dt * grid.cell_volume();

  SolutionField out = empty_field(model, grid, noise.master_seed);
  std::vector<ComplexArray> u_prev(d, ComplexArray::Zero(N)), u_cur(d, ComplexArray::Zero(N));
  std::vector<ComplexArray> f_prev(d, ComplexArray::Zero(N));
  std::vector<ComplexArray> m_hat(d);
  ComplexArray work(N);
  for (int n = 0; n < n_time; ++n) {
    for (int j = 0; j < d; ++j) {
      m_hat[j] = noise.slice(n, j).cast<std::complex<double>>();
      fft_cube(m_hat[j], grid.n_space, grid.k, false);
    }
    Eigen::MatrixXd b_now;
    if (drift) {
      b_now.resize(N, d);
      const auto u_now = out.slice(n);
      for (Eigen::Index x = 0; x < N; ++x) {
        b_now.row(x) = model.coeffs.b(u_now.row(x).transpose()).transpose() * drift_scale;
      }
    }
    for (int i = 0; i < d; ++i) {
      ComplexArray f = ComplexArray::Zero(N);
      for (int j = 0; j < d; ++j) {
        if (sigma(i, j) != 0.0) f += sigma(i, j) * m_hat[j];
      }
      if (drift) {
        work = b_now.col(i).cast<std::complex<double>>();
        fft_cube(work, grid.n_space, grid.k, false);
        f += work;
      }
      ComplexArray next = mult.S.cast<std::complex<double>>() * u_cur[i] - u_prev[i] +
                          mult.K1.cast<std::complex<double>>() * (f + f_prev[i]);
      u_prev[i] = std::move(u_cur[i]);
      u_cur[i] = std::move(next);
      f_prev[i] = std::move(f);
      work = u_cur[i];
      fft_cube(work, grid.n_space, grid.k, true);
      for (Eigen::Index x = 0; x < N; ++x) {
        out.values[static_cast<Eigen::Index>(out.index(n + 1, static_cast<std::size_t>(x), i))] = work[x].real();
      }
    }
  }
  return out;
}

SolutionField simulate_additive(const ModelSpec& model, const GridSpec& grid, std::uint64_t master_seed,
                                const SimOptions& options) {
  model.validate();
  if (grid.k != model.params.k) throw DomainError("grid.k differs from model k");
  const NoiseGrid noise = sample_noise(grid, model.d, model.params.beta, master_seed);
  return simulate_additive_driven(model, noise, options);
}

SolutionField simulate_nonlinear_k1_driven(const ModelSpec& model, const NoiseGrid& noise) {
  check_noise(model, noise);
  const GridSpec& grid = noise.grid;
  if (grid.k != 1) throw UnsupportedError("simulate_nonlinear_k1: k must be 1");
  if (!lockstep(grid)) {
    throw ConfigError("simulate_nonlinear_k1: need dt == dx so light-cone windows advance by whole cells");
  }
  const int d = model.d, n = grid.n_space, T = grid.n_time;
  const double drift_scale = grid.dt * grid.dx();
  const bool drift = !model.coeffs.zero_drift;
  SolutionField out = empty_field(model, grid, noise.master_seed);

  // Sources F_m (component-major) and their periodic prefix sums.
  std::vector<Eigen::ArrayXXd> F(T, Eigen::ArrayXXd::Zero(n, d));
  std::vector<Eigen::ArrayXXd> P(T, Eigen::ArrayXXd::Zero(n + 1, d));
  auto wrap = [n](long long i) { return static_cast<int>(((i % n) + n) % n); };
  auto window = [&](int m, int i, int x, int w) {
    const auto& pre = P[m];
    const long long len = 2LL * w + 1;
    const long long full = len / n;
    const int rem = static_cast<int>(len % n);
    const int start = wrap(static_cast<long long>(x) - w);
    double s = static_cast<double>(full) * pre(n, i);
    if (start + rem <= n) {
      s += pre(start + rem, i) - pre(start, i);
    } else {
      s += pre(n, i) - pre(start, i) + pre(start + rem - n, i);
    }
    return s;
  };

  Eigen::VectorXd u(d);
  for (int step = 0; step < T; ++step) {
    for (int z = 0; z < n; ++z) {
      for (int i = 0; i < d; ++i) u(i) = out.at(step, static_cast<std::size_t>(z), i);
      const Eigen::MatrixXd s = model.coeffs.sigma(u);
      Eigen::VectorXd dm(d);
      for (int j = 0; j < d; ++j) dm(j) = noise.slice(step, j)[z];
      Eigen::VectorXd f = s * dm;
      if (drift) f += model.coeffs.b(u) * drift_scale;
      F[step].row(z) = f.transpose().array();
    }
    for (int i = 0; i < d; ++i) {
      for (int z = 0; z < n; ++z) P[step](z + 1, i) = P[step](z, i) + F[step](z, i);
    }
    for (int x = 0; x < n; ++x) {
      for (int i = 0; i < d; ++i) {
        double acc = 0;
        for (int m = 0; m <= step; ++m) {
          const int l = step + 1 - m;
          const auto& f = F[m];
          if (l == 1) {
            acc += 0.375 * f(x, i) + 0.0625 * (f(wrap(x - 1), i) + f(wrap(x + 1), i));
          } else {
            acc += 0.5 * window(m, i, x, l - 2) +
                   0.4375 * (f(wrap(static_cast<long long>(x) - (l - 1)), i) + f(wrap(static_cast<long long>(x) + (l - 1)), i)) +
                   0.0625 * (f(wrap(static_cast<long long>(x) - l), i) + f(wrap(static_cast<long long>(x) + l), i));
          }
        }
        out.values[static_cast<Eigen::Index>(out.index(step + 1, static_cast<std::size_t>(x), i))] = acc;
      }
    }
  }
  return out;
}

SolutionField simulate_nonlinear_k1(const ModelSpec& model, const GridSpec& grid, std::uint64_t master_seed) {
  model.validate();
  if (grid.k != 1 || model.params.k != 1) throw UnsupportedError("simulate_nonlinear_k1: k must be 1");
  if (!lockstep(grid)) {
    throw ConfigError("simulate_nonlinear_k1: need dt == dx so light-cone windows advance by whole cells");
  }
  const NoiseGrid noise = sample_noise(grid, model.d, model.params.beta, master_seed);
  return simulate_nonlinear_k1_driven(model, noise);
}

SolutionField simulate(const ModelSpec& model, const GridSpec& grid, std::uint64_t master_seed,
                       const SimOptions& options) {
  if (model.coeffs.additive) return simulate_additive(model, grid, master_seed, options);
  if (model.params.k == 1) return simulate_nonlinear_k1(model, grid, master_seed);
  throw UnsupportedError("multiplicative noise is only simulated for k = 1");
}

Eigen::ArrayXd additive_slice_variance(const WaveParams& params, const GridSpec& grid, int time_index) {
  grid.validate();
  if (grid.k != params.k) throw DomainError("grid.k differs from model k");
  if (time_index < 0 || time_index > grid.n_time) throw IndexError("time index outside the grid");
  const Multipliers mult = multipliers(grid);
  const auto spec = noise_spectrum(grid, params.beta);
  const auto N = mult.S.size();
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(N);
  if (time_index == 0) return total;
  Eigen::ArrayXd k_prev = mult.K1, k_cur = (mult.S + 1.0) * mult.K1;
  total += k_prev.square();
  for (int l = 2; l <= time_index; ++l) {
    total += k_cur.square();
    Eigen::ArrayXd next = mult.S * k_cur - k_prev;
    k_prev = std::move(k_cur);
    k_cur = std::move(next);
  }
  return total * spec->lambda * grid.dt;
}

namespace {

Eigen::MatrixXd draw_slice(const ModelSpec& model, const GridSpec& grid, const Eigen::ArrayXd& var,
                           std::uint64_t seed) {
  const auto N = static_cast<Eigen::Index>(grid.points());
  Eigen::MatrixXd v(N, model.d);
  Eigen::ArrayXd col(N);
  for (int j = 0; j < model.d; ++j) {
    spectral_draw(grid, var, substream_seed(seed, {0x736c696365ULL, static_cast<std::uint64_t>(j)}), col);
    v.col(j) = col.matrix();
  }
  const Eigen::MatrixXd sigma = model.coeffs.sigma(Eigen::VectorXd::Zero(model.d));
  return v * sigma.transpose();
}

void require_gaussian(const ModelSpec& model) {
  if (!model.coeffs.additive || !model.coeffs.zero_drift) {
    throw UnsupportedError("slice sampling needs constant sigma and zero drift");
  }
}

}  // namespace

Eigen::MatrixXd sample_additive_slice(const ModelSpec& model, const GridSpec& grid, int time_index,
                                      std::uint64_t seed) {
  model.validate();
  require_gaussian(model);
  return draw_slice(model, grid, additive_slice_variance(model.params, grid, time_index), seed);
}

std::vector<MomentEstimate> increment_moments(std::span<const SolutionField> ensemble, int q,
                                              const std::vector<std::pair<SpaceTimePoint, SpaceTimePoint>>& pairs) {
  if (q != 2 && q != 4) throw DomainError("increment_moments: q must be 2 or 4");
  if (ensemble.empty()) throw DomainError("increment_moments: empty ensemble");
  const GridSpec& grid = ensemble.front().grid;
  std::vector<MomentEstimate> out;
  std::vector<double> samples(ensemble.size());
  for (const auto& [a, b] : pairs) {
    if (a.n < 0 || a.n > grid.n_time || b.n < 0 || b.n > grid.n_time) throw IndexError("pair time outside the grid");
    const std::size_t xa = grid.flat(a.x), xb = grid.flat(b.x);
    for (std::size_t p = 0; p < ensemble.size(); ++p) {
      const auto& f = ensemble[p];
      double s2 = 0;
      for (int i = 0; i < f.d; ++i) {
        const double diff = f.at(a.n, xa, i) - f.at(b.n, xb, i);
        s2 += diff * diff;
      }
      samples[p] = q == 2 ? s2 : s2 * s2;
    }
    const auto ms = mean_and_stderr(samples);
    out.push_back({ms.mean, ms.stderr_});
  }
  return out;
}

MomentTable spatial_moment_table(const ModelSpec& model, const GridSpec& grid, const SpatialMomentDesign& design,
                                 std::size_t n_paths, std::uint64_t master_seed, unsigned workers) {
  model.validate();
  grid.validate();
  if (design.q != 2 && design.q != 4) throw DomainError("moment order q must be 2 or 4");
  if (design.lags.empty()) throw DomainError("moment design needs at least one lag");
  if (design.time_index < 0 || design.time_index > grid.n_time) throw IndexError("time index outside the grid");
  for (int lag : design.lags) {
    if (lag < 1 || lag >= grid.n_space / 2) throw IndexError("lag must be in [1, n_space/2)");
  }
  const std::size_t L = design.lags.size();
  const std::size_t N = grid.points();
  const int k = grid.k, n = grid.n_space, d = model.d;
  const bool fast = model.coeffs.additive && model.coeffs.zero_drift;
  const Eigen::ArrayXd var = fast ? additive_slice_variance(model.params, grid, design.time_index) : Eigen::ArrayXd();
  std::vector<double> per_path(n_paths * L);
  parallel_for(n_paths, workers, [&](std::size_t p) {
    const std::uint64_t seed = path_seed(master_seed, p);
    Eigen::MatrixXd u;
    if (fast) {
      u = draw_slice(model, grid, var, seed);
    } else {
      const auto field = simulate(model, grid, seed);
      u = field.slice(design.time_index);
    }
    std::vector<double> acc(N * k);
    for (std::size_t li = 0; li < L; ++li) {
      const int lag = design.lags[li];
      for (std::size_t x = 0; x < N; ++x) {
        std::size_t stride = N;
        for (int a = 0; a < k; ++a) {
          stride /= static_cast<std::size_t>(n);
          const auto c = static_cast<long long>((x / stride) % n);
          const std::size_t y = x + static_cast<std::size_t>(((c + lag) % n - c) * static_cast<long long>(stride));
          double s2 = 0;
          for (int i = 0; i < d; ++i) {
            const double diff = u(static_cast<Eigen::Index>(y), i) - u(static_cast<Eigen::Index>(x), i);
            s2 += diff * diff;
          }
          acc[x * k + a] = design.q == 2 ? s2 : s2 * s2;
        }
      }
      per_path[p * L + li] = pairwise_sum(acc) / double(acc.size());
    }
  });
  MomentTable table;
  std::vector<double> column(n_paths);
  for (std::size_t li = 0; li < L; ++li) {
    for (std::size_t p = 0; p < n_paths; ++p) column[p] = per_path[p * L + li];
    const auto ms = mean_and_stderr(column);
    table.push_back({design.lags[li] * grid.dx(), ms.mean, ms.stderr_});
  }
  return table;
}

HolderFit fit_holder_exponent(const MomentTable& table, int q, int resamples, std::uint64_t seed) {
  if (q <= 0) throw DomainError("fit_holder_exponent: q must be > 0");
  HolderFit fit;
  std::vector<std::size_t> use;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].moment > 0 && table[i].separation > 0 && std::isfinite(table[i].moment)) {
      use.push_back(i);
    } else {
      fit.excluded.push_back(i);
    }
  }
  if (use.size() < 3) throw FitError("fit_holder_exponent: fewer than 3 usable moment estimates");
  const auto m = static_cast<Eigen::Index>(use.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    A(r, 0) = 1.0;
    A(r, 1) = std::log(table[use[r]].separation);
    y(r) = std::log(table[use[r]].moment);
  }
  const auto qr = A.colPivHouseholderQr();
  fit.delta_hat = qr.solve(y)(1) / q;
  fit.used = use.size();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> slopes;
  for (int b = 0; b < resamples; ++b) {
    Eigen::VectorXd yb(m);
    bool ok = true;
    for (Eigen::Index r = 0; r < m; ++r) {
      const double v = table[use[r]].moment + table[use[r]].stderr_ * normal(rng);
      if (!(v > 0)) ok = false;
      yb(r) = ok ? std::log(v) : 0.0;
    }
    if (ok) slopes.push_back(qr.solve(yb)(1) / q);
  }
  if (slopes.size() >= 2) {
    const double mean = pairwise_sum(slopes) / double(slopes.size());
    double ss = 0;
    for (double s : slopes) ss += (s - mean) * (s - mean);
    fit.stderr_ = std::sqrt(ss / double(slopes.size() - 1));
  }
  return fit;
}

}  // namespace rieszwave
