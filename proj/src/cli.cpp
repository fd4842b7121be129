#include "rieszwave/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rieszwave/errors.hpp"
#include "rieszwave/hit_analysis.hpp"
#include "rieszwave/noise_field.hpp"
#include "rieszwave/numerics.hpp"
#include "rieszwave/potential_theory.hpp"
#include "rieszwave/serialization.hpp"
#include "rieszwave/spde_sim.hpp"
#include "rieszwave/wave_kernel.hpp"

namespace rieszwave {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class RunLock {
 public:
  explicit RunLock(fs::path path) : path_(std::move(path)) {
    FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw std::runtime_error("run directory is locked by another run: " + path_.string());
    std::fclose(f);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

struct Context {
  const RunConfig& cfg;
  std::string run_id;
  fs::path dir;
  std::ostream& log;
  bool verbose;
  std::vector<std::string> artifacts;

  void write_json(const std::string& name, json j) {
    j["run_id"] = run_id;
    std::ofstream out(dir / name);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    artifacts.push_back(name);
  }
  void write_text(const std::string& name, const std::string& body) {
    std::ofstream out(dir / name);
    out << "# run_id=" << run_id << '\n' << body;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    artifacts.push_back(name);
  }
  void note(const std::string& msg) const {
    if (verbose) log << msg << '\n';
  }
};

template <typename T>
T field_or(const json& block, const std::string& where, const char* key, T fallback) {
  if (!block.contains(key)) return fallback;
  try {
    return block[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
T field_required(const json& block, const std::string& where, const char* key) {
  if (!block.contains(key)) throw ConfigError(where + "." + key + ": required field is missing");
  return field_or<T>(block, where, key, T{});
}

TargetSet parse_target(const json& j, const std::string& where) {
  try {
    return TargetSet::from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::vector<TargetSet> parse_targets(const json& block, const std::string& where, int d) {
  if (!block.contains("targets") || !block["targets"].is_array() || block["targets"].empty()) {
    throw ConfigError(where + ".targets: expected a non-empty array of target sets");
  }
  std::vector<TargetSet> out;
  for (std::size_t i = 0; i < block["targets"].size(); ++i) {
    out.push_back(parse_target(block["targets"][i], where + ".targets[" + std::to_string(i) + "]"));
    if (out.back().dim() != d) throw ConfigError(where + ".targets[" + std::to_string(i) + "]: dim must equal model.d");
  }
  return out;
}

SpaceTimeWindow parse_window(const json& block, const std::string& where, int k) {
  if (!block.contains("window")) throw ConfigError(where + ".window: required field is missing");
  const json& w = block["window"];
  const std::string at = where + ".window";
  if (!w.is_object()) throw ConfigError(at + ": expected an object");
  for (const auto& [key, _] : w.items()) {
    if (key != "t_min" && key != "t_max" && key != "lo" && key != "hi") throw ConfigError(at + ": unknown key '" + key + "'");
  }
  SpaceTimeWindow win;
  win.t_min = field_required<double>(w, at, "t_min");
  win.t_max = field_required<double>(w, at, "t_max");
  const auto lo = field_required<std::vector<double>>(w, at, "lo");
  const auto hi = field_required<std::vector<double>>(w, at, "hi");
  if (lo.size() != static_cast<std::size_t>(k) || hi.size() != static_cast<std::size_t>(k)) {
    throw ConfigError(at + ": lo and hi need k entries");
  }
  win.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), k);
  win.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), k);
  try {
    win.validate();
  } catch (const DomainError& e) {
    throw ConfigError(at + ": " + e.what());
  }
  return win;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

void run_calibrate(Context& c) {
  const ModelSpec& m = c.cfg.require_model();
  c.note("calibrating c_{k,beta}");
  const auto rep = calibration_battery(m.params.beta, m.params.k);
  const double value = calibrate_ckbeta(m.params.beta, m.params.k);
  c.write_json("calibration.json", {{"k", m.params.k},
                                    {"beta", m.params.beta},
                                    {"c_k_beta", value},
                                    {"coefficient_of_variation", rep.coefficient_of_variation},
                                    {"ratios", rep.ratios}});
  std::ostringstream csv;
  write_oracle_csv(csv, oracle_table(m.params));
  c.write_text("oracle.csv", csv.str());
}

void run_simulate(Context& c) {
  const ModelSpec& m = c.cfg.require_model();
  const GridSpec& g = c.cfg.require_grid();
  const json e = c.cfg.experiment_for("simulate");
  const int n_paths = field_or<int>(e, "experiment.simulate", "n_paths", 1);
  const bool save_noise = field_or<bool>(e, "experiment.simulate", "save_noise", false);
  if (n_paths < 1 || n_paths > 100000) throw ConfigError("experiment.simulate.n_paths: must be in [1, 1e5]");
  SimOptions opts;
  opts.enable_drift = c.cfg.enable_drift;
  std::vector<SolutionField> fields(static_cast<std::size_t>(n_paths));
  parallel_for(fields.size(), c.cfg.workers, [&](std::size_t p) {
    const std::uint64_t seed = path_seed(c.cfg.seed, p);
    if (save_noise) {
      const NoiseGrid noise = sample_noise(g, m.d, m.params.beta, seed);
      std::ostringstream name;
      name << "noise_" << std::setw(5) << std::setfill('0') << p << ".rwn";
      write_noise_grid(c.dir / name.str(), noise);
    }
    fields[p] = simulate(m, g, seed, opts);
  });
  if (save_noise) {
    for (int p = 0; p < n_paths; ++p) {
      std::ostringstream name;
      name << "noise_" << std::setw(5) << std::setfill('0') << p << ".rwn";
      c.artifacts.push_back(name.str());
    }
  }
  for (const auto& f : write_ensemble(c.dir / "ensemble", fields, c.cfg.seed)) c.artifacts.push_back("ensemble/" + f);
  c.artifacts.push_back("ensemble/manifest.json");
  c.write_json("simulate.json", {{"n_paths", n_paths},
                                 {"contained", fields.front().contained},
                                 {"model_hash", fields.front().model_hash}});
}

void run_moments(Context& c) {
  const ModelSpec& m = c.cfg.require_model();
  const GridSpec& g = c.cfg.require_grid();
  const json e = c.cfg.experiment_for("moments");
  const std::string at = "experiment.moments";
  SpatialMomentDesign design;
  design.time_index = field_or<int>(e, at, "time_index", g.n_time);
  design.lags = field_or<std::vector<int>>(e, at, "lags", {1, 2, 4, 8});
  design.q = field_or<int>(e, at, "q", 2);
  const int n_paths = field_or<int>(e, at, "n_paths", 1000);
  if (design.q != 2 && design.q != 4) throw ConfigError(at + ".q: must be 2 or 4");
  if (n_paths < 2) throw ConfigError(at + ".n_paths: must be >= 2");
  if (design.time_index < 0 || design.time_index > g.n_time) throw ConfigError(at + ".time_index: outside [0, n_time]");
  for (int lag : design.lags) {
    if (lag < 1 || lag >= g.n_space / 2) throw ConfigError(at + ".lags: each lag must be in [1, n_space/2)");
  }
  const auto table = spatial_moment_table(m, g, design, static_cast<std::size_t>(n_paths), c.cfg.seed, c.cfg.workers);
  std::ostringstream csv;
  csv << "separation,moment,stderr\n";
  for (const auto& r : table) csv << fmt(r.separation) << ',' << fmt(r.moment) << ',' << fmt(r.stderr_) << '\n';
  c.write_text("moments.csv", csv.str());
  json fit;
  try {
    const auto f = fit_holder_exponent(table, design.q);
    fit = {{"delta_hat", f.delta_hat}, {"stderr", f.stderr_}, {"used", f.used}, {"excluded", f.excluded}};
  } catch (const FitError& err) {
    fit = {{"error", err.what()}};
  }
  fit["target"] = (2.0 - m.params.beta) / 2.0;
  fit["q"] = design.q;
  c.write_json("holder.json", fit);
}

void run_capacity(Context& c) {
  const json e = c.cfg.experiment_for("capacity");
  const std::string at = "experiment.capacity";
  if (!e.contains("target")) throw ConfigError(at + ".target: required field is missing");
  const TargetSet set = parse_target(e["target"], at + ".target");
  KernelOrder order;
  order.gamma = field_required<double>(e, at, "gamma");
  if (e.contains("log_constant_c")) order.log_constant_c = field_or<double>(e, at, "log_constant_c", 0.0);
  const int n_grid = field_or<int>(e, at, "n_grid", 400);
  const double tol = field_or<double>(e, at, "tol", 1e-6);
  if (n_grid < 50 || n_grid > 100000) throw ConfigError(at + ".n_grid: must be in [50, 1e5]");
  const int max_iterations = field_or<int>(e, at, "max_iterations", 200000);
  if (!(tol > 0)) throw ConfigError(at + ".tol: must be > 0");
  if (max_iterations < 1) throw ConfigError(at + ".max_iterations: must be >= 1");
  auto r = capacity(set, order, n_grid, tol, max_iterations);
  json j = to_json(r);
  j["gamma"] = order.gamma;
  c.write_json("capacity.json", j);
}

void run_hausdorff(Context& c) {
  const json e = c.cfg.experiment_for("hausdorff");
  const std::string at = "experiment.hausdorff";
  if (!e.contains("target")) throw ConfigError(at + ".target: required field is missing");
  const TargetSet set = parse_target(e["target"], at + ".target");
  const double gamma = field_required<double>(e, at, "gamma");
  const int depth = field_or<int>(e, at, "max_depth", 16);
  if (depth < 2 || depth > 24) throw ConfigError(at + ".max_depth: must be in [2, 24]");
  json j = to_json(hausdorff_measure(set, gamma, depth));
  j["gamma"] = gamma;
  c.write_json("hausdorff.json", j);
}

void run_hitprob(Context& c) {
  const ModelSpec& m = c.cfg.require_model();
  const GridSpec& g = c.cfg.require_grid();
  const json e = c.cfg.experiment_for("hitprob");
  const std::string at = "experiment.hitprob";
  const SpaceTimeWindow w = parse_window(e, at, m.params.k);
  const auto targets = parse_targets(e, at, m.d);
  const int n_paths = field_or<int>(e, at, "n_paths", 1000);
  if (n_paths < 100) throw ConfigError(at + ".n_paths: must be >= 100");
  HitOptions opts;
  opts.workers = c.cfg.workers;
  if (e.contains("eps_snap")) opts.eps_snap = field_or<double>(e, at, "eps_snap", 0.0);
  const auto hits = mc_hitting_probabilities(m, w, targets, g, static_cast<std::size_t>(n_paths), c.cfg.seed, opts);
  std::ostringstream csv;
  csv << "target_id,p_hat,ci_low,ci_high,hits,n_paths,eps_snap\n";
  json rows = json::array();
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto& h = hits[i];
    csv << "target_" << i << ',' << fmt(h.p_hat) << ',' << fmt(h.ci_low) << ',' << fmt(h.ci_high) << ',' << h.hits
        << ',' << h.n_paths << ',' << fmt(h.eps_snap) << '\n';
    rows.push_back({{"target_id", "target_" + std::to_string(i)},
                    {"p_hat", h.p_hat},
                    {"ci_low", h.ci_low},
                    {"ci_high", h.ci_high},
                    {"eps_snap", h.eps_snap}});
  }
  c.write_text("hitprob.csv", csv.str());
  c.write_json("hitprob.json", {{"rows", rows}});
}

void run_exponents(Context& c) {
  const ModelSpec& m = c.cfg.require_model(true);
  const json e = c.cfg.experiment_for("exponents");
  const std::string at = "experiment.exponents";
  const double zeta = field_or<double>(e, at, "zeta", 0.01);
  const double delta = field_or<double>(e, at, "delta", 0.01);
  HypothesisParams hp;
  hp.beta = m.params.beta;
  hp.alpha = field_or<double>(e, at, "alpha", hp.alpha);
  hp.eta = field_or<double>(e, at, "eta", hp.eta);
  hp.mu = field_or<double>(e, at, "mu", hp.mu);
  ExponentReport rep;
  try {
    const BoundCase bc = parse_bound_case(field_or<std::string>(e, at, "case", "additive-C1"));
    rep = exponent_report(m.d, m.params.k, m.params.beta, zeta, delta, bc, hp);
  } catch (const DomainError& err) {
    throw ConfigError(at + ": " + err.what());
  }
  json j = rep.to_json();
  if (e.contains("rho")) {
    const double rho = field_or<double>(e, at, "rho", 0.0);
    j["what_if_rho"] = {{"rho", rho},
                        {"spacetime", lower_bound_capacity_order(m.d, m.params.k, m.params.beta, delta, rho,
                                                                 CapacityVariant::SpaceTime)}};
  }
  c.write_json("exponents.json", j);
}

void run_report(Context& c) {
  const ModelSpec& m = c.cfg.require_model();
  const GridSpec& g = c.cfg.require_grid();
  const json e = c.cfg.experiment_for("report");
  const std::string at = "experiment.report";
  const SpaceTimeWindow w = parse_window(e, at, m.params.k);
  const auto targets = parse_targets(e, at, m.d);
  const int n_paths = field_or<int>(e, at, "n_paths", 1000);
  if (n_paths < 100) throw ConfigError(at + ".n_paths: must be >= 100");
  SandwichOptions opts;
  opts.hit.workers = c.cfg.workers;
  if (e.contains("eps_snap")) opts.hit.eps_snap = field_or<double>(e, at, "eps_snap", 0.0);
  opts.n_grid = field_or<int>(e, at, "n_grid", 400);
  opts.hausdorff_depth = field_or<int>(e, at, "hausdorff_depth", 16);
  opts.zeta = field_or<double>(e, at, "zeta", 0.01);
  opts.delta = field_or<double>(e, at, "delta", 0.01);
  const auto rep = sandwich_report(m, w, targets, g, static_cast<std::size_t>(n_paths), c.cfg.seed, opts);
  c.write_text("sandwich.csv", sandwich_csv(rep));
  c.write_json("sandwich.json", {{"ordering_ok", rep.ordering_ok}, {"rows", rep.rows.size()}});
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

int run_subcommand(const std::string& subcommand, const RunConfig& config, const RunOptions& options,
                   std::ostream& out, std::ostream& log) {
  const auto& names = subcommand_names();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  const std::string id = config.run_id(subcommand);
  const fs::path dir = config.output_dir / id;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest) && !options.force) {
    out << "cached " << dir.string() << '\n';
    return kExitOk;
  }
  fs::create_directories(dir);
  RunLock lock(dir / ".lock");
  fs::remove(manifest);
  Context ctx{config, id, dir, log, options.verbose, {}};
  if (subcommand == "calibrate") {
    run_calibrate(ctx);
  } else if (subcommand == "simulate") {
    run_simulate(ctx);
  } else if (subcommand == "moments") {
    run_moments(ctx);
  } else if (subcommand == "capacity") {
    run_capacity(ctx);
  } else if (subcommand == "hausdorff") {
    run_hausdorff(ctx);
  } else if (subcommand == "hitprob") {
    run_hitprob(ctx);
  } else if (subcommand == "exponents") {
    run_exponents(ctx);
  } else {
    run_report(ctx);
  }
  const json m{{"run_id", id},
               {"subcommand", subcommand},
               {"config", config.document},
               {"artifacts", ctx.artifacts},
               {"metadata", {{"created", timestamp()}, {"workers", config.workers}}}};
  std::ofstream mf(manifest);
  mf << m.dump(2) << '\n';
  if (!mf) throw std::runtime_error("cannot write " + manifest.string());
  out << "done " << dir.string() << '\n';
  return kExitOk;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic wave equations driven by Riesz-type noise"};
  std::string config_path, subcommand;
  bool force = false, verbose = false;
  std::optional<int> workers;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_flag("--force", force, "Recompute even if a finished run exists");
  app.add_option("--workers", workers, "Worker threads (0 = all cores); does not change results");
  app.add_flag("--verbose", verbose, "Progress messages on stderr");
  app.add_option("subcommand", subcommand, "calibrate | simulate | moments | capacity | hausdorff | hitprob | "
                                           "exponents | report")
      ->required()
      ->check(CLI::IsMember(subcommand_names()));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }
  try {
    RunConfig cfg = RunConfig::load(config_path);
    if (workers) {
      if (*workers < 0) throw ConfigError("--workers: must be >= 0");
      cfg.workers = static_cast<unsigned>(*workers);
    }
    if (cfg.workers == 0) cfg.workers = default_workers();
    return run_subcommand(subcommand, cfg, RunOptions{force, verbose}, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << " (partial estimate " << e.partial_estimate() << ")\n";
    return kExitConvergence;
  } catch (const CalibrationError& e) {
    err << "calibration error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace rieszwave
