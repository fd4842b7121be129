#include "rieszwave/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "rieszwave/errors.hpp"

namespace rieszwave {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& need(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + "." + key + ": required field is missing");
  return obj[key];
}

int get_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field + ": expected an integer");
  return v.get<int>();
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  return v.get<double>();
}

const std::map<std::string, std::set<std::string>>& experiment_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"calibrate", {}},
      {"simulate", {"n_paths", "save_noise"}},
      {"moments", {"time_index", "lags", "q", "n_paths"}},
      {"capacity", {"target", "gamma", "n_grid", "tol", "max_iterations", "log_constant_c"}},
      {"hausdorff", {"target", "gamma", "max_depth"}},
      {"hitprob", {"window", "targets", "n_paths", "eps_snap"}},
      {"exponents", {"zeta", "delta", "case", "alpha", "eta", "mu", "rho"}},
      {"report", {"window", "targets", "n_paths", "eps_snap", "n_grid", "hausdorff_depth", "zeta", "delta"}},
  };
  return keys;
}

Coefficients parse_coefficients(const json& v, int d) {
  if (v.is_string()) {
    try {
      return coefficient_preset(v.get<std::string>(), d);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("model.coefficients: ") + e.what());
    }
  }
  only_keys(v, "model.coefficients", {"sigma", "b", "lipschitz", "rho0"});
  const json& s = need(v, "model.coefficients", "sigma");
  if (!s.is_array() || s.size() != static_cast<std::size_t>(d)) {
    throw ConfigError("model.coefficients.sigma: expected " + std::to_string(d) + " rows");
  }
  std::vector<std::vector<std::string>> sigma;
  for (const auto& row : s) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d)) {
      throw ConfigError("model.coefficients.sigma: each row needs " + std::to_string(d) + " expressions");
    }
    sigma.emplace_back();
    for (const auto& e : row) {
      if (!e.is_string()) throw ConfigError("model.coefficients.sigma: entries must be expression strings");
      sigma.back().push_back(e.get<std::string>());
    }
  }
  std::vector<std::string> b(static_cast<std::size_t>(d), "0");
  if (v.contains("b")) {
    if (!v["b"].is_array() || v["b"].size() != static_cast<std::size_t>(d)) {
      throw ConfigError("model.coefficients.b: expected " + std::to_string(d) + " expressions");
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!v["b"][i].is_string()) throw ConfigError("model.coefficients.b: entries must be expression strings");
      b[i] = v["b"][i].get<std::string>();
    }
  }
  const double lip = v.contains("lipschitz") ? get_number(v["lipschitz"], "model.coefficients.lipschitz") : 1.0;
  const double rho0 = v.contains("rho0") ? get_number(v["rho0"], "model.coefficients.rho0") : 1.0;
  if (!(lip > 0)) throw ConfigError("model.coefficients.lipschitz: must be > 0");
  if (!(rho0 > 0)) throw ConfigError("model.coefficients.rho0: must be > 0");
  return coefficients_from_expressions(sigma, b, lip, rho0);
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"calibrate", "simulate",  "moments", "capacity",
                                              "hausdorff", "hitprob", "exponents", "report"};
  return names;
}

RunConfig RunConfig::from_json(const json& doc) {
  only_keys(doc, "config", {"model", "grid", "experiment", "seed", "output_dir", "workers"});
  RunConfig cfg;
  cfg.document = doc;
  cfg.document.erase("workers");

  if (doc.contains("workers")) {
    const int w = get_int(doc["workers"], "workers");
    if (w < 0) throw ConfigError("workers: must be >= 0 (0 = all cores)");
    cfg.workers = static_cast<unsigned>(w);
  }
  const json& seed = need(doc, "config", "seed");
  if (!seed.is_number_integer()) throw ConfigError("seed: expected a 64-bit integer");
  cfg.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>() : static_cast<std::uint64_t>(seed.get<std::int64_t>());

  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ConfigError("output_dir: expected a path string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  } else if (const char* root = std::getenv("RIESZWAVE_OUTPUT_ROOT"); root && *root) {
    cfg.output_dir = root;
  } else {
    cfg.output_dir = "rieszwave_runs";
  }

  if (doc.contains("model")) {
    const json& m = doc["model"];
    only_keys(m, "model", {"k", "d", "beta", "coefficients", "noise", "enable_drift"});
    ModelSpec model;
    model.params.k = get_int(need(m, "model", "k"), "model.k");
    model.params.beta = get_number(need(m, "model", "beta"), "model.beta");
    model.d = m.contains("d") ? get_int(m["d"], "model.d") : 1;
    if (model.params.k < 1 || model.params.k > 3) throw ConfigError("model.k: must be 1, 2 or 3");
    if (model.d < 1) throw ConfigError("model.d: must be >= 1");
    const double upper = std::min(2.0, static_cast<double>(model.params.k));
    if (!(model.params.beta > 0 && model.params.beta <= upper && model.params.beta < 2)) {
      std::ostringstream msg;
      msg << "model.beta: beta = " << model.params.beta << " violates (C1): need 0 < beta <= min(2, k) = " << upper
          << " and beta < 2";
      throw ConfigError(msg.str());
    }
    model.coeffs = parse_coefficients(m.contains("coefficients") ? m["coefficients"] : json("identity-additive"), model.d);
    if (m.contains("noise")) {
      const std::string n = m["noise"].is_string() ? m["noise"].get<std::string>() : "";
      if (n == "C1") {
        model.noise = NoiseHypothesis::C1;
      } else if (n == "C1'") {
        model.noise = NoiseHypothesis::C1Prime;
      } else {
        throw ConfigError("model.noise: must be \"C1\" or \"C1'\"");
      }
    }
    if (m.contains("enable_drift")) {
      if (!m["enable_drift"].is_boolean()) throw ConfigError("model.enable_drift: expected true or false");
      cfg.enable_drift = m["enable_drift"].get<bool>();
    }
    if (model.coeffs.d != model.d) throw ConfigError("model.coefficients: size differs from model.d");
    cfg.model = std::move(model);
  }

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    only_keys(g, "grid", {"L", "n_space", "dt", "n_time"});
    GridSpec grid;
    grid.L = get_number(need(g, "grid", "L"), "grid.L");
    grid.n_space = get_int(need(g, "grid", "n_space"), "grid.n_space");
    grid.dt = get_number(need(g, "grid", "dt"), "grid.dt");
    grid.n_time = get_int(need(g, "grid", "n_time"), "grid.n_time");
    grid.k = cfg.model ? cfg.model->params.k : 1;
    try {
      grid.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
    cfg.grid = grid;
  }

  if (doc.contains("experiment")) {
    const json& e = doc["experiment"];
    if (!e.is_object()) throw ConfigError("experiment: expected an object keyed by subcommand");
    for (const auto& [sub, block] : e.items()) {
      const auto it = experiment_keys().find(sub);
      if (it == experiment_keys().end()) throw ConfigError("experiment: unknown subcommand block '" + sub + "'");
      if (!block.is_object()) throw ConfigError("experiment." + sub + ": expected an object");
      for (const auto& [key, _] : block.items()) {
        if (!it->second.count(key)) throw ConfigError("experiment." + sub + ": unknown key '" + key + "'");
      }
    }
    cfg.experiment = e;
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + file.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::string RunConfig::run_id(const std::string& subcommand) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  mix(canonical());
  mix("\n");
  mix(subcommand);
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

json RunConfig::experiment_for(const std::string& subcommand) const {
  if (experiment.contains(subcommand)) return experiment[subcommand];
  return json::object();
}

const ModelSpec& RunConfig::require_model(bool exponents_only) const {
  if (!model) throw ConfigError("model: block is required for this subcommand");
  if (!exponents_only) {
    try {
      model->params.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("model.beta: ") + e.what());
    }
  }
  return *model;
}

const GridSpec& RunConfig::require_grid() const {
  if (!grid) throw ConfigError("grid: block is required for this subcommand");
  return *grid;
}

}  // namespace rieszwave
