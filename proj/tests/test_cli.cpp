#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "rieszwave/run_config.hpp"

using namespace rieszwave;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path workdir() {
  static const fs::path p = [] {
    fs::path d = fs::temp_directory_path() / "rieszwave_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Result run(const json& config, const std::string& args, const std::string& name, const std::string& env = "") {
  const char* exe = std::getenv("RIESZWAVE_CLI");
  REQUIRE(exe != nullptr);
  const fs::path cfg = workdir() / (name + ".json");
  std::ofstream(cfg) << config.dump(2);
  const fs::path out = workdir() / (name + ".out"), err = workdir() / (name + ".err");
  const std::string cmd = env + " \"" + std::string(exe) + "\" --config \"" + cfg.string() + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

json exponents_config(double beta) {
  return {{"model", {{"k", 1}, {"d", 5}, {"beta", beta}}},
          {"seed", 1},
          {"output_dir", (workdir() / "runs").string()}};
}

fs::path run_dir_of(const Result& r) {
  const auto pos = r.out.rfind(' ');
  std::string p = r.out.substr(pos + 1);
  while (!p.empty() && (p.back() == '\n' || p.back() == '\r')) p.pop_back();
  return p;
}

}  // namespace

TEST_CASE("exponents reports the polarity") {
  const auto r = run(exponents_config(1.0), "exponents", "exp");
  REQUIRE(r.code == 0);
  const fs::path dir = run_dir_of(r);
  const auto j = json::parse(slurp(dir / "exponents.json"));
  CHECK(j["polarity"] == "Polar");
  CHECK(fs::exists(dir / "manifest.json"));
  const auto m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["subcommand"] == "exponents");
  CHECK(m["run_id"] == dir.filename().string());

  const auto again = run(exponents_config(1.0), "exponents", "exp_again");
  CHECK(again.code == 0);
  CHECK(again.out.find("cached") != std::string::npos);
  const auto forced = run(exponents_config(1.0), "exponents --force", "exp_force");
  CHECK(forced.code == 0);
  CHECK(forced.out.find("done") != std::string::npos);
}

TEST_CASE("invalid beta is a configuration error naming the hypothesis") {
  const auto r = run(exponents_config(2.5), "exponents", "bad_beta");
  CHECK(r.code == 2);
  CHECK(r.err.find("(C1)") != std::string::npos);
  auto cfg = exponents_config(1.0);
  cfg["grid"] = {{"L", 1.0}, {"n_space", 32}, {"dt", 1.0 / 32}, {"n_time", 4}};
  cfg["experiment"] = {{"simulate", {{"n_paths", 2}}}};
  const auto sim = run(cfg, "simulate", "bad_sim_beta");
  CHECK(sim.code == 2);
  CHECK(sim.err.find("(C1)") != std::string::npos);
}

TEST_CASE("unknown keys and bad arguments") {
  auto cfg = exponents_config(1.0);
  cfg["model"]["colour"] = "blue";
  CHECK(run(cfg, "exponents", "unknown_key").code == 2);
  CHECK(run(exponents_config(1.0), "frobnicate", "bad_sub").code == 2);
}

TEST_CASE("run ids ignore key order and worker counts") {
  const auto a = RunConfig::from_json(json::parse(R"({"seed": 3, "workers": 1, "model": {"k": 1, "beta": 0.5}})"));
  const auto b = RunConfig::from_json(json::parse(R"({"model": {"beta": 0.5, "k": 1}, "workers": 4, "seed": 3})"));
  CHECK(a.run_id("capacity") == b.run_id("capacity"));
  CHECK(a.run_id("capacity") != a.run_id("hausdorff"));
  CHECK(a.run_id("capacity").size() == 16);
}

TEST_CASE("results do not depend on the worker count") {
  json cfg = {{"model", {{"k", 1}, {"beta", 0.5}}},
              {"grid", {{"L", 1.0}, {"n_space", 64}, {"dt", 1.0 / 64}, {"n_time", 32}}},
              {"experiment", {{"moments", {{"time_index", 32}, {"lags", {1, 2, 4, 8}}, {"n_paths", 40}}}}},
              {"seed", 12}};
  const auto one = run(cfg, "moments --workers 1", "w1", "RIESZWAVE_OUTPUT_ROOT=" + (workdir() / "w1").string());
  const auto three = run(cfg, "moments --workers 3", "w3", "RIESZWAVE_OUTPUT_ROOT=" + (workdir() / "w3").string());
  REQUIRE(one.code == 0);
  REQUIRE(three.code == 0);
  const fs::path d1 = run_dir_of(one), d3 = run_dir_of(three);
  CHECK(d1.filename() == d3.filename());
  CHECK(slurp(d1 / "moments.csv") == slurp(d3 / "moments.csv"));
  CHECK(slurp(d1 / "holder.json") == slurp(d3 / "holder.json"));
}

TEST_CASE("capacity, convergence failure and a held lock") {
  json cfg = {{"experiment",
               {{"capacity",
                 {{"target", {{"dim", 1}, {"primitives", {{{"type", "box"}, {"min", {0.0}}, {"max", {1.0}}}}}}},
                  {"gamma", 0.5},
                  {"n_grid", 100}}}}},
              {"seed", 1},
              {"output_dir", (workdir() / "cap").string()}};
  const auto ok = run(cfg, "capacity", "cap_ok");
  REQUIRE(ok.code == 0);
  const auto j = json::parse(slurp(run_dir_of(ok) / "capacity.json"));
  CHECK(j["estimate"].get<double>() > 0.375);

  json stiff = cfg;
  stiff["experiment"]["capacity"]["tol"] = 1e-12;
  stiff["experiment"]["capacity"]["max_iterations"] = 3;
  const auto conv = run(stiff, "capacity", "cap_conv");
  CHECK(conv.code == 3);
  CHECK(conv.err.find("partial estimate") != std::string::npos);

  json locked = cfg;
  locked["experiment"]["capacity"]["gamma"] = 0.25;
  const auto id = RunConfig::from_json(locked).run_id("capacity");
  fs::create_directories(workdir() / "cap" / id);
  std::ofstream(workdir() / "cap" / id / ".lock") << "held";
  const auto busy = run(locked, "capacity", "cap_locked");
  CHECK(busy.code == 1);
  CHECK(busy.err.find("lock") != std::string::npos);
}
