#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughtail/experiment.hpp"

using namespace roughtail;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "roughtail_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("parse_config fills documented defaults") {
  const ExperimentConfig cfg = parse_config(R"({"hurst": 0.35, "alpha": 0.9})");
  CHECK(cfg.grid_level == 10);
  CHECK(cfg.n_samples == 100000);
  CHECK(cfg.seed == 42);
  CHECK(cfg.lambda_grid.size() == 11);
  CHECK(cfg.const_lambda_grid.size() == 8);
  CHECK(cfg.sweep_lambdas.size() == 10);
  CHECK(cfg.nondeg_r == doctest::Approx(3.14159265358979).epsilon(1e-12));
}

TEST_CASE("parse_config is strict") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"hurst": 0.35, "hurst": 0.4})"),
                       doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"hirst": 0.35})"), doctest::Contains("unknown"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"phi": {"kind": "sin"}})"), doctest::Contains("unknown"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"hurst": "big"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"hurst": 1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"phi": {"type": "tanh"}})"), ConfigError);
}

TEST_CASE("subcommand validation names the failing constraint") {
  ExperimentConfig cfg = parse_config(R"({"hurst": 0.6, "alpha": 0.9})");
  CHECK_THROWS_WITH_AS(validate_for_subcommand("scaling-sweep", cfg),
                       doctest::Contains("(1/4,1/2)"), ConfigError);

  cfg = parse_config(R"({"hurst": 0.35, "alpha": 0.8})");
  CHECK_THROWS_WITH_AS(validate_for_subcommand("scaling-sweep", cfg),
                       doctest::Contains("alpha must exceed H + 1/2"), ConfigError);

  cfg = parse_config(R"({"hurst": 0.35, "alpha": 0.9})");
  CHECK_NOTHROW(validate_for_subcommand("full-report", cfg));
  CHECK_THROWS_AS(validate_for_subcommand("frobnicate", ExperimentConfig{}), ConfigError);
}

TEST_CASE("config hash ignores execution-only fields") {
  ExperimentConfig a = parse_config(R"({"hurst": 0.35, "alpha": 0.9})");
  ExperimentConfig b = a;
  b.threads = 8;
  b.output_dir = "/elsewhere";
  CHECK(a.config_hash() == b.config_hash());
  b.seed = 43;
  CHECK(a.config_hash() != b.config_hash());
}

TEST_CASE("emit_report flags flip with the tolerances") {
  ExperimentConfig cfg;
  nlohmann::json r;
  r["gamma_hat"] = 1.6;
  r["gamma_stderr"] = 0.05;
  r["slope_scaling"] = 0.36;
  r["slope_scaling_target"] = 1.0 / 3.0;

  nlohmann::json rep = emit_report({r}, cfg);
  CHECK(rep["flags"]["gamma_direction_ok"] == true);
  CHECK(rep["flags"]["scaling_slope_ok"] == true);

  cfg.tolerances.scaling_slope_rel_tol = 0.01;  // tighter than the achieved error
  rep = emit_report({r}, cfg);
  CHECK(rep["flags"]["scaling_slope_ok"] == false);
  CHECK(rep["pass"] == false);

  CHECK_THROWS_AS(emit_report({}, cfg), ConfigError);
}

TEST_CASE("cond-var artifacts are byte-identical across worker counts") {
  const std::string base = R"({
    "hurst": 0.35, "alpha": 0.9, "grid_level": 6,
    "n_samples": 1500, "cond_var_m_levels": [4], "cond_var_y_level": 8,
    "cond_var_samples": 1500
  })";
  ExperimentConfig cfg = parse_config(base);

  std::string first;
  int idx = 0;
  for (int threads : {1, 4}) {
    cfg.threads = threads;
    cfg.output_dir = fresh_dir("det" + std::to_string(idx++)).string();
    run("cond-var", cfg);
    const std::string body = slurp(cfg.output_dir + "/cond_var.csv");
    if (first.empty()) {
      first = body;
    } else {
      CHECK(body == first);
    }
  }
}

TEST_CASE("sample-fbm writes provenance-stamped CSV") {
  ExperimentConfig cfg = parse_config(R"({"hurst": 0.35, "alpha": 0.9, "grid_level": 4})");
  cfg.output_dir = fresh_dir("paths").string();
  const RunArtifacts art = run("sample-fbm", cfg);
  REQUIRE_FALSE(art.files.empty());
  const std::string body = slurp(cfg.output_dir + "/fbm_paths.csv");
  CHECK(body.rfind("# seed=42 version=", 0) == 0);
  CHECK(body.find("path_id,time,value") != std::string::npos);
  CHECK(body.find("config_hash=" + cfg.config_hash()) != std::string::npos);
}
