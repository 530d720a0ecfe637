#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlfd/nlfd.h"
#include "nlfd/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kConfig = R"({
  "grid": {"dim": 1, "half_width": 20, "points": 256},
  "initial": {"kind": "bump", "radius": 1, "height": 1},
  "solver": {"dt_initial": 1e-4, "dt_max": 0.02, "t_end": 0.2, "snapshot_times": [0.05, 0.1, 0.2]},
  "checks": ["mass_conservation", "monotonicity"]
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nlfd_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NLFD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("handles, apply and energy") {
  CHECK(std::string(nlfd_version()).size() > 0);
  nlfd_grid* g = nullptr;
  REQUIRE(nlfd_grid_create(1, 4.0, 64, NLFD_EXTERIOR_ZERO, &g) == NLFD_OK);
  CHECK(nlfd_grid_size(g) == 64);
  CHECK(nlfd_grid_spacing(g) == 0.125);
  nlfd_kernel* k = nullptr;
  REQUIRE(nlfd_kernel_create("fractional_power", 1, 1.0, 0.0, nullptr, &k) == NLFD_OK);
  const double x[1] = {0.0}, y[1] = {1.0};
  double j = 0.0;
  CHECK(nlfd_kernel_eval(k, x, y, &j) == NLFD_OK);
  CHECK(j == doctest::Approx(1.0 / M_PI));
  CHECK(nlfd_kernel_eval(k, x, x, &j) == NLFD_SINGULAR_POINT);

  nlfd_operator* op = nullptr;
  const nlfd_status assembled = nlfd_operator_assemble(g, k, 1, &op);
  INFO(std::string(nlfd_last_error()));
  REQUIRE(assembled == NLFD_OK);
  std::vector<double> f(64, 1.0), out(64);
  CHECK(nlfd_operator_apply(op, f.data(), out.data()) == NLFD_OK);
  double e = 0.0;
  CHECK(nlfd_operator_energy(op, f.data(), f.data(), &e) == NLFD_OK);
  double dot = 0.0;
  for (double v : out) dot += v;
  CHECK(e == doctest::Approx(dot).epsilon(1e-12));

  nlfd_nonlinearity* phi = nullptr;
  REQUIRE(nlfd_nonlinearity_create("pure_power", 0.5, 0.0, 0.0, &phi) == NLFD_OK);
  double w = 0.0;
  CHECK(nlfd_nonlinearity_phi(phi, 4.0, &w) == NLFD_OK);
  CHECK(w == doctest::Approx(2.0));

  std::vector<double> u0(64, 0.0);
  for (int i = 24; i < 40; ++i) u0[i] = 1.0;
  nlfd_field* field = nullptr;
  REQUIRE(nlfd_field_create(g, u0.data(), &field) == NLFD_OK);
  CHECK(nlfd_field_integral(field) == doctest::Approx(2.0));
  nlfd_solver_options so;
  nlfd_solver_options_default(&so);
  const double times[2] = {0.1, 0.2};
  so.t_end = 0.2;
  so.dt_max = 0.01;
  so.snapshot_times = times;
  so.snapshot_count = 2;
  nlfd_trajectory* tr = nullptr;
  REQUIRE(nlfd_solve(op, phi, field, &so, &tr) == NLFD_OK);
  CHECK(nlfd_trajectory_snapshot_count(tr) == 3);
  CHECK(nlfd_trajectory_snapshot_time(tr, 2) == 0.2);
  const nlfd_field* last = nlfd_trajectory_snapshot(tr, 2);
  CHECK(nlfd_field_integral(last) + nlfd_trajectory_leaked_mass(tr) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(nlfd_trajectory_extinction_time(tr) < 0.0);
  CHECK(nlfd_trajectory_partial(tr) == 0);
  CHECK(nlfd_trajectory_snapshot(tr, 9) == nullptr);

  nlfd_trajectory_free(tr);
  nlfd_field_free(field);
  nlfd_nonlinearity_free(phi);
  nlfd_operator_free(op);
  nlfd_kernel_free(k);
  nlfd_grid_free(g);
}

TEST_CASE("error reporting") {
  nlfd_grid* g = nullptr;
  CHECK(nlfd_grid_create(1, 1.0, 15, NLFD_EXTERIOR_ZERO, &g) == NLFD_INVALID_ARGUMENT);
  CHECK(g == nullptr);
  CHECK(std::string(nlfd_last_error()).size() > 0);
  nlfd_kernel* k = nullptr;
  CHECK(nlfd_kernel_create("bogus", 1, 1.0, 0.0, nullptr, &k) == NLFD_INVALID_ARGUMENT);
  CHECK(nlfd_barenblatt(1.0, 0.4, 0.5, 1, 50.0, 512, "/tmp/never.csv", nullptr) == NLFD_NO_BARENBLATT);
  CHECK(std::string(nlfd_last_error()).find("m_c") != std::string::npos);
  CHECK(nlfd_suite_run("nope", 1, nullptr, nullptr, nullptr, nullptr) == NLFD_INVALID_ARGUMENT);
  CHECK(std::string(nlfd_status_string(NLFD_CONFIG_ERROR)) == "config_error");
}

TEST_CASE("scenario lifecycle matches the library") {
  const fs::path dir = scratch("scenario");
  nlfd_scenario* sc = nullptr;
  REQUIRE(nlfd_scenario_from_json(kConfig, &sc) == NLFD_OK);
  CHECK(nlfd_scenario_set_output(sc, dir.string().c_str()) == NLFD_OK);
  CHECK(nlfd_scenario_set_seed(sc, 11) == NLFD_OK);
  CHECK(nlfd_scenario_set(sc, "grid.points=128") == NLFD_OK);
  CHECK(nlfd_scenario_validate(sc) == NLFD_OK);
  nlfd_report* rep = nullptr;
  REQUIRE(nlfd_scenario_run(sc, &rep) == NLFD_OK);
  CHECK(nlfd_report_count(rep) == 2);
  CHECK(nlfd_report_all_passed(rep) == 1);
  const char* name = nullptr;
  nlfd_check_status st{};
  CHECK(nlfd_report_record(rep, 0, &name, &st, nullptr) == NLFD_OK);
  CHECK(std::string(name) == "mass_conservation");
  CHECK(st == NLFD_CHECK_PASS);
  CHECK(nlfd_report_record(rep, 5, &name, &st, nullptr) == NLFD_INVALID_ARGUMENT);
  CHECK(fs::exists(dir / "manifest.json"));

  json doc = json::parse(kConfig);
  nlfd::apply_override(doc, "grid.points=128");
  doc["seed"] = 11;
  doc["output_dir"] = dir.string();
  const auto outcome = nlfd::run_scenario(nlfd::config_from_json(doc));
  CHECK(json::parse(nlfd_report_json(rep)) == nlfd::to_json(outcome.report));

  nlfd_report_free(rep);
  CHECK(nlfd_scenario_set(sc, "kernel.sigma=2.5") == NLFD_OK);
  CHECK(nlfd_scenario_validate(sc) == NLFD_CONFIG_ERROR);
  CHECK(std::string(nlfd_last_error()).find("kernel.sigma") != std::string::npos);
  nlfd_scenario_free(sc);
  CHECK(nlfd_scenario_load("/nonexistent/cfg.json", &sc) == NLFD_CONFIG_ERROR);
  fs::remove_all(dir);
}

TEST_CASE("barenblatt through the C interface") {
  const fs::path dir = scratch("profile");
  double mass = 0.0;
  CHECK(nlfd_barenblatt(2.0, 0.75, 1.0, 1, 50.0, 1024, (dir / "p.csv").string().c_str(), &mass) == NLFD_OK);
  CHECK(mass == doctest::Approx(2.0).epsilon(0.01));
  CHECK(fs::exists(dir / "p.csv"));
  fs::remove_all(dir);
}

TEST_CASE("command line exit codes and artifacts") {
  const fs::path dir = scratch("cli");
  {
    std::ofstream(dir / "ok.json") << kConfig;
    json tiny = json::parse(kConfig);
    tiny["grid"] = {{"half_width", 2}, {"points", 128}};
    tiny["initial"]["radius"] = 0.5;
    tiny["solver"] = {{"dt_initial", 1e-3}, {"dt_max", 0.05}, {"t_end", 1}, {"snapshot_times", {0.5, 1}}};
    tiny["checks"] = {"mass_conservation"};
    std::ofstream(dir / "tiny.json") << tiny.dump();
    std::ofstream(dir / "bad.json") << "{";
  }
  const std::string out = (dir / "out").string();
  CHECK(run_cli("run --config " + (dir / "ok.json").string() + " --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "mass.csv"));
  CHECK(run_cli("run --config " + (dir / "tiny.json").string() + " --out " + out + "_tiny") == 1);
  CHECK(run_cli("run --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("run --config " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("run --config " + (dir / "ok.json").string() + " --set kernel.sigma=2") == 2);
  CHECK(run_cli("run --config " + (dir / "ok.json").string() + " --set solver.dt_max=0.01 --seed 3 --threads 2 --out " +
                out + "_set") == 0);
  CHECK(run_cli("barenblatt --mass 1 --m 0.75 --sigma 1 --dim 1 --points 512 --out " + (dir / "bb").string()) == 0);
  CHECK(fs::exists(dir / "bb" / "profile.csv"));
  CHECK(run_cli("barenblatt --mass 1 --m 0.4 --sigma 0.5 --out " + (dir / "bb2").string()) == 2);
  CHECK(run_cli("suite nope") == 2);
  CHECK(run_cli("") == 2);
  fs::remove_all(dir);
}
