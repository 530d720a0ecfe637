// Command-line front end.  Uses the C interface only.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error, 3 runtime failure.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlfd/nlfd.h"

namespace {

enum Exit { ok = 0, check_failed = 1, config_error = 2, runtime_error = 3 };

int exit_for(nlfd_status s) {
  switch (s) {
    case NLFD_OK:
      return ok;
    case NLFD_CONFIG_ERROR:
    case NLFD_INVALID_ARGUMENT:
    case NLFD_NO_BARENBLATT:
    case NLFD_NOT_APPLICABLE:
      return config_error;
    default:
      return runtime_error;
  }
}

int report_failure(const char* what, nlfd_status s) {
  std::fprintf(stderr, "%s: %s: %s\n", what, nlfd_status_string(s), nlfd_last_error());
  return exit_for(s);
}

struct RunArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  long long seed = -1;
};

int cmd_run(const RunArgs& a) {
  nlfd_scenario* sc = nullptr;
  nlfd_status s = nlfd_scenario_load(a.config.c_str(), &sc);
  if (s != NLFD_OK) return report_failure("load", s);
  for (const auto& o : a.overrides) {
    if ((s = nlfd_scenario_set(sc, o.c_str())) != NLFD_OK) {
      nlfd_scenario_free(sc);
      return report_failure("--set", s);
    }
  }
  if (!a.out.empty()) nlfd_scenario_set_output(sc, a.out.c_str());
  if (a.seed >= 0) nlfd_scenario_set_seed(sc, static_cast<uint64_t>(a.seed));
  if ((s = nlfd_scenario_validate(sc)) != NLFD_OK) {
    nlfd_scenario_free(sc);
    return report_failure("config", s);
  }
  nlfd_report* rep = nullptr;
  s = nlfd_scenario_run(sc, &rep);
  nlfd_scenario_free(sc);
  if (s != NLFD_OK) return report_failure("run", s);

  std::printf("%-28s %-15s %s\n", "check", "status", "message");
  const size_t n = nlfd_report_count(rep);
  for (size_t i = 0; i < n; ++i) {
    const char* name = nullptr;
    const char* message = nullptr;
    nlfd_check_status st{};
    nlfd_report_record(rep, i, &name, &st, &message);
    const char* label = st == NLFD_CHECK_PASS   ? "pass"
                        : st == NLFD_CHECK_FAIL ? "FAIL"
                                                : "not_applicable";
    std::printf("%-28s %-15s %s\n", name, label, message);
  }
  const bool passed = nlfd_report_all_passed(rep);
  std::printf("%zu checks, %s\n", n, passed ? "all passed" : "some failed");
  nlfd_report_free(rep);
  return passed ? ok : check_failed;
}

struct BarenblattArgs {
  double M = 1.0;
  double m = 0.75;
  double sigma = 1.0;
  int N = 1;
  double L = 50.0;
  int points = 2048;
  std::string out = "out";
};

int cmd_barenblatt(const BarenblattArgs& a) {
  std::error_code ec;
  std::filesystem::create_directories(a.out, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create '%s': %s\n", a.out.c_str(), ec.message().c_str());
    return runtime_error;
  }
  const std::string path = (std::filesystem::path(a.out) / "profile.csv").string();
  double mass = 0.0;
  const nlfd_status s =
      nlfd_barenblatt(a.M, a.m, a.sigma, a.N, a.L, a.points, path.c_str(), &mass);
  if (s != NLFD_OK) return report_failure("barenblatt", s);
  std::printf("profile written to %s (mass %.6g including the tail beyond the box)\n", path.c_str(), mass);
  return ok;
}

void print_criterion(int id, const char* name, int passed, const char* summary, double seconds,
                     void*) {
  std::printf("[%s] criterion %2d %-40s %7.1fs  %s\n", passed ? "PASS" : "FAIL", id, name,
              seconds, summary);
  std::fflush(stdout);
}

int cmd_suite(const std::string& name, const std::string& out, long long seed) {
  int all = 0;
  const nlfd_status s =
      nlfd_suite_run(name.c_str(), seed >= 0 ? static_cast<uint64_t>(seed) : 20240601,
                     out.empty() ? nullptr : out.c_str(), &print_criterion, nullptr, &all);
  if (s != NLFD_OK) return report_failure("suite", s);
  return all ? ok : check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal fast diffusion solver and diagnostics"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "solve a scenario and run its checks");
  run_cmd->add_option("--config", run.config, "scenario JSON file")->required();
  run_cmd->add_option("--set", run.overrides, "dotted override KEY=VALUE (repeatable)");
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_option("--seed", run.seed, "random seed");
  run_cmd->add_option("--threads", threads, "worker threads");

  BarenblattArgs bb;
  auto* bb_cmd = app.add_subcommand("barenblatt", "compute a self-similar profile");
  bb_cmd->add_option("--mass,-M", bb.M, "mass")->check(CLI::PositiveNumber);
  bb_cmd->add_option("--m", bb.m, "nonlinearity exponent");
  bb_cmd->add_option("--sigma", bb.sigma, "operator order");
  bb_cmd->add_option("--dim,-N", bb.N, "space dimension");
  bb_cmd->add_option("--half-width", bb.L, "box half width");
  bb_cmd->add_option("--points", bb.points, "points per axis");
  bb_cmd->add_option("--out", bb.out, "output directory");
  bb_cmd->add_option("--threads", threads, "worker threads");

  std::string suite_name;
  std::string suite_out;
  long long suite_seed = -1;
  auto* suite_cmd = app.add_subcommand("suite", "run a predefined criteria suite");
  suite_cmd->add_option("name", suite_name, "acceptance or quick")->required();
  suite_cmd->add_option("--out", suite_out, "output directory");
  suite_cmd->add_option("--seed", suite_seed, "random seed");
  suite_cmd->add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }
  nlfd_set_threads(threads);

  if (*run_cmd) return cmd_run(run);
  if (*bb_cmd) return cmd_barenblatt(bb);
  return cmd_suite(suite_name, suite_out, suite_seed);
}
