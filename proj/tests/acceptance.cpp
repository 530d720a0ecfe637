// One line per acceptance criterion; exit status 0 only when every criterion passes.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "nlfd/suite.hpp"

int main(int argc, char** argv) {
  nlfd::SuiteOptions options;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--out=", 0) == 0) {
      options.output_dir = arg.substr(6);
    } else {
      options.only.push_back(std::atoi(argv[i]));
    }
  }
  options.on_result = [](const nlfd::CriterionResult& r) {
    std::printf("[%s] criterion %2d %-40s %7.1fs  %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds, r.summary.c_str());
    for (const auto& rec : r.records) {
      if (!rec.passed()) std::printf("         %s: %s\n", rec.name.c_str(), rec.message.c_str());
    }
    std::fflush(stdout);
  };
  const auto results = nlfd::run_suite("acceptance", options);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
