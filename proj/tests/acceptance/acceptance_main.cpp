// Prints one PASS/FAIL line per acceptance criterion. With arguments, runs
// only the listed criterion numbers.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "critcf/verify.hpp"

int main(int argc, char** argv) {
  const auto checks = critcf::verify::acceptance_checks();
  bool all_passed = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (argc > 1) {
      bool wanted = false;
      for (int a = 1; a < argc; ++a) wanted = wanted || std::atoi(argv[a]) == static_cast<int>(i + 1);
      if (!wanted) continue;
    }
    critcf::verify::CheckResult r;
    try {
      r = critcf::verify::run_check(checks[i]);
    } catch (const std::exception& e) {
      r.id = checks[i].id;
      r.title = checks[i].title;
      r.passed = false;
      r.details.push_back(std::string("FAIL  exception: ") + e.what());
    }
    std::printf("%s %s: %s (%.2f s)\n", r.passed ? "PASS" : "FAIL", r.id.c_str(), r.title.c_str(), r.seconds);
    for (const auto& line : r.details) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    all_passed = all_passed && r.passed;
  }
  return all_passed ? 0 : 1;
}
