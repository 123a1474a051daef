// Acceptance suite driver: one pass/fail line per criterion, nonzero exit
// when any criterion fails.

#include <cstdio>

#include "stablewalk/verify.hpp"

int main() {
  const auto results = stablewalk::run_acceptance();
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %-24s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
    for (const auto& line : r.detail) std::printf("       %s\n", line.c_str());
    std::fflush(stdout);
    all = all && r.pass;
  }
  std::printf("%s\n", all ? "acceptance: all criteria passed"
                          : "acceptance: FAILURES PRESENT (see lines above)");
  return all ? 0 : 1;
}
