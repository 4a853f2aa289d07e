// Acceptance battery: one line per criterion. With arguments, runs only the
// listed criteria.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "sphvar/suite.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int id = 1; id <= sphvar::kCriterionCount; ++id) ids.push_back(id);
  const sphvar::SuiteConfig config;
  bool ok = true;
  for (int id : ids) {
    const auto r = sphvar::run_criterion(id, config);
    const bool pass = r.status == sphvar::CheckStatus::Pass;
    ok = ok && pass;
    std::printf("criterion %2d: %s  %s (%.1f s)\n", r.id, pass ? "PASS" : "FAIL", r.title.c_str(), r.seconds);
    for (const auto& c : r.checks) {
      if (c.pass && argc == 1) continue;
      std::printf("    %s %s: %.6g%s%s\n", c.pass ? "ok  " : "FAIL", c.name.c_str(), c.value,
                  c.note.empty() ? "" : "  -- ", c.note.c_str());
    }
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
