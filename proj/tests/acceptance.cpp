// Runs the validation battery and prints one verdict line per criterion.
// A criterion passes when all of its checks pass within its runtime budget.

#include <cstdio>
#include <iostream>

#include "wulffkit/io/battery.hpp"

int main(int argc, char** argv) {
  using namespace wulffkit::io;
  BatteryOptions opt;
  opt.jobs = detail::default_jobs();
  if (argc > 1) opt.seed = std::stoull(argv[1]);

  bool all = true;
  run_battery(opt, [&](const CriterionRun& r) {
    const bool in_time = r.seconds <= r.budget;
    const bool pass = r.result.pass() && in_time;
    all = all && pass;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.1f s of %.0f s", r.seconds, r.budget);
    std::cout << "criterion " << r.result.id << ": " << (pass ? "PASS" : "FAIL") << "  " << r.result.title << "  ("
              << timing << ")\n";
    for (const auto& c : r.result.checks)
      std::cout << "    " << (c.pass ? "ok    " : "FAILED") << " " << c.name << " = " << fmt(c.value) << "  [tol "
                << fmt(c.tolerance) << ", " << c.source << "]\n";
    if (!in_time) std::cout << "    FAILED runtime budget exceeded\n";
    std::cout.flush();
  });
  std::cout << (all ? "all criteria PASS\n" : "some criteria FAIL\n");
  return all ? 0 : 1;
}
