// Prints one PASS/FAIL line per acceptance criterion. Arguments select a
// subset by id (e.g. `g2_acceptance A1 A5`). Exit status 1 if any fails.
#include <cstdio>
#include <exception>
#include <set>
#include <string>

#include "criteria.h"

int main(int argc, char** argv) {
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : g2::acceptance::AllCriteria()) {
    if (!only.empty() && !only.count(c.id)) continue;
    g2::acceptance::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %s: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
