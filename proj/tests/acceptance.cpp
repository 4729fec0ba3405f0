// Runs every acceptance criterion at the full level and prints one line each.

#include <iostream>

#include "mechsq/validation.hpp"

int main() {
  using namespace mechsq::validation;
  int failed = 0;
  run_checks(Level::full, [&](const CheckResult& r) {
    std::cout << r.summary() << std::endl;
    if (!r.passed()) ++failed;
  });
  std::cout << (failed == 0 ? "acceptance: all criteria passed" : "acceptance: some criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
