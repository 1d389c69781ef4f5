// Runs every acceptance criterion and prints one PASS/FAIL/SKIP line each.
// Exit status is non-zero when any criterion fails.

#include <cstring>
#include <iostream>

#include "spinprobe/acceptance.hpp"

int main(int argc, char** argv) {
  spinprobe::acceptance::Options opt;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--skip-slow") == 0) {
      opt.skip_slow = true;
    } else {
      opt.only.push_back(std::atoi(argv[i]));
    }
  }
  const auto results = spinprobe::acceptance::run_all(opt, std::cout, &std::cerr);
  return spinprobe::acceptance::all_passed(results) ? 0 : 1;
}
