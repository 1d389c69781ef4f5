// acceptance.hpp: the numbered cross-checks run by `spinprobe verify` and the
// acceptance test binary.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spinprobe::acceptance {

enum class Status { Pass, Fail, Skip };

const char* to_string(Status s);

struct CriterionResult {
  int id{0};
  std::string title;
  Status status{Status::Fail};
  std::string detail;
  double seconds{0.0};
};

struct Options {
  std::vector<int> only;  // empty: all
  bool skip_slow{false};  // skips the paper-scale part of criterion 4
};

constexpr int kCriteria = 12;

std::string title(int id);

/// Runs one criterion; exceptions become a Fail with the message as detail.
CriterionResult run_criterion(int id, const Options& opt = {}, std::ostream* log = nullptr);

/// Runs the selected criteria and prints one PASS/FAIL/SKIP line each to `out`.
std::vector<CriterionResult> run_all(const Options& opt, std::ostream& out, std::ostream* log = nullptr);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace spinprobe::acceptance
