#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "report.hpp"

namespace twostage::cli {

struct CheckResult {
  std::string suite;
  std::string check;
  bool pass = false;
  double value = 0.0;      // observed discrepancy or count
  double tolerance = 0.0;  // pass iff value <= tolerance
  std::string detail;
};

const std::vector<std::string>& check_suites();

/// Run one suite ("all" runs every suite in order).
std::vector<CheckResult> run_checks(const std::string& suite, std::size_t replicas, std::uint64_t seed,
                                    unsigned threads);

}  // namespace twostage::cli
