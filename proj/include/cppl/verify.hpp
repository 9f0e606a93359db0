#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cppl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Quick self-check of the library against brute-force references on small
// random instances.
std::vector<CheckResult> run_verification(std::uint64_t seed);

}  // namespace cppl
