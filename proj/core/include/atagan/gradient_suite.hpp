#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "atagan/grad_check.hpp"

namespace atagan {

inline constexpr double kSuiteEps = 1e-5;
inline constexpr double kSuiteTol = 1e-4;
inline constexpr std::size_t kSuiteSeeds = 20;

/// One finite-difference check over randomized inputs drawn from `seed`.
struct GradientCase {
  std::string name;
  std::function<GradCheckReport(std::uint64_t seed)> run;
};

/// Every differentiable op (non-scalar outputs are reduced against a random
/// weight tensor) and the full teacher, discriminator and generator losses.
const std::vector<GradientCase>& gradient_cases();

struct GradientCaseResult {
  std::string name;
  std::size_t seeds = 0;
  std::size_t checked = 0;
  double max_error = 0;
  bool passed = true;
  std::string worst;  // "seed s: ..." of the worst element
};

struct GradientSuiteResult {
  std::vector<GradientCaseResult> cases;
  bool passed = true;
};

/// Runs each case for seeds 1..`seeds`; `on_case` sees each result as it
/// completes.
GradientSuiteResult run_gradient_suite(
    std::size_t seeds = kSuiteSeeds,
    const std::function<void(const GradientCaseResult&)>& on_case = {});

}  // namespace atagan
