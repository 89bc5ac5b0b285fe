#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace idsnet {

struct GradcheckResult {
  std::string name;
  bool end_to_end = false;
  double max_error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return max_error < tolerance; }
};

inline constexpr double kLayerGradTolerance = 1e-6;
inline constexpr double kEndToEndGradTolerance = 1e-4;

// Double-precision gradient checks of every layer and primitive op on small
// random inputs, followed by each full architecture trained against random
// targets. End-to-end checks sample a subset of every parameter tensor.
std::vector<GradcheckResult> run_gradient_suite(std::uint64_t seed);

}  // namespace idsnet
