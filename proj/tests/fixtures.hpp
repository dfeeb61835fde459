#pragma once

#include "rhwz/fuchs.hpp"

namespace fixture {

using rhwz::cd;

// Rank 2, three points {0, 1, inf}; weights sum to 2 so N = diag(-1,-1).
inline rhwz::WeightSystem rank2_n3() {
  return rhwz::build_weight_system({cd(0, 0), cd(1, 0)}, {{0.1, 0.5}, {0.2, 0.6}, {0.1, 0.5}}, -2);
}

// Rank 2, four points {-1, 0, 1, inf}; weights sum to 2.
inline rhwz::WeightSystem rank2_n4() {
  return rhwz::build_weight_system({cd(-1, 0), cd(0, 0), cd(1, 0)},
                                   {{0.1, 0.4}, {0.12, 0.38}, {0.08, 0.42}, {0.1, 0.4}}, -2);
}

// Rank 1, three points.
inline rhwz::WeightSystem rank1_n3() {
  return rhwz::build_weight_system({cd(0, 0), cd(1, 0)}, {{0.3}, {0.45}, {0.25}}, -1);
}

// Rank 2, three points; the infinity weights are the most spread, so the
// extrapolation exponent 0.5 comes from infinity and dominates the delta tail.
inline rhwz::WeightSystem rank2_n3_wide() {
  return rhwz::build_weight_system({cd(0, 0), cd(1, 0)}, {{0.05, 0.5}, {0.05, 0.55}, {0.05, 0.8}}, -2);
}

// Rank 1 with three finite points and a nonzero abelian action.
inline rhwz::WeightSystem rank1_n4() {
  return rhwz::build_weight_system({cd(-1, 0), cd(0, 0), cd(1.5, 0)}, {{0.3}, {0.2}, {0.25}, {0.25}}, -1);
}

}  // namespace fixture
