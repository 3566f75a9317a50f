#pragma once

#include <string>
#include <vector>

#include "tinfer/tensor.hpp"

namespace tinfer {

/// Feasibility regions for linear-form inference at a given signal-to-noise
/// ratio and sample size, ordered A < B < C < D < E:
///   A — below the statistical thresholds, inference impossible;
///   B — statistically feasible (oracle initialization with data splitting);
///   C — computationally feasible via leave-one-out initialization (m = 3);
///   D — any warm initialization works without data splitting
///       (sqrt(max dim) above the statistical thresholds);
///   E — computationally fast algorithms suffice (m >= 4).
enum class Region { kA = 0, kB = 1, kC = 2, kD = 3, kE = 4 };

char region_letter(Region r);

struct ThresholdCheck {
  std::string name;
  double snr_threshold = 0.0;
  double n_threshold = 0.0;
  double snr_ratio = 0.0;  // snr / threshold
  double n_ratio = 0.0;
  bool satisfied = false;
};

struct RegimeReport {
  Region region = Region::kA;
  std::vector<ThresholdCheck> thresholds;
  bool balanced = true;     // max/min dimension ratio <= 2
  double imbalance = 1.0;
};

/// Threshold comparison with unit constants in place of the asymptotic "much
/// greater than"; the report carries the raw ratios so margins stay visible.
RegimeReport classify_regime(double snr, double n, const Shape& shape);

}  // namespace tinfer
