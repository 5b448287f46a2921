#pragma once

#include <span>

namespace mtrl {

struct MannWhitneyResult {
  double u = 0.0;  // U statistic for xs
  double p = 0.0;  // two-sided
};

// Two-sided Mann-Whitney U test with midrank ties. Small samples (either
// side below 8) use exact enumeration over rank assignments; larger samples
// use the normal approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney_u(std::span<const double> xs, std::span<const double> ys);

double mean(std::span<const double> xs);
// Standard error of the mean; zero for a single observation.
double standard_error(std::span<const double> xs);

}  // namespace mtrl
