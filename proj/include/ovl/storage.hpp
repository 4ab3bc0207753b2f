#pragma once

#include "ovl/pathgen.hpp"

#include <vector>

namespace ovl {

// Horizon multiplier used by the experiments. kappa = 8 leaves a (1+kappa)^-1/2
// share of the stable overload mass beyond the horizon; 4096 leaves 1.6%.
inline constexpr double kCalibratedKappa = 4096.0;

struct StorageSeries {
    std::vector<double> evalTimes;
    std::vector<double> Y;
    double horizon = 0.0;
    std::size_t gridPoints = 0;  // candidate points on the path
};

// T_h = kappa (u/c)^(1/gamma)
double horizonRule(double u, double gamma, double c, double kappa);

// Y(t) = sup over s in [t, t + horizon] of X(s) - X(t) - c (s-t)^gamma.
// Grid paths: s runs over grid points and every eval time must be a grid
// time. Jump paths: s runs over jump times, left limits before jumps, the
// horizon end and interior stationary points of drift minus service.
StorageSeries storageValues(const SamplePath& path, double c, double gamma, const std::vector<double>& evalTimes,
                            double horizon);

// Grid core on contiguous arrays: Y at indices 0..evalCount-1 using the
// points within the horizon. O(n + evalCount) when gamma == 1.
void storageOnGrid(const double* x, const double* t, std::size_t n, std::size_t evalCount, double c, double gamma,
                   double horizon, double* Y);

} // namespace ovl
