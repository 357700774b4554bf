#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bisurv/dataset.hpp"

namespace bisurv {

/// Kernel estimate of the responder event hazard
/// lambda_XT(t) = lim P(X = 1, t <= T < t + dt | T > t) / dt on a grid.
struct HazardEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
  std::optional<std::string> warning;

  /// Linear interpolation on the grid; 0 outside it.
  double at(double t) const;
  /// Trapezoidal integral over the grid.
  double integral() const;
};

struct HazardOptions {
  std::optional<double> bandwidth;  // default (hi - lo) / 8
  std::size_t grid_points = 101;
};

/// Epanechnikov kernel 0.75 (1 - z^2) on |z| <= 1.
double epanechnikov(double z);

/// Boundary Epanechnikov kernel for a point at distance q*b (0 <= q < 1) from
/// an edge, supported on [-1, q] with z measured away from the edge into the
/// data. Integrates to 1 with zero first moment; equals epanechnikov at q = 1.
double boundary_epanechnikov(double z, double q);

/// lambda(t) = (1/b) sum_k K((t - u_k)/b) dN_X(u_k) / Ybar(u_k) over responder
/// events u_k of `group` inside [lo, hi]; boundary kernels within b of either
/// edge, negative values clipped to 0. A bandwidth above half the window is
/// shrunk to half the window and flagged in `warning`.
HazardEstimate hazard_xt(const TrialDataset& ds, int group, double lo, double hi,
                         const HazardOptions& opts = {});

}  // namespace bisurv
