#include "bisurv/kernel_hazard.hpp"

#include <algorithm>
#include <cmath>

#include "bisurv/errors.hpp"

namespace bisurv {

double epanechnikov(double z) { return std::abs(z) <= 1.0 ? 0.75 * (1.0 - z * z) : 0.0; }

double boundary_epanechnikov(double z, double q) {
  if (q >= 1.0) return epanechnikov(z);
  if (z < -1.0 || z > q) return 0.0;
  const double c = 12.0 / std::pow(1.0 + q, 4);
  return c * (z + 1.0) * (z * (1.0 - 2.0 * q) + 0.5 * (3.0 * q * q - 2.0 * q + 1.0));
}

double HazardEstimate::at(double t) const {
  if (grid.empty() || t < grid.front() || t > grid.back()) return 0.0;
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  if (it == grid.end()) return values.back();
  const std::size_t k = static_cast<std::size_t>(it - grid.begin());
  const double w = (t - grid[k - 1]) / (grid[k] - grid[k - 1]);
  return (1.0 - w) * values[k - 1] + w * values[k];
}

double HazardEstimate::integral() const {
  double sum = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    sum += 0.5 * (values[k] + values[k - 1]) * (grid[k] - grid[k - 1]);
  return sum;
}

HazardEstimate hazard_xt(const TrialDataset& ds, int group, double lo, double hi,
                         const HazardOptions& opts) {
  if (!(hi > lo)) throw ConfigError("hazard window must satisfy lo < hi");
  if (opts.grid_points < 2) throw ConfigError("hazard grid needs at least 2 points");
  const double width = hi - lo;
  HazardEstimate est;
  est.bandwidth = opts.bandwidth.value_or(width / 8.0);
  if (!(est.bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  if (est.bandwidth > 0.5 * width) {
    est.warning = "bandwidth " + std::to_string(est.bandwidth) + " exceeds half the window; using " +
                  std::to_string(0.5 * width);
    est.bandwidth = 0.5 * width;
  }
  const double b = est.bandwidth;

  // responder event increments dN_X(u) / Ybar(u) within the window
  std::vector<double> ev_time;
  std::vector<double> ev_mass;
  const auto recs = ds.records();
  std::size_t remaining = ds.n(group);
  std::size_t k = 0;
  while (k < recs.size()) {
    const double t = recs[k].time;
    std::size_t dx = 0;
    std::size_t gone = 0;
    for (; k < recs.size() && recs[k].time == t; ++k) {
      if (recs[k].group != group) continue;
      ++gone;
      if (recs[k].status == 1 && recs[k].binary == 1) ++dx;
    }
    if (dx > 0 && t >= lo && t <= hi) {
      ev_time.push_back(t);
      ev_mass.push_back(static_cast<double>(dx) / static_cast<double>(remaining));
    }
    remaining -= gone;
  }

  const std::size_t m = opts.grid_points;
  est.grid.resize(m);
  est.values.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    est.grid[i] = i + 1 == m ? hi : lo + width * static_cast<double>(i) / static_cast<double>(m - 1);

  for (std::size_t i = 0; i < m; ++i) {
    const double t = est.grid[i];
    const double q_left = (t - lo) / b;
    const double q_right = (hi - t) / b;
    auto first = std::lower_bound(ev_time.begin(), ev_time.end(), t - b);
    double sum = 0.0;
    for (auto it = first; it != ev_time.end() && *it <= t + b; ++it) {
      const double u = *it;
      const double mass = ev_mass[static_cast<std::size_t>(it - ev_time.begin())];
      double kern;
      if (q_left < 1.0)
        kern = boundary_epanechnikov((t - u) / b, q_left);
      else if (q_right < 1.0)
        kern = boundary_epanechnikov((u - t) / b, q_right);
      else
        kern = epanechnikov((t - u) / b);
      sum += kern * mass;
    }
    est.values[i] = std::max(0.0, sum / b);
  }
  return est;
}

}  // namespace bisurv
