#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "bisurv/dataset.hpp"
#include "bisurv/step_function.hpp"

namespace bisurv {

/// Product-limit estimate S(t) = prod_{u <= t} (1 - d(u) / Y(u)).
/// Flat after the last observation. Throws InsufficientDataError on empty input.
StepFunction km_estimate(std::span<const double> times, std::span<const int> status);

/// Product-limit estimate of the censoring survival function. At a time with
/// both events and censorings the events leave the risk set first.
StepFunction censoring_km(std::span<const double> times, std::span<const int> status);

struct PooledKm {
  StepFunction survival;
  StepFunction censoring;
};

PooledKm pooled_km(const TrialDataset& ds);
StepFunction group_km(const TrialDataset& ds, int group);
StepFunction group_censoring_km(const TrialDataset& ds, int group);
/// KM of the responders (binary == 1) of one arm. Throws InsufficientDataError
/// if the arm has no responders.
StepFunction responders_km(const TrialDataset& ds, int group);

inline double left_limit(const StepFunction& f, double t) { return f.left_limit(t); }

/// Counts at the distinct event times of the pooled sample.
struct RiskTable {
  std::vector<double> times;
  std::vector<std::size_t> at_risk;
  std::vector<std::size_t> events;
  std::array<std::vector<std::size_t>, 2> group_at_risk;
  std::array<std::vector<std::size_t>, 2> group_events;
};

RiskTable risk_table(const TrialDataset& ds);

/// Number of subjects of `group` with observed time >= t (group < 0: both arms).
std::size_t at_risk(const TrialDataset& ds, int group, double t);

namespace detail {

struct Observation {
  double time;
  bool event;
};

/// Product-limit pass over observations sorted by time. With `censoring`
/// set, censorings are the jumps and tied events leave the risk set first.
StepFunction product_limit(std::span<const Observation> sorted, bool censoring);

}  // namespace detail

}  // namespace bisurv
