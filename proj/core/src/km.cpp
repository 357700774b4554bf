#include "bisurv/km.hpp"

#include <algorithm>
#include <numeric>

#include "bisurv/errors.hpp"

namespace bisurv {

namespace detail {

StepFunction product_limit(std::span<const Observation> sorted, bool censoring) {
  if (sorted.empty()) throw InsufficientDataError("product-limit estimator needs at least one observation");
  std::vector<double> br;
  std::vector<double> v;
  double s = 1.0;
  std::size_t remaining = sorted.size();
  std::size_t k = 0;
  while (k < sorted.size()) {
    const double t = sorted[k].time;
    std::size_t d = 0;
    std::size_t c = 0;
    for (; k < sorted.size() && sorted[k].time == t; ++k) (sorted[k].event ? d : c)++;
    const std::size_t jumps = censoring ? c : d;
    const std::size_t risk = censoring ? remaining - d : remaining;
    if (jumps > 0) {
      s *= 1.0 - static_cast<double>(jumps) / static_cast<double>(risk);
      br.push_back(t);
      v.push_back(s);
    }
    remaining -= d + c;
  }
  return StepFunction(std::move(br), std::move(v), 1.0);
}

}  // namespace detail

namespace {

std::vector<detail::Observation> sorted_observations(std::span<const double> times,
                                                     std::span<const int> status) {
  if (times.size() != status.size())
    throw std::invalid_argument("times and status differ in length");
  std::vector<detail::Observation> obs(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("observed times must be > 0");
    if (status[i] != 0 && status[i] != 1) throw std::invalid_argument("status must be 0 or 1");
    obs[i] = {times[i], status[i] == 1};
  }
  std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  return obs;
}

template <class Pred>
std::vector<detail::Observation> select(const TrialDataset& ds, Pred keep) {
  std::vector<detail::Observation> obs;
  obs.reserve(ds.n_total());
  for (const auto& r : ds.records())
    if (keep(r)) obs.push_back({r.time, r.status == 1});
  return obs;
}

}  // namespace

StepFunction km_estimate(std::span<const double> times, std::span<const int> status) {
  return detail::product_limit(sorted_observations(times, status), false);
}

StepFunction censoring_km(std::span<const double> times, std::span<const int> status) {
  return detail::product_limit(sorted_observations(times, status), true);
}

PooledKm pooled_km(const TrialDataset& ds) {
  const auto obs = select(ds, [](const SubjectRecord&) { return true; });
  return {detail::product_limit(obs, false), detail::product_limit(obs, true)};
}

StepFunction group_km(const TrialDataset& ds, int group) {
  return detail::product_limit(select(ds, [group](const auto& r) { return r.group == group; }), false);
}

StepFunction group_censoring_km(const TrialDataset& ds, int group) {
  return detail::product_limit(select(ds, [group](const auto& r) { return r.group == group; }), true);
}

StepFunction responders_km(const TrialDataset& ds, int group) {
  const auto obs = select(ds, [group](const auto& r) { return r.group == group && r.binary == 1; });
  if (obs.empty())
    throw InsufficientDataError("arm " + std::to_string(group) + " has no responders");
  return detail::product_limit(obs, false);
}

RiskTable risk_table(const TrialDataset& ds) {
  RiskTable rt;
  const auto recs = ds.records();
  std::array<std::size_t, 2> remaining{ds.n(0), ds.n(1)};
  std::size_t k = 0;
  while (k < recs.size()) {
    const double t = recs[k].time;
    std::array<std::size_t, 2> d{};
    std::array<std::size_t, 2> gone{};
    for (; k < recs.size() && recs[k].time == t; ++k) {
      const auto g = static_cast<std::size_t>(recs[k].group);
      d[g] += static_cast<std::size_t>(recs[k].status);
      ++gone[g];
    }
    if (d[0] + d[1] > 0) {
      rt.times.push_back(t);
      rt.at_risk.push_back(remaining[0] + remaining[1]);
      rt.events.push_back(d[0] + d[1]);
      for (std::size_t g = 0; g < 2; ++g) {
        rt.group_at_risk[g].push_back(remaining[g]);
        rt.group_events[g].push_back(d[g]);
      }
    }
    remaining[0] -= gone[0];
    remaining[1] -= gone[1];
  }
  return rt;
}

std::size_t at_risk(const TrialDataset& ds, int group, double t) {
  const auto recs = ds.records();
  auto it = std::lower_bound(recs.begin(), recs.end(), t,
                             [](const SubjectRecord& r, double x) { return r.time < x; });
  if (group < 0) return static_cast<std::size_t>(recs.end() - it);
  return static_cast<std::size_t>(
      std::count_if(it, recs.end(), [group](const auto& r) { return r.group == group; }));
}

}  // namespace bisurv
