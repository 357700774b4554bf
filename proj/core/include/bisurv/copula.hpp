#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bisurv/config.hpp"
#include "bisurv/dataset.hpp"

namespace bisurv {

/// Draw the second coordinate of a Frank copula pair by inverting the
/// conditional distribution C(v | u) at w. Returns (u, v).
/// Throws ConfigError for theta == 0 (use 0.001 for near-independence).
std::pair<double, double> frank_pair(double theta, double u, double w);

/// One simulation cell: Frank(theta) coupling of a Bernoulli(p_i) response
/// with Weibull(a, b_i) survival, Uniform(0, c) censoring.
struct Scenario {
  std::string id;
  double theta = 0.001;
  double a = 1.0;                 // Weibull shape
  double b = 1.0;                 // Weibull scale, arm 0 (and arm 1 unless b1 set)
  std::optional<double> b1;       // arm-1 scale for alternatives
  double p0 = 0.2;
  double p1 = 0.2;
  std::optional<double> c;        // censoring upper bound; none = uncensored
  std::size_t n_per_arm = 500;
  StudyConfig cfg;
  std::uint64_t seed = 1;

  double scale(int group) const { return group == 1 && b1 ? *b1 : b; }
  double p(int group) const { return group == 1 ? p1 : p0; }
  void check() const;
};

/// Per-replicate random stream keyed by (seed, replicate index), so a
/// replicate draws the same numbers whatever thread or order runs it.
class ReplicateRng {
 public:
  ReplicateRng(std::uint64_t seed, std::uint64_t replicate);
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

 private:
  std::mt19937_64 engine_;
};

TrialDataset gen_trial(const Scenario& sc, ReplicateRng& rng);

struct SizeEstimate {
  VarianceMode mode = VarianceMode::pooled;
  std::size_t n_reps = 0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  std::size_t rejections = 0;
  double size = 0.0;
  double mc_se = 0.0;
};

struct ScenarioRun {
  SizeEstimate pooled;
  SizeEstimate unpooled;
  std::vector<std::string> exclusions;  // "replicate r: reason"
};

/// Runs `fn(r)` for r in [0, n) on `threads` workers; results in index order.
template <class T>
std::vector<T> map_replicates(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  if (threads <= 1 || n < 2) {
    for (std::size_t r = 0; r < n; ++r) out[r] = fn(r);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> pool;
  for (unsigned k = 0; k < threads; ++k)
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < n; r = next++) {
        try {
          out[r] = fn(r);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Simulates `n_reps` replicates and rejects when p < alpha, for both
/// variance modes on the same data. Replicates that fail validation or hit
/// an estimator error are excluded; more than 5% exclusions throws
/// SimulationError.
ScenarioRun run_scenario(const Scenario& sc, std::size_t n_reps, double alpha, unsigned threads = 1);

/// Empirical size for the scenario's configured variance mode.
SizeEstimate empirical_size(const Scenario& sc, std::size_t n_reps, double alpha, unsigned threads = 1);

enum class GridScale { desk, full };

/// Size-study grid: theta x shape a x p0 x c x (tau_b, tau) x weight triple.
/// Desk scale uses 500 subjects per arm; full scale 1000.
std::vector<Scenario> size_study_grid(GridScale scale, std::uint64_t seed = 20200101);
std::size_t default_reps(GridScale scale);

}  // namespace bisurv
