#include "bisurv/copula.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bisurv/errors.hpp"
#include "bisurv/lstat.hpp"

namespace bisurv {

std::pair<double, double> frank_pair(double theta, double u, double w) {
  if (theta == 0.0) throw ConfigError("Frank copula needs theta != 0 (use 0.001 for independence)");
  // v = -(1/theta) log(1 + w (e^-theta - 1) / (w + (1 - w) e^(-theta u)))
  const double num = w * std::expm1(-theta);
  const double den = w + (1.0 - w) * std::exp(-theta * u);
  const double v = -std::log1p(num / den) / theta;
  return {u, std::clamp(v, 0.0, 1.0)};
}

void Scenario::check() const {
  if (!(a > 0.0 && b > 0.0)) throw ConfigError("Weibull shape and scale must be > 0");
  if (b1 && !(*b1 > 0.0)) throw ConfigError("arm-1 Weibull scale must be > 0");
  if (c && !(*c > 0.0)) throw ConfigError("censoring bound c must be > 0");
  if (!(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0))
    throw ConfigError("response probabilities must lie in (0, 1)");
  if (theta == 0.0) throw ConfigError("theta must be nonzero (use 0.001 for independence)");
  if (n_per_arm < 2) throw ConfigError("need at least 2 subjects per arm");
  cfg.check();
}

ReplicateRng::ReplicateRng(std::uint64_t seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(replicate >> 32), 0x9e3779b9u};
  engine_.seed(seq);
}

double ReplicateRng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

TrialDataset gen_trial(const Scenario& sc, ReplicateRng& rng) {
  std::vector<SubjectRecord> recs;
  recs.reserve(2 * sc.n_per_arm);
  for (int g = 0; g < 2; ++g) {
    const double p = sc.p(g);
    const double scale = sc.scale(g);
    for (std::size_t j = 0; j < sc.n_per_arm; ++j) {
      const double u = rng.uniform();
      const double w = rng.uniform();
      const double v = std::max(frank_pair(sc.theta, u, w).second, 0x1.0p-60);
      const double t = scale * std::pow(-std::log(v), 1.0 / sc.a);
      SubjectRecord r;
      r.group = g;
      r.binary = u <= p ? 1 : 0;
      if (sc.c) {
        const double cens = *sc.c * rng.uniform();
        r.time = std::min(t, cens);
        r.status = t <= cens ? 1 : 0;
      } else {
        r.time = t;
        r.status = 1;
      }
      recs.push_back(r);
    }
  }
  return TrialDataset(std::move(recs));
}

namespace {

struct ReplicateOutcome {
  bool ok = false;
  double p_pooled = 1.0;
  double p_unpooled = 1.0;
  std::string reason;
};

SizeEstimate summarize(VarianceMode mode, std::size_t n_reps, std::size_t used, std::size_t rejections) {
  SizeEstimate s;
  s.mode = mode;
  s.n_reps = n_reps;
  s.used = used;
  s.excluded = n_reps - used;
  s.rejections = rejections;
  s.size = used ? static_cast<double>(rejections) / static_cast<double>(used) : 0.0;
  s.mc_se = used ? std::sqrt(s.size * (1.0 - s.size) / static_cast<double>(used)) : 0.0;
  return s;
}

}  // namespace

ScenarioRun run_scenario(const Scenario& sc, std::size_t n_reps, double alpha, unsigned threads) {
  sc.check();
  if (n_reps == 0) throw ConfigError("number of replicates must be positive");
  const std::function<ReplicateOutcome(std::size_t)> one = [&](std::size_t r) {
    ReplicateOutcome out;
    try {
      ReplicateRng rng(sc.seed, r);
      const auto ds = gen_trial(sc, rng);
      const auto res = l_statistic_both(ds, sc.cfg);
      out.p_pooled = res[0].p_value;
      out.p_unpooled = res[1].p_value;
      out.ok = true;
    } catch (const Error& e) {
      out.reason = e.what();
    }
    return out;
  };
  const auto outcomes = map_replicates(n_reps, threads, one);

  ScenarioRun run;
  std::size_t used = 0;
  std::size_t rej_p = 0;
  std::size_t rej_u = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const auto& o = outcomes[r];
    if (!o.ok) {
      run.exclusions.push_back("replicate " + std::to_string(r) + ": " + o.reason);
      continue;
    }
    ++used;
    rej_p += o.p_pooled < alpha;
    rej_u += o.p_unpooled < alpha;
  }
  run.pooled = summarize(VarianceMode::pooled, n_reps, used, rej_p);
  run.unpooled = summarize(VarianceMode::unpooled, n_reps, used, rej_u);
  if (static_cast<double>(n_reps - used) > 0.05 * static_cast<double>(n_reps)) {
    std::ostringstream msg;
    msg << "scenario '" << sc.id << "': " << (n_reps - used) << " of " << n_reps
        << " replicates excluded (limit 5%)";
    if (!run.exclusions.empty()) msg << "; first: " << run.exclusions.front();
    throw SimulationError(msg.str());
  }
  return run;
}

SizeEstimate empirical_size(const Scenario& sc, std::size_t n_reps, double alpha, unsigned threads) {
  const auto run = run_scenario(sc, n_reps, alpha, threads);
  return sc.cfg.variance_mode == VarianceMode::pooled ? run.pooled : run.unpooled;
}

std::vector<Scenario> size_study_grid(GridScale scale, std::uint64_t seed) {
  struct Weights {
    double rho, gamma, eta;
  };
  // (rho, gamma, eta) triples reported in the size table
  const Weights weights[] = {{0, 1, 0}, {1, 1, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  const double thetas[] = {0.001, 2.0, 3.0};
  const double shapes[] = {0.5, 1.0, 2.0};
  const double p0s[] = {0.2, 0.4};
  const double cs[] = {1.0, 3.0};
  const double taubs[] = {0.5, 1.0};
  std::vector<Scenario> grid;
  std::uint64_t cell = 0;
  for (double theta : thetas)
    for (double a : shapes)
      for (double p0 : p0s)
        for (double c : cs)
          for (double tau_b : taubs)
            for (const auto& w : weights) {
              Scenario sc;
              std::ostringstream id;
              id << "theta=" << theta << ",a=" << a << ",p0=" << p0 << ",c=" << c
                 << ",taub=" << tau_b << ",rho=" << w.rho << ",gam=" << w.gamma << ",eta=" << w.eta;
              sc.id = id.str();
              sc.theta = theta;
              sc.a = a;
              sc.b = 1.0;
              sc.p0 = sc.p1 = p0;
              sc.c = c;
              sc.n_per_arm = scale == GridScale::desk ? 500 : 1000;
              sc.cfg.tau0 = 0.0;
              sc.cfg.tau_b = tau_b;
              sc.cfg.tau = 1.0;
              sc.cfg.weight.rho = w.rho;
              sc.cfg.weight.gamma = w.gamma;
              sc.cfg.weight.eta = w.eta;
              sc.seed = seed + 7919 * cell++;
              grid.push_back(std::move(sc));
            }
  return grid;
}

std::size_t default_reps(GridScale scale) { return scale == GridScale::desk ? 2000 : 1000; }

}  // namespace bisurv
