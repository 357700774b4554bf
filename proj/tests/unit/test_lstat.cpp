#include <bisurv/copula.hpp>
#include <bisurv/errors.hpp>
#include <bisurv/lstat.hpp>
#include <bisurv/weights.hpp>
#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bisurv;

namespace {

TrialDataset proportions(std::size_t n0, std::size_t r0, std::size_t n1, std::size_t r1) {
  std::vector<SubjectRecord> recs;
  for (std::size_t j = 0; j < n0; ++j) recs.push_back({0, j < r0 ? 1 : 0, 1.0 + 0.01 * j, 1});
  for (std::size_t j = 0; j < n1; ++j) recs.push_back({1, j < r1 ? 1 : 0, 1.0 + 0.01 * j, 1});
  return TrialDataset(recs);
}

Scenario null_cell(double theta, std::size_t n) {
  Scenario sc;
  sc.theta = theta;
  sc.a = 1.0;
  sc.b = 1.0;
  sc.p0 = sc.p1 = 0.3;
  sc.c = 3.0;
  sc.n_per_arm = n;
  sc.cfg.tau_b = 0.5;
  sc.cfg.tau = 1.0;
  return sc;
}

std::vector<oracle::Obs> arm_obs(const TrialDataset& ds, int g, bool responders_only = false) {
  std::vector<oracle::Obs> out;
  for (const auto& r : ds.records())
    if ((g < 0 || r.group == g) && (!responders_only || r.binary)) out.push_back({r.time, r.status});
  return out;
}

TrialDataset random_small(std::mt19937_64& gen, std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> size(2, max_n / 2);
  std::uniform_int_distribution<int> lattice(1, 1200);
  std::bernoulli_distribution coin(0.5);
  std::vector<SubjectRecord> recs;
  for (int g = 0; g < 2; ++g) {
    const std::size_t n = size(gen);
    for (std::size_t j = 0; j < n; ++j)
      recs.push_back({g, coin(gen) ? 1 : 0, lattice(gen) / 1000.0, coin(gen) || j == 0 ? 1 : 0});
  }
  return TrialDataset(recs);
}

}  // namespace

TEST_SUITE("lstat") {
  TEST_CASE("binary statistic") {
    const auto ds = proportions(100, 20, 100, 30);
    const auto b = u_binary(ds, 1.0);
    CHECK(b.u_b == doctest::Approx(std::sqrt(50.0) * 0.1).epsilon(1e-12));
    CHECK(b.u_b == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(u_binary(ds.relabeled(), 1.0).u_b == doctest::Approx(-b.u_b));
    CHECK(u_binary(proportions(10, 3, 20, 6), 1.0).u_b == 0.0);
  }

  TEST_CASE("binary variance") {
    const auto ds = proportions(2, 0, 2, 1);  // pooled p = 0.25
    CHECK(sigma_b_sq_hat(ds, 1.0, VarianceMode::pooled) == doctest::Approx(0.1875));
    const auto eq = proportions(50, 10, 50, 10);
    CHECK(sigma_b_sq_hat(eq, 1.0, VarianceMode::unpooled) ==
          doctest::Approx(sigma_b_sq_hat(eq, 1.0, VarianceMode::pooled)).epsilon(1e-14));
    CHECK_THROWS_AS(sigma_b_sq_hat(proportions(3, 0, 3, 0), 1.0, VarianceMode::pooled), DegenerateVariance);
  }

  TEST_CASE("bintest equals the two-proportion score statistic") {
    const auto ds = fixture::trial({{0, 0, 1.0, 1}, {0, 0, 2.0, 0}, {1, 1, 1.5, 1}, {1, 0, 3.0, 1}});
    StudyConfig cfg;
    const auto r = binary_test(ds, cfg);
    // p0 = 0, p1 = 1/2, pooled 1/4: 0.5 / sqrt(0.1875 * (1/2 + 1/2))
    CHECK(r.z == doctest::Approx(0.5 / std::sqrt(0.1875)).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.5 * std::erfc(r.z / std::sqrt(2.0))));
  }

  TEST_CASE("survival statistic with a constant KM gap") {
    std::vector<SubjectRecord> recs;
    for (int j = 0; j < 50; ++j) {
      recs.push_back({0, 0, j < 5 ? 0.005 : 2.0, j < 5 ? 1 : 0});
      recs.push_back({1, 0, 2.0, 0});
    }
    const TrialDataset ds(recs);
    // S1 - S0 = 0.1 on [0.005, 1.005]
    CHECK(u_survival(ds, 0.005, 1.005, StepFunction(1.0)) == doctest::Approx(0.5).epsilon(1e-12));
    const auto same = fixture::trial({{0, 1, 1.0, 1}, {0, 0, 2.0, 0}, {1, 1, 1.0, 1}, {1, 0, 2.0, 0}});
    CHECK(u_survival(same, 0.0, 3.0, StepFunction(1.0)) == 0.0);
  }

  TEST_CASE("survival statistic and K against Riemann sums") {
    std::mt19937_64 gen(5);
    for (int rep = 0; rep < 10; ++rep) {
      const auto ds = random_small(gen, 30);
      WeightSpec spec;
      spec.rho = 1.0;
      spec.gamma = 0.5;
      const auto q = build_q(ds, spec, 1.0);
      const auto o0 = arm_obs(ds, 0), o1 = arm_obs(ds, 1), op = arm_obs(ds, -1);
      const double scale = std::sqrt(double(ds.n(0)) * double(ds.n(1)) / double(ds.n_total()));
      const double ref = scale * oracle::riemann(
                                     [&](double t) {
                                       return q(t) * (oracle::product_limit_at(o1, t, false) -
                                                      oracle::product_limit_at(o0, t, false));
                                     },
                                     0.0, 1.0, 20000);
      // coarse grid: breakpoints sit on a 1e-3 lattice so midpoints never straddle
      CHECK(u_survival(ds, 0.0, 1.0, q) == doctest::Approx(ref).epsilon(1e-9).scale(1.0));
      const auto s = pooled_km(ds).survival;
      const double kref = oracle::riemann(
          [&](double t) { return q(t) * oracle::product_limit_at(op, t, false); }, 0.25, 1.0, 15000);
      CHECK(k_hat(q, s, 0.25, 1.0) == doctest::Approx(kref).epsilon(1e-9).scale(1.0));
    }
  }

  TEST_CASE("K examples") {
    const StepFunction one(1.0);
    CHECK(k_hat(one, one, 1.0, 1.0) == 0.0);
    CHECK(k_hat(one, one, 2.0, 1.0) == 0.0);
    CHECK(k_hat(one, one, 0.25, 1.0) == doctest::Approx(0.75));
    const StepFunction s({0.5}, {0.4}, 1.0);
    CHECK(k_hat(one, s, 0.25, 1.0) == doctest::Approx(0.25 * 1.0 + 0.5 * 0.4));
  }

  TEST_CASE("survival variance") {
    // no events in the window
    const auto late = fixture::trial({{0, 1, 2.0, 1}, {0, 0, 3.0, 0}, {1, 1, 2.5, 1}, {1, 0, 3.5, 1}});
    CHECK(sigma_s_sq_hat(late, 0.0, 1.0, StepFunction(1.0), VarianceMode::pooled) == 0.0);

    // uncensored balanced data: the censoring factor is 1
    std::mt19937_64 gen(8);
    std::exponential_distribution<double> ex(1.0);
    std::vector<SubjectRecord> recs;
    for (int g = 0; g < 2; ++g)
      for (int j = 0; j < 12; ++j) recs.push_back({g, j % 2, std::round(ex(gen) * 1000.0) / 1000.0 + 0.001, 1});
    const TrialDataset ds(recs);
    const auto op = arm_obs(ds, -1);
    const double tau = 1.2;
    double ref = 0.0;
    for (double u : oracle::distinct_times(op)) {
      if (u > tau) break;
      const double su = oracle::product_limit_at(op, u, false);
      const double sb = oracle::product_limit_at(op, u - 1e-9, false);
      if (su == 0.0) continue;
      const double k = oracle::piecewise_integral(
          [&](double t) { return oracle::product_limit_at(op, t, false); }, oracle::distinct_times(op), u, tau);
      ref -= k * k / (su * sb) * (su - sb);
    }
    CHECK(sigma_s_sq_hat(ds, 0.0, tau, StepFunction(1.0), VarianceMode::pooled) ==
          doctest::Approx(ref).epsilon(1e-12));
  }

  TEST_CASE("compensated covariance against a direct count oracle") {
    std::mt19937_64 gen(21);
    for (int rep = 0; rep < 10; ++rep) {
      const auto ds = random_small(gen, 24);
      StudyConfig cfg;
      cfg.tau_b = 0.6;
      cfg.tau = 1.0;
      const StepFunction q(1.0);
      const auto op = arm_obs(ds, -1);
      double ref = 0.0;
      for (double u : oracle::distinct_times(op)) {
        if (u > cfg.tau) break;
        double y = 0, yx = 0, d = 0, dx = 0;
        for (const auto& r : ds.records()) {
          if (r.time < u) continue;
          y += 1;
          yx += r.binary;
          if (r.time == u) {
            d += r.status;
            dx += r.status * r.binary;
          }
        }
        if (d == 0) continue;
        const double k = oracle::piecewise_integral(
            [&](double t) { return oracle::product_limit_at(op, t, false); }, oracle::distinct_times(op), u, cfg.tau);
        ref -= k * (dx - yx / y * d) / y;
      }
      CHECK(sigma_bs_hat(ds, cfg, q, VarianceMode::pooled) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    }
  }

  TEST_CASE("covariance is 0 without events; marginal form with tau_b <= tau0 skips the kernel term") {
    const auto late = fixture::trial({{0, 1, 2.0, 1}, {0, 0, 3.0, 0}, {1, 1, 2.5, 1}, {1, 0, 3.5, 1}});
    StudyConfig cfg;
    cfg.tau_b = 0.5;
    for (auto form : {CovarianceForm::compensated, CovarianceForm::marginal}) {
      cfg.covariance = form;
      CHECK(sigma_bs_hat(late, cfg, StepFunction(1.0), VarianceMode::pooled) == 0.0);
      CHECK(sigma_bs_hat(late, cfg, StepFunction(1.0), VarianceMode::unpooled) == 0.0);
    }
    cfg.tau0 = 0.5;
    cfg.tau_b = 0.4;
    const StudyEstimates est(late, cfg);
    CHECK_FALSE(est.hazards().has_value());
  }

  TEST_CASE("positive association gives positive covariance in most replicates") {
    auto sc = null_cell(3.0, 300);
    for (auto form : {CovarianceForm::compensated, CovarianceForm::marginal}) {
      sc.cfg.covariance = form;
      int positive = 0;
      for (int r = 0; r < 40; ++r) {
        ReplicateRng rng(99, r);
        const auto ds = gen_trial(sc, rng);
        positive += l_statistic(ds, sc.cfg).sigma_bs_hat > 0.0;
      }
      CHECK(positive > 20);
    }
  }

  TEST_CASE("result invariants and antisymmetry") {
    auto sc = null_cell(2.0, 200);
    sc.p1 = 0.4;
    sc.b1 = 1.3;
    ReplicateRng rng(4, 0);
    const auto ds = gen_trial(sc, rng);
    for (auto mode : {VarianceMode::pooled, VarianceMode::unpooled}) {
      auto cfg = sc.cfg;
      cfg.variance_mode = mode;
      const auto r = l_statistic(ds, cfg);
      CHECK(r.var_l == cfg.omega_b * cfg.omega_b + cfg.omega_s * cfg.omega_s +
                           2.0 * cfg.omega_b * cfg.omega_s * r.rho_hat);
      CHECK(r.z == r.l_stat / std::sqrt(r.var_l));
      CHECK(r.rho_hat >= -1.0);
      CHECK(r.rho_hat <= 1.0);
      CHECK(r.sigma_b_hat > 0.0);
      CHECK(r.sigma_s_hat > 0.0);
      CHECK(r.p_value > 0.0);
      CHECK(r.p_value < 1.0);
      CHECK(r.variance_mode == mode);
      CHECK(r.z > 0.0);  // arm 1 is better on both endpoints

      const auto f = l_statistic(ds.relabeled(), cfg);
      CHECK(f.u_b == doctest::Approx(-r.u_b).epsilon(1e-12));
      CHECK(f.u_s == doctest::Approx(-r.u_s).epsilon(1e-12));
      CHECK(f.l_stat == doctest::Approx(-r.l_stat).epsilon(1e-12));
      CHECK(f.var_l == doctest::Approx(r.var_l).epsilon(1e-12));
    }
  }

  TEST_CASE("time-scale invariance") {
    auto sc = null_cell(2.0, 150);
    sc.cfg.weight.rho = 1.0;
    sc.cfg.weight.eta = 1.0;
    ReplicateRng rng(6, 1);
    const auto ds = gen_trial(sc, rng);
    const double k = 3.5;
    auto scaled_cfg = sc.cfg;
    scaled_cfg.tau_b *= k;
    scaled_cfg.tau *= k;
    for (auto mode : {VarianceMode::pooled, VarianceMode::unpooled}) {
      sc.cfg.variance_mode = scaled_cfg.variance_mode = mode;
      const auto a = l_statistic(ds, sc.cfg);
      const auto b = l_statistic(ds.rescaled(k), scaled_cfg);
      CHECK(b.u_b == doctest::Approx(a.u_b).epsilon(1e-12));
      CHECK(b.sigma_b_hat == doctest::Approx(a.sigma_b_hat).epsilon(1e-12));
      CHECK(b.u_s == doctest::Approx(k * a.u_s).epsilon(1e-10));
      CHECK(b.sigma_s_hat == doctest::Approx(k * a.sigma_s_hat).epsilon(1e-10));
      CHECK(b.rho_hat == doctest::Approx(a.rho_hat).epsilon(1e-10));
      CHECK(b.z == doctest::Approx(a.z).epsilon(1e-10));
    }
  }

  TEST_CASE("small survival weight approaches the binary test; equal weights give the global sum") {
    auto sc = null_cell(2.0, 200);
    ReplicateRng rng(12, 0);
    const auto ds = gen_trial(sc, rng);
    auto cfg = sc.cfg;
    cfg.omega_s = 1e-6;
    cfg.omega_b = 1.0 - cfg.omega_s;
    const auto r = l_statistic(ds, cfg);
    CHECK(r.z == doctest::Approx(binary_test(ds, cfg).z).epsilon(1e-4));

    cfg.omega_b = cfg.omega_s = 0.5;
    cfg.tau_b = cfg.tau;
    const auto g = l_statistic(ds, cfg);
    const auto b = binary_test(ds, cfg);
    const auto s = survival_test(ds, cfg);
    CHECK(g.l_stat == doctest::Approx(0.5 * b.z + 0.5 * s.z).epsilon(1e-12));
  }

  TEST_CASE("survtest with zero exponents is the scaled restricted-mean difference") {
    auto sc = null_cell(0.001, 100);
    ReplicateRng rng(13, 0);
    const auto ds = gen_trial(sc, rng);
    const auto r = survival_test(ds, sc.cfg);
    const double scale = std::sqrt(double(ds.n(0)) * double(ds.n(1)) / double(ds.n_total()));
    const double rmst = bisurv::integrate(group_km(ds, 1), 0.0, 1.0) - bisurv::integrate(group_km(ds, 0), 0.0, 1.0);
    CHECK(r.statistic == doctest::Approx(scale * rmst).epsilon(1e-12));
  }

  TEST_CASE("identical arms give z = 0") {
    std::vector<SubjectRecord> recs;
    for (int g = 0; g < 2; ++g)
      for (int j = 0; j < 20; ++j) recs.push_back({g, j % 3 == 0, 0.05 * (j + 1), j % 4 != 0});
    const TrialDataset ds(recs);
    StudyConfig cfg;
    cfg.tau_b = 0.5;
    cfg.tau = 0.9;
    const auto r = l_statistic(ds, cfg);
    CHECK(r.z == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(r.p_value == doctest::Approx(0.5));
  }

  TEST_CASE("blocking validation and degenerate variances raise") {
    const auto dead = fixture::trial({{0, 1, 0.2, 1}, {0, 0, 0.4, 1}, {1, 1, 2.0, 0}, {1, 0, 3.0, 0}});
    StudyConfig cfg;
    CHECK_THROWS_AS(l_statistic(dead, cfg), AssumptionViolation);
    const auto late = fixture::trial({{0, 1, 2.0, 1}, {0, 0, 3.0, 0}, {1, 1, 2.5, 1}, {1, 0, 3.5, 1}});
    CHECK_THROWS_AS(l_statistic(late, cfg), DegenerateVariance);
    cfg.omega_b = 0.7;
    CHECK_THROWS_AS(l_statistic(late, cfg), ConfigError);
  }

  TEST_CASE("noncentrality") {
    StudyConfig cfg;
    cfg.omega_b = 0.3;
    cfg.omega_s = 0.7;
    NoncentralitySpec spec{0.0, [](double) { return 0.0; }, [](double) { return 1.0; }};
    CHECK(noncentrality(spec, cfg) == 0.0);
    spec.g = 2.0;
    spec.drift = [](double) { return 1.5; };
    CHECK(noncentrality(spec, cfg) == doctest::Approx(0.3 * 2.0 + 0.7 * 1.5).epsilon(1e-14));
    spec.drift = [](double) { return 1.0; };
    spec.q = [](double t) { return t; };
    CHECK(noncentrality(spec, cfg) == doctest::Approx(0.3 * 2.0 + 0.7 * 0.5).epsilon(1e-14));
    spec.drift = [](double t) { return t - 0.5; };
    CHECK_THROWS_AS(noncentrality(spec, cfg), ConfigError);
  }

  TEST_CASE("deterministic-weight overload agrees with the step version on a constant weight") {
    auto sc = null_cell(2.0, 100);
    ReplicateRng rng(2, 2);
    const auto ds = gen_trial(sc, rng);
    const double a = u_survival(ds, 0.0, 1.0, StepFunction(1.0));
    const double b = u_survival(ds, 0.0, 1.0, std::function<double(double)>([](double) { return 1.0; }));
    CHECK(b == doctest::Approx(a).epsilon(1e-13));
  }
}
