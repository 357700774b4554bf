#include <bisurv/errors.hpp>
#include <bisurv/km.hpp>
#include <doctest.h>

#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bisurv;

namespace {
StepFunction km(std::vector<double> t, std::vector<int> s) { return km_estimate(t, s); }
StepFunction ckm(std::vector<double> t, std::vector<int> s) { return censoring_km(t, s); }
}  // namespace

TEST_SUITE("km") {
  TEST_CASE("all events at 1, 2, 3") {
    const auto s = km({1, 2, 3}, {1, 1, 1});
    CHECK(s(0.5) == 1.0);
    CHECK(s(1) == doctest::Approx(2.0 / 3.0));
    CHECK(s(2) == doctest::Approx(1.0 / 3.0));
    CHECK(s(3) == 0.0);
  }

  TEST_CASE("no events gives a flat curve") {
    const auto s = km({1, 2, 3}, {0, 0, 0});
    for (double t : {0.0, 1.0, 2.5, 10.0}) CHECK(s(t) == 1.0);
  }

  TEST_CASE("censoring in the middle") {
    const auto s = km({1, 2, 3}, {1, 0, 1});
    CHECK(s(1) == doctest::Approx(2.0 / 3.0));
    CHECK(s(2.5) == doctest::Approx(2.0 / 3.0));
    CHECK(s(3) == 0.0);
  }

  TEST_CASE("empty input and mismatched lengths fail") {
    CHECK_THROWS_AS(km({}, {}), InsufficientDataError);
    CHECK_THROWS(km({1, 2}, {1}));
    CHECK_THROWS(km({1, -2}, {1, 1}));
    CHECK_THROWS(km({1, 2}, {1, 3}));
  }

  TEST_CASE("censoring KM") {
    const auto all_events = ckm({1, 2, 3}, {1, 1, 1});
    for (double t : {0.0, 1.0, 3.0}) CHECK(all_events(t) == 1.0);
    const auto g = ckm({1, 2}, {1, 0});
    CHECK(g(1.5) == 1.0);
    CHECK(g(2) == 0.0);
    // on censoring-only data the censoring KM is the event KM of the complement
    const auto direct = ckm({1, 2, 3}, {0, 0, 0});
    const auto complement = km({1, 2, 3}, {1, 1, 1});
    for (double t : {0.5, 1.0, 2.0, 3.0}) CHECK(direct(t) == complement(t));
  }

  TEST_CASE("tied event and censoring: event leaves the risk set first") {
    // at t=1: one event, one censoring, risk 3
    const auto s = km({1, 1, 2}, {1, 0, 1});
    CHECK(s(1) == doctest::Approx(2.0 / 3.0));
    const auto g = ckm({1, 1, 2}, {1, 0, 1});
    CHECK(g(1) == doctest::Approx(0.5));  // censoring risk set excludes the event
  }

  TEST_CASE("pooled KM") {
    // group 0 never fails, group 1 fails at t=1: Ybar(1)=2n, dN(1)=n
    std::vector<SubjectRecord> recs;
    for (int j = 0; j < 5; ++j) {
      recs.push_back({0, 1, 2.0, 0});
      recs.push_back({1, 1, 1.0, 1});
    }
    const TrialDataset ds(recs);
    const auto p = pooled_km(ds);
    CHECK(p.survival(1.0) == doctest::Approx(0.5));
    CHECK(p.censoring(1.5) == 1.0);

    const auto same = fixture::trial({{0, 1, 1.0, 1}, {0, 0, 2.0, 0}, {1, 1, 1.0, 1}, {1, 0, 2.0, 0}});
    const auto s = pooled_km(same).survival;
    const auto s0 = group_km(same, 0);
    for (double t : {0.5, 1.0, 2.0}) CHECK(s(t) == s0(t));
  }

  TEST_CASE("responders KM") {
    const auto ds = fixture::trial({{0, 1, 2.0, 1}, {0, 0, 1.0, 1}, {0, 1, 4.0, 1}, {0, 0, 3.0, 0},
                                    {1, 0, 1.0, 1}, {1, 0, 2.0, 0}});
    const auto sx = responders_km(ds, 0);
    CHECK(sx(2.0) == doctest::Approx(0.5));
    CHECK(sx(4.0) == 0.0);
    CHECK_THROWS_AS(responders_km(ds, 1), InsufficientDataError);

    const auto all = fixture::trial({{0, 1, 2.0, 1}, {0, 1, 1.0, 1}, {1, 1, 1.0, 1}, {1, 1, 2.0, 0}});
    const auto a = responders_km(all, 1);
    const auto b = group_km(all, 1);
    for (double t : {0.5, 1.0, 2.0}) CHECK(a(t) == b(t));
  }

  TEST_CASE("risk table") {
    const auto ds = fixture::trial({{0, 0, 1.0, 1}, {0, 0, 2.0, 0}, {1, 0, 1.0, 1}, {1, 0, 3.0, 1}});
    const auto rt = risk_table(ds);
    REQUIRE(rt.times.size() == 2);
    CHECK(rt.at_risk[0] == 4);
    CHECK(rt.events[0] == 2);
    CHECK(rt.at_risk[1] == 1);
    CHECK(rt.group_at_risk[1][1] == 1);
    CHECK(at_risk(ds, -1, 2.0) == 2);
    CHECK(at_risk(ds, 0, 2.0) == 1);
  }

  TEST_CASE("properties on random samples") {
    std::mt19937_64 gen(11);
    std::exponential_distribution<double> ex(1.0);
    std::bernoulli_distribution coin(0.6);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> t(40);
      std::vector<int> s(40);
      std::vector<oracle::Obs> obs;
      for (std::size_t j = 0; j < t.size(); ++j) {
        t[j] = std::round(ex(gen) * 20.0) / 20.0 + 0.05;  // ties on purpose
        s[j] = coin(gen);
        obs.push_back({t[j], s[j]});
      }
      const auto f = km(t, s);
      CHECK(f.initial_value() == 1.0);
      double prev = 1.0;
      for (double v : f.values()) {
        CHECK(v <= prev);
        CHECK(v >= 0.0);
        prev = v;
      }
      // jump at an event time u equals S(u-) dN(u)/Y(u)
      for (double u : f.breakpoints()) {
        double y = 0, d = 0;
        for (const auto& o : obs) {
          y += o.time >= u;
          d += o.time == u && o.status;
        }
        CHECK(-f.jump(u) == doctest::Approx(f.left_limit(u) * d / y).epsilon(1e-12));
      }
      for (double u : oracle::distinct_times(obs)) {
        CHECK(f(u) == oracle::product_limit_at(obs, u, false));
        CHECK(ckm(t, s)(u) == oracle::product_limit_at(obs, u, true));
      }
    }
  }

  TEST_CASE("uncensored KM equals the empirical survival fraction") {
    const std::vector<double> t{0.3, 0.9, 0.9, 1.4, 2.2, 2.2, 2.2, 5.0};
    const auto f = km(t, std::vector<int>(t.size(), 1));
    for (double u : {0.1, 0.3, 0.9, 1.0, 2.2, 4.0, 5.0}) {
      double above = 0;
      for (double x : t) above += x > u;
      CHECK(f(u) == doctest::Approx(above / t.size()).epsilon(1e-14));
    }
  }
}
