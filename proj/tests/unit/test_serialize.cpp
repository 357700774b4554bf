#include <bisurv/errors.hpp>
#include <bisurv/serialize.hpp>
#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"

using namespace bisurv;
using nlohmann::json;

TEST_SUITE("serialize") {
  TEST_CASE("config round trip") {
    StudyConfig cfg;
    cfg.tau0 = 0.1;
    cfg.tau_b = 0.5;
    cfg.tau = 2.0;
    cfg.omega_b = 0.3;
    cfg.omega_s = 0.7;
    cfg.weight.rho = 1;
    cfg.weight.gamma = 0.5;
    cfg.weight.eta = 2;
    cfg.weight.piecewise_a = 0.25;
    cfg.weight.use_vc = true;
    cfg.variance_mode = VarianceMode::unpooled;
    cfg.covariance = CovarianceForm::marginal;
    cfg.bandwidth = 0.05;
    const auto back = study_config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
    CHECK_THROWS_AS(study_config_from_json(json{{"tua", 1.0}}), SchemaError);
    CHECK_THROWS_AS(study_config_from_json(json{{"tau", "one"}}), SchemaError);
    CHECK(study_config_from_json(json{{"wb", 0.8}}).omega_s == doctest::Approx(0.2));
  }

  TEST_CASE("scenario grid round trip") {
    Scenario sc;
    sc.id = "cell";
    sc.theta = 3;
    sc.a = 0.5;
    sc.b1 = 1.3;
    sc.p0 = 0.2;
    sc.p1 = 0.3;
    sc.n_per_arm = 250;
    sc.seed = 99;
    Scenario unc = sc;
    unc.c.reset();
    unc.id = "";
    sc.c = 1.0;
    std::istringstream in(json::array({to_json(sc), to_json(unc)}).dump());
    const auto grid = load_grid(in);
    REQUIRE(grid.size() == 2);
    CHECK(to_json(grid[0]) == to_json(sc));
    CHECK_FALSE(grid[1].c.has_value());
    CHECK(grid[1].id == "scenario2");
    std::istringstream bad("{\"theta\": 2}");
    CHECK_THROWS_AS(load_grid(bad), SchemaError);
    std::istringstream junk("[{");
    CHECK_THROWS_AS(load_grid(junk), SchemaError);
  }

  TEST_CASE("result JSON carries every field, the config and breakpoint counts") {
    const auto ds = fixture::trial({{0, 1, 0.5, 1}, {0, 0, 2.0, 0}, {0, 1, 3.0, 1}, {1, 1, 0.7, 1},
                                    {1, 0, 2.5, 1}, {1, 1, 3.5, 0}});
    StudyConfig cfg;
    const StudyEstimates est(ds, cfg);
    const auto r = est.result(cfg.variance_mode);
    const auto j = to_json(r, cfg, breakpoint_counts(est));
    for (const char* key : {"u_b", "u_s", "sigma_b_hat", "sigma_s_hat", "sigma_bs_hat", "rho_hat", "l_stat",
                            "var_l", "z", "p_value", "variance_mode", "config", "breakpoints"})
      CHECK(j.contains(key));
    CHECK(j["z"].get<double>() == r.z);
    CHECK(j["breakpoints"]["s_pooled"].get<std::size_t>() == est.s_pooled().size());
  }

  TEST_CASE("size TSV") {
    SizeEstimate e;
    e.n_reps = 100;
    e.used = 98;
    e.excluded = 2;
    e.size = 0.05;
    e.mc_se = 0.022;
    std::ostringstream os;
    write_size_tsv(os, {{"a", e}});
    CHECK(os.str() == "scenario_id\tvariance_mode\tn_reps\tempirical_size\tmc_se\texcluded\na\tpooled\t100\t0.05\t0.022\t2\n");
  }
}
