#include "bisurv/serialize.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "bisurv/errors.hpp"

namespace bisurv {

using nlohmann::json;

BreakpointCounts breakpoint_counts(const StudyEstimates& est) {
  return {est.q().size(), est.s_pooled().size(), est.g_pooled().size(), est.s(0).size(),
          est.s(1).size()};
}

json to_json(const StudyConfig& cfg) {
  json j{{"tau0", cfg.tau0},
         {"taub", cfg.tau_b},
         {"tau", cfg.tau},
         {"wb", cfg.omega_b},
         {"ws", cfg.omega_s},
         {"eta", cfg.weight.eta},
         {"rho", cfg.weight.rho},
         {"gam", cfg.weight.gamma},
         {"var_est", std::string(to_string(cfg.variance_mode))},
         {"cov_form", std::string(to_string(cfg.covariance))}};
  if (cfg.bandwidth) j["bandwidth"] = *cfg.bandwidth;
  if (cfg.weight.piecewise_a) j["piecewise_a"] = *cfg.weight.piecewise_a;
  if (cfg.weight.use_vc) j["use_vc"] = true;
  if (cfg.weight.use_at_risk) j["use_at_risk"] = true;
  return j;
}

namespace {

double number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

bool flag(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw SchemaError(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw SchemaError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw SchemaError(std::string("unknown ") + what + " field '" + key + "'");
}

}  // namespace

StudyConfig study_config_from_json(const json& j) {
  reject_unknown(j,
                 {"tau0", "taub", "tau", "wb", "ws", "eta", "rho", "gam", "var_est", "cov_form",
                  "bandwidth", "piecewise_a", "use_vc", "use_at_risk"},
                 "config");
  StudyConfig cfg;
  if (j.contains("tau0")) cfg.tau0 = number(j, "tau0");
  if (j.contains("taub")) cfg.tau_b = number(j, "taub");
  if (j.contains("tau")) cfg.tau = number(j, "tau");
  if (j.contains("wb")) cfg.omega_b = number(j, "wb");
  if (j.contains("ws")) cfg.omega_s = number(j, "ws");
  if (j.contains("wb") && !j.contains("ws")) cfg.omega_s = 1.0 - cfg.omega_b;
  if (j.contains("ws") && !j.contains("wb")) cfg.omega_b = 1.0 - cfg.omega_s;
  if (j.contains("eta")) cfg.weight.eta = number(j, "eta");
  if (j.contains("rho")) cfg.weight.rho = number(j, "rho");
  if (j.contains("gam")) cfg.weight.gamma = number(j, "gam");
  if (j.contains("var_est")) {
    if (!j["var_est"].is_string()) throw SchemaError("field 'var_est' must be a string");
    cfg.variance_mode = parse_variance_mode(j["var_est"].get<std::string>());
  }
  if (j.contains("cov_form")) {
    if (!j["cov_form"].is_string()) throw SchemaError("field 'cov_form' must be a string");
    cfg.covariance = parse_covariance_form(j["cov_form"].get<std::string>());
  }
  if (j.contains("bandwidth") && !j["bandwidth"].is_null()) cfg.bandwidth = number(j, "bandwidth");
  if (j.contains("piecewise_a") && !j["piecewise_a"].is_null())
    cfg.weight.piecewise_a = number(j, "piecewise_a");
  if (j.contains("use_vc")) cfg.weight.use_vc = flag(j, "use_vc");
  if (j.contains("use_at_risk")) cfg.weight.use_at_risk = flag(j, "use_at_risk");
  return cfg;
}

json to_json(const TestResult& r) {
  return json{{"u_b", r.u_b},
              {"u_s", r.u_s},
              {"p_hat0", r.p_hat0},
              {"p_hat1", r.p_hat1},
              {"sigma_b_hat", r.sigma_b_hat},
              {"sigma_s_hat", r.sigma_s_hat},
              {"sigma_bs_hat", r.sigma_bs_hat},
              {"rho_raw", r.rho_raw},
              {"rho_hat", r.rho_hat},
              {"l_stat", r.l_stat},
              {"var_l", r.var_l},
              {"z", r.z},
              {"p_value", r.p_value},
              {"variance_mode", std::string(to_string(r.variance_mode))}};
}

json to_json(const TestResult& r, const StudyConfig& cfg, const BreakpointCounts& counts) {
  json j = to_json(r);
  j["config"] = to_json(cfg);
  j["breakpoints"] = json{{"q", counts.q},
                          {"s_pooled", counts.s_pooled},
                          {"g_pooled", counts.g_pooled},
                          {"s0", counts.s0},
                          {"s1", counts.s1}};
  return j;
}

json to_json(const UnivariateResult& r) {
  return json{{"statistic", r.statistic}, {"sigma_hat", r.sigma_hat}, {"z", r.z}, {"p_value", r.p_value}};
}

json to_json(const Scenario& sc) {
  json j{{"id", sc.id},         {"theta", sc.theta}, {"a", sc.a},
         {"b", sc.b},           {"p0", sc.p0},       {"p1", sc.p1},
         {"n_per_arm", sc.n_per_arm}, {"seed", sc.seed}, {"config", to_json(sc.cfg)}};
  j["b1"] = sc.b1 ? json(*sc.b1) : json(nullptr);
  j["c"] = sc.c ? json(*sc.c) : json(nullptr);
  return j;
}

Scenario scenario_from_json(const json& j) {
  reject_unknown(j, {"id", "theta", "a", "b", "b1", "p0", "p1", "c", "n_per_arm", "seed", "config"},
                 "scenario");
  Scenario sc;
  try {
    if (j.contains("id")) sc.id = j.at("id").get<std::string>();
    if (j.contains("theta")) sc.theta = number(j, "theta");
    if (j.contains("a")) sc.a = number(j, "a");
    if (j.contains("b")) sc.b = number(j, "b");
    if (j.contains("b1") && !j["b1"].is_null()) sc.b1 = number(j, "b1");
    if (j.contains("p0")) sc.p0 = number(j, "p0");
    sc.p1 = j.contains("p1") ? number(j, "p1") : sc.p0;
    if (j.contains("c") && !j["c"].is_null()) sc.c = number(j, "c");
    if (j.contains("n_per_arm")) sc.n_per_arm = j.at("n_per_arm").get<std::size_t>();
    if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scenario: ") + e.what());
  }
  if (j.contains("config")) sc.cfg = study_config_from_json(j["config"]);
  sc.check();
  return sc;
}

std::vector<Scenario> load_grid(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("grid file is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw SchemaError("grid file must hold a JSON array of scenarios");
  std::vector<Scenario> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(scenario_from_json(j[k]));
    if (out.back().id.empty()) out.back().id = "scenario" + std::to_string(k + 1);
  }
  return out;
}

std::vector<Scenario> load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open grid file '" + path + "'");
  return load_grid(in);
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_size_tsv(std::ostream& out, const std::vector<SizeRow>& rows) {
  out << "scenario_id\tvariance_mode\tn_reps\tempirical_size\tmc_se\texcluded\n";
  for (const auto& row : rows) {
    const auto& e = row.estimate;
    out << row.scenario_id << '\t' << to_string(e.mode) << '\t' << e.n_reps << '\t' << shortest(e.size)
        << '\t' << shortest(e.mc_se) << '\t' << e.excluded << '\n';
  }
}

}  // namespace bisurv
