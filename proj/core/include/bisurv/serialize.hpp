#pragma once

#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "bisurv/config.hpp"
#include "bisurv/copula.hpp"
#include "bisurv/lstat.hpp"

namespace bisurv {

struct BreakpointCounts {
  std::size_t q = 0;
  std::size_t s_pooled = 0;
  std::size_t g_pooled = 0;
  std::size_t s0 = 0;
  std::size_t s1 = 0;
};

BreakpointCounts breakpoint_counts(const StudyEstimates& est);

nlohmann::json to_json(const StudyConfig& cfg);
/// Keys tau0, taub, tau, wb, ws, eta, rho, gam, var_est, cov_form, bandwidth,
/// piecewise_a, use_vc, use_at_risk; all optional. Throws SchemaError on
/// wrong types or unknown keys.
StudyConfig study_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TestResult& r);
/// Result fields plus "config" and "breakpoints" objects.
nlohmann::json to_json(const TestResult& r, const StudyConfig& cfg, const BreakpointCounts& counts);
nlohmann::json to_json(const UnivariateResult& r);

nlohmann::json to_json(const Scenario& sc);
/// "c": null (or absent) means uncensored.
Scenario scenario_from_json(const nlohmann::json& j);
std::vector<Scenario> load_grid(std::istream& in);
std::vector<Scenario> load_grid_file(const std::string& path);

struct SizeRow {
  std::string scenario_id;
  SizeEstimate estimate;
};

/// Header: scenario_id variance_mode n_reps empirical_size mc_se excluded.
void write_size_tsv(std::ostream& out, const std::vector<SizeRow>& rows);

}  // namespace bisurv
