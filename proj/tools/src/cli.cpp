#include "bisurv_cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "bisurv/copula.hpp"
#include "bisurv/dataset.hpp"
#include "bisurv/errors.hpp"
#include "bisurv/km.hpp"
#include "bisurv/lstat.hpp"
#include "bisurv/serialize.hpp"
#include "bisurv/weights.hpp"

namespace bisurv::cli {

namespace {

using nlohmann::json;

struct StudyFlags {
  std::string input;
  double tau0 = 0.0;
  double tau = 1.0;
  std::optional<double> taub;
  double rho = 0.0;
  double gam = 0.0;
  double eta = 0.0;
  std::optional<double> wb;
  std::optional<double> ws;
  std::string var_est = "pooled";
  std::string cov_form = "compensated";
  std::optional<double> bandwidth;
  std::optional<double> piecewise_a;
  bool use_vc = false;
  bool use_at_risk = false;
  std::string format = "json";
  std::string curve = "s";
};

struct SimulateFlags {
  std::string grid;
  std::string builtin;
  std::size_t reps = 0;
  bool reps_given = false;
  double alpha = 0.05;
  unsigned threads = 1;
  std::string format = "tsv";
};

void add_study_options(CLI::App& sub, StudyFlags& f, bool with_curve) {
  sub.add_option("input", f.input, "CSV with columns time,status,binary,treat ('-' for stdin)")->required();
  sub.add_option("--tau0", f.tau0, "start of the survival window");
  sub.add_option("--tau", f.tau, "end of the survival window");
  sub.add_option("--taub", f.taub, "binary assessment time (default tau)");
  sub.add_option("--rho", f.rho, "exponent of S(t-) in the weight");
  sub.add_option("--gam", f.gam, "exponent of 1 - S(t-) in the weight");
  sub.add_option("--eta", f.eta, "exponent of G(t-) in the weight");
  sub.add_option("--wb", f.wb, "weight of the binary component");
  sub.add_option("--ws", f.ws, "weight of the survival component");
  sub.add_option("--var-est", f.var_est, "pooled or unpooled");
  sub.add_option("--cov-form", f.cov_form, "compensated (default) or marginal");
  sub.add_option("--bandwidth", f.bandwidth, "kernel bandwidth for the marginal covariance form");
  sub.add_option("--piecewise-a", f.piecewise_a, "weight a before taub and 1-a after");
  sub.add_flag("--vc", f.use_vc, "use the two-sample censoring weight v_c in place of G");
  sub.add_flag("--at-risk", f.use_at_risk, "multiply the weight by the pooled at-risk fraction");
  if (with_curve) {
    sub.add_option("--curve", f.curve, "s, g, s0, s1, g0, g1, sx0, sx1 or q")
        ->check(CLI::IsMember({"s", "g", "s0", "s1", "g0", "g1", "sx0", "sx1", "q"}));
  } else {
    sub.add_option("--format", f.format, "json or tsv")->check(CLI::IsMember({"json", "tsv"}));
  }
}

StudyConfig to_config(const StudyFlags& f) {
  StudyConfig cfg;
  cfg.tau0 = f.tau0;
  cfg.tau = f.tau;
  cfg.tau_b = f.taub.value_or(f.tau);
  cfg.weight.rho = f.rho;
  cfg.weight.gamma = f.gam;
  cfg.weight.eta = f.eta;
  cfg.weight.piecewise_a = f.piecewise_a;
  cfg.weight.use_vc = f.use_vc;
  cfg.weight.use_at_risk = f.use_at_risk;
  if (f.wb && f.ws) {
    cfg.omega_b = *f.wb;
    cfg.omega_s = *f.ws;
  } else if (f.wb) {
    cfg.omega_b = *f.wb;
    cfg.omega_s = 1.0 - *f.wb;
  } else if (f.ws) {
    cfg.omega_s = *f.ws;
    cfg.omega_b = 1.0 - *f.ws;
  }
  cfg.variance_mode = parse_variance_mode(f.var_est);
  cfg.covariance = parse_covariance_form(f.cov_form);
  cfg.bandwidth = f.bandwidth;
  cfg.check();
  return cfg;
}

TrialDataset load(const std::string& path, std::istream& in) {
  if (path == "-") return parse_csv(in);
  std::ifstream file(path);
  if (!file) throw SchemaError("cannot open input file '" + path + "'");
  return parse_csv(file);
}

std::string number(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// flat key/value TSV of the scalar members of a JSON object
void write_kv_tsv(std::ostream& out, const json& j) {
  out << "key\tvalue\n";
  for (const auto& [key, value] : j.items()) {
    if (value.is_object() || value.is_array()) continue;
    out << key << '\t';
    if (value.is_number()) out << number(value.get<double>());
    else if (value.is_string()) out << value.get<std::string>();
    else if (value.is_null()) out << "NA";
    else out << value.dump();
    out << '\n';
  }
}

void emit(std::ostream& out, const json& j, const std::string& format) {
  if (format == "tsv") write_kv_tsv(out, j);
  else out << j.dump(2) << '\n';
}

void require_valid(const TrialDataset& ds, const StudyConfig& cfg, std::ostream& err,
                   std::vector<std::string>& warnings) {
  const auto rep = validate(ds, cfg);
  if (rep.blocking()) throw AssumptionViolation(rep.summary());
  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
  warnings = rep.warnings;
}

int run_lstats(const StudyFlags& f, std::istream& in, std::ostream& out, std::ostream& err) {
  const auto cfg = to_config(f);
  const auto ds = load(f.input, in);
  std::vector<std::string> warnings;
  require_valid(ds, cfg, err, warnings);
  const StudyEstimates est(ds, cfg);
  const auto r = est.result(cfg.variance_mode);
  auto j = to_json(r, cfg, breakpoint_counts(est));
  j["n0"] = ds.n(0);
  j["n1"] = ds.n(1);
  j["warnings"] = warnings;
  emit(out, j, f.format);
  return kSuccess;
}

int run_univariate(const StudyFlags& f, bool binary, std::istream& in, std::ostream& out) {
  const auto cfg = to_config(f);
  const auto ds = load(f.input, in);
  const auto r = binary ? binary_test(ds, cfg) : survival_test(ds, cfg);
  auto j = to_json(r);
  j["test"] = binary ? "binary" : "survival";
  j["variance_mode"] = std::string(to_string(cfg.variance_mode));
  emit(out, j, f.format);
  return kSuccess;
}

int run_cov(const StudyFlags& f, std::istream& in, std::ostream& out) {
  const auto cfg = to_config(f);
  const auto ds = load(f.input, in);
  const StudyEstimates est(ds, cfg);
  const auto mode = cfg.variance_mode;
  const double bs = est.sigma_bs(mode);
  json j{{"sigma_bs_hat", bs},
         {"variance_mode", std::string(to_string(mode))},
         {"cov_form", std::string(to_string(cfg.covariance))}};
  // rho is undefined when either component has zero variance
  double vb = 0.0;
  try {
    vb = est.sigma_b_sq(mode);
  } catch (const DegenerateVariance&) {
  }
  const double vs = est.sigma_s_sq(mode);
  j["sigma_b_hat"] = std::sqrt(vb);
  j["sigma_s_hat"] = std::sqrt(std::max(vs, 0.0));
  if (vb > 0.0 && vs > 0.0)
    j["rho_hat"] = std::clamp(bs / std::sqrt(vb * vs), -1.0, 1.0);
  else
    j["rho_hat"] = nullptr;
  emit(out, j, f.format);
  return kSuccess;
}

int run_kmdump(const StudyFlags& f, std::istream& in, std::ostream& out) {
  const auto cfg = to_config(f);
  const auto ds = load(f.input, in);
  const auto& c = f.curve;
  StepFunction curve;
  if (c == "s") curve = pooled_km(ds).survival;
  else if (c == "g") curve = pooled_km(ds).censoring;
  else if (c == "s0" || c == "s1") curve = group_km(ds, c[1] - '0');
  else if (c == "g0" || c == "g1") curve = group_censoring_km(ds, c[1] - '0');
  else if (c == "sx0" || c == "sx1") curve = responders_km(ds, c[2] - '0');
  else curve = build_q(ds, cfg.weight, cfg.tau_b);
  write_tsv(out, curve);
  return kSuccess;
}

int run_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
  if (f.grid.empty() == f.builtin.empty())
    throw ConfigError("give exactly one of --grid and --builtin-grid");
  if (f.reps_given && f.reps == 0) throw ConfigError("--reps must be positive");
  if (!(f.alpha > 0.0 && f.alpha <= 1.0)) throw ConfigError("--alpha must lie in (0, 1]");
  if (f.threads == 0) throw ConfigError("--threads must be positive");

  std::vector<Scenario> grid;
  std::size_t reps = 2000;
  if (!f.builtin.empty()) {
    const auto scale = f.builtin == "full" ? GridScale::full : GridScale::desk;
    grid = size_study_grid(scale);
    reps = default_reps(scale);
  } else {
    grid = load_grid_file(f.grid);
  }
  if (f.reps_given) reps = f.reps;

  std::vector<SizeRow> rows;
  std::vector<json> records;
  for (const auto& sc : grid) {
    const auto run = run_scenario(sc, reps, f.alpha, f.threads);
    for (const auto& note : run.exclusions) err << sc.id << ": excluded " << note << '\n';
    for (const auto* e : {&run.pooled, &run.unpooled}) {
      rows.push_back({sc.id, *e});
      records.push_back(json{{"scenario_id", sc.id},
                             {"variance_mode", std::string(to_string(e->mode))},
                             {"n_reps", e->n_reps},
                             {"empirical_size", e->size},
                             {"mc_se", e->mc_se},
                             {"excluded", e->excluded}});
    }
  }
  if (f.format == "json") out << json(records).dump(2) << '\n';
  else write_size_tsv(out, rows);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Combined binary and survival two-sample tests", "bisurv"};
  app.require_subcommand(1);

  StudyFlags study;
  SimulateFlags sim;
  auto* lstats = app.add_subcommand("lstats", "combined standardized statistic");
  auto* bintest = app.add_subcommand("bintest", "binary component alone");
  auto* survtest = app.add_subcommand("survtest", "weighted KM difference alone");
  auto* cov = app.add_subcommand("cov", "covariance of the two components");
  auto* kmdump = app.add_subcommand("kmdump", "print a KM curve or the weight as TSV (t, value)");
  for (auto* sub : {lstats, bintest, survtest, cov}) add_study_options(*sub, study, false);
  add_study_options(*kmdump, study, true);

  auto* simulate = app.add_subcommand("simulate", "empirical size over a scenario grid");
  simulate->add_option("--grid", sim.grid, "JSON array of scenarios");
  simulate->add_option("--builtin-grid", sim.builtin, "desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
  auto* reps_opt = simulate->add_option("--reps", sim.reps, "replicates per scenario");
  simulate->add_option("--alpha", sim.alpha, "nominal level");
  simulate->add_option("--threads", sim.threads, "worker threads");
  simulate->add_option("--format", sim.format, "tsv or json")->check(CLI::IsMember({"json", "tsv"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  sim.reps_given = reps_opt->count() > 0;

  try {
    if (lstats->parsed()) return run_lstats(study, in, out, err);
    if (bintest->parsed()) return run_univariate(study, true, in, out);
    if (survtest->parsed()) return run_univariate(study, false, in, out);
    if (cov->parsed()) return run_cov(study, in, out);
    if (kmdump->parsed()) return run_kmdump(study, in, out);
    if (simulate->parsed()) return run_simulate(sim, out, err);
  } catch (const SchemaError& e) {
    err << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const RowError& e) {
    err << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedModel& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const AssumptionViolation& e) {
    err << "assumption violated:\n" << e.what();
    return kAssumption;
  } catch (const InsufficientDataError& e) {
    err << "insufficient data: " << e.what() << '\n';
    return kAssumption;
  } catch (const DegenerateVariance& e) {
    err << "degenerate variance: " << e.what() << '\n';
    return kAssumption;
  } catch (const SimulationError& e) {
    err << "simulation failed: " << e.what() << '\n';
    return kAssumption;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace bisurv::cli
