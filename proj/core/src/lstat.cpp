#include "bisurv/lstat.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "bisurv/errors.hpp"
#include "bisurv/weights.hpp"

namespace bisurv {

double upper_tail_p(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

double root_scale(const TrialDataset& ds) {
  const double n0 = static_cast<double>(ds.n(0));
  const double n1 = static_cast<double>(ds.n(1));
  return std::sqrt(n0 * n1 / (n0 + n1));
}

// K(t) = integral of q*s over [t, tau_star]
struct KFunction {
  StepAntiderivative a;
  KFunction(const StepFunction& q, const StepFunction& s) : a(q * s, 0.0) {}
  double operator()(double t, double tau_star) const { return t >= tau_star ? 0.0 : a.between(t, tau_star); }
};

template <class F>
void for_jumps(const StepFunction& f, double lo, double hi, bool include_lo, F fn) {
  const auto br = f.breakpoints();
  auto it = include_lo ? std::lower_bound(br.begin(), br.end(), lo)
                       : std::upper_bound(br.begin(), br.end(), lo);
  for (; it != br.end() && *it <= hi; ++it) {
    const double u = *it;
    fn(u, f(u), f.left_limit(u));
  }
}

// -sum over jumps u of s in [tau0, tau] of K(u)^2 / (S(u) S(u-)) * inv_g(u) * dS(u)
template <class InvG>
double survival_variance(const StepFunction& s, const KFunction& k, double tau0, double tau, InvG inv_g) {
  double sum = 0.0;
  for_jumps(s, tau0, tau, true, [&](double u, double s_u, double s_before) {
    if (!(s_u > 0.0))
      throw AssumptionViolation("survival KM reaches 0 at t=" + std::to_string(u) + " within [tau0, tau]");
    const double kk = k(u, tau);
    sum -= kk * kk / (s_u * s_before) * inv_g(u) * (s_u - s_before);
  });
  return sum;
}

// -sum over jumps u of s in (lo, hi] of K_{tau_star}(u) p dS(u)/S(u)
double compensator_sum(const StepFunction& s, const KFunction& k, double p, double lo, double hi,
                       double tau_star) {
  double sum = 0.0;
  for_jumps(s, lo, hi, false, [&](double u, double s_u, double s_before) {
    if (!(s_u > 0.0))
      throw AssumptionViolation("survival KM reaches 0 at t=" + std::to_string(u) + " within [tau0, tau]");
    sum -= k(u, tau_star) * p * (s_u - s_before) / s_u;
  });
  return sum;
}

// sum over jumps u of sx in (lo, tau] of K_tau(u) p / S(u-) * SX(u-) dSX(u) / SX(u)
double responder_sum(const StepFunction& s, const StepFunction& sx, const KFunction& k, double p,
                     double lo, double tau) {
  double sum = 0.0;
  for_jumps(sx, lo, tau, false, [&](double u, double sx_u, double sx_before) {
    if (!(sx_u > 0.0))
      throw AssumptionViolation("responder survival KM reaches 0 at t=" + std::to_string(u) +
                                " within (tau_max, tau]");
    sum += k(u, tau) * p / s.left_limit(u) * sx_before * (sx_u - sx_before) / sx_u;
  });
  return sum;
}

// trapezoidal integral of K_{tau_b}(t) * lambda(t) on the hazard grid
double hazard_integral(const HazardEstimate& h, const KFunction& k, double tau_b) {
  double sum = 0.0;
  for (std::size_t i = 1; i < h.grid.size(); ++i) {
    const double f0 = k(h.grid[i - 1], tau_b) * h.values[i - 1];
    const double f1 = k(h.grid[i], tau_b) * h.values[i];
    sum += 0.5 * (f0 + f1) * (h.grid[i] - h.grid[i - 1]);
  }
  return sum;
}

double g_left(const StepFunction& g, double u, int arm) {
  const double v = g.left_limit(u);
  if (!(v > 0.0))
    throw SupportExhausted("arm " + std::to_string(arm) + ": censoring KM is 0 before t=" +
                           std::to_string(u));
  return v;
}

struct Components {
  const TrialDataset& ds;
  const StudyConfig& cfg;
  const StepFunction& q;
  const StepFunction& s_pooled;
  const std::array<const StepFunction*, 2> s;
  const std::array<const StepFunction*, 2> g;
  const std::array<const StepFunction*, 2> sx;  // may be null when only variances are needed
};

double variance_b(const TrialDataset& ds, VarianceMode mode) {
  double v;
  if (mode == VarianceMode::pooled) {
    const double p = ds.p_hat_pooled();
    v = p * (1.0 - p);
  } else {
    v = 0.0;
    for (int i = 0; i < 2; ++i) v += (1.0 - ds.pi_hat(i)) * ds.p_hat(i) * (1.0 - ds.p_hat(i));
  }
  if (!(v > 0.0)) throw DegenerateVariance("binary variance is 0 (all or no responders)");
  return v;
}

double variance_s(const Components& c, VarianceMode mode) {
  const auto& ds = c.ds;
  const double tau0 = c.cfg.tau0;
  const double tau = c.cfg.tau;
  if (mode == VarianceMode::pooled) {
    const double n = static_cast<double>(ds.n_total());
    const double n0 = static_cast<double>(ds.n(0));
    const double n1 = static_cast<double>(ds.n(1));
    const KFunction k(c.q, c.s_pooled);
    return survival_variance(c.s_pooled, k, tau0, tau, [&](double u) {
      const double g0 = g_left(*c.g[0], u, 0);
      const double g1 = g_left(*c.g[1], u, 1);
      return (n0 * g0 + n1 * g1) / (n * g0 * g1);
    });
  }
  double v = 0.0;
  for (int i = 0; i < 2; ++i) {
    const KFunction k(c.q, *c.s[static_cast<std::size_t>(i)]);
    const auto& gi = *c.g[static_cast<std::size_t>(i)];
    v += (1.0 - ds.pi_hat(i)) *
         survival_variance(*c.s[static_cast<std::size_t>(i)], k, tau0, tau,
                           [&](double u) { return 1.0 / g_left(gi, u, i); });
  }
  return v;
}

double covariance_bs(const Components& c, const HazardEstimate* h0, const HazardEstimate* h1,
                     VarianceMode mode) {
  const auto& ds = c.ds;
  const double tau0 = c.cfg.tau0;
  const double tau_b = c.cfg.tau_b;
  const double tau = c.cfg.tau;
  const double tau_max = c.cfg.tau_max();
  const bool early = tau0 < tau_b;
  if (early && (h0 == nullptr || h1 == nullptr))
    throw std::invalid_argument("joint hazard estimates required when tau0 < tau_b");
  const std::array<const HazardEstimate*, 2> h{h0, h1};

  if (mode == VarianceMode::pooled) {
    const double p = ds.p_hat_pooled();
    const KFunction k(c.q, c.s_pooled);
    double cov = 0.0;
    if (early) {
      for (int i = 0; i < 2; ++i)
        cov -= (1.0 - ds.pi_hat(i)) * hazard_integral(*h[static_cast<std::size_t>(i)], k, tau_b);
      cov += compensator_sum(c.s_pooled, k, p, tau0, tau_b, tau_b);
    }
    cov += compensator_sum(c.s_pooled, k, p, tau_max, tau, tau);
    for (int i = 0; i < 2; ++i)
      cov += (1.0 - ds.pi_hat(i)) *
             responder_sum(c.s_pooled, *c.sx[static_cast<std::size_t>(i)], k, p, tau_max, tau);
    return cov;
  }
  double cov = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto& si = *c.s[static_cast<std::size_t>(i)];
    const double p = ds.p_hat(i);
    const KFunction k(c.q, si);
    double part = 0.0;
    if (early) {
      part -= hazard_integral(*h[static_cast<std::size_t>(i)], k, tau_b);
      part += compensator_sum(si, k, p, tau0, tau_b, tau_b);
    }
    part += compensator_sum(si, k, p, tau_max, tau, tau);
    part += responder_sum(si, *c.sx[static_cast<std::size_t>(i)], k, p, tau_max, tau);
    cov += (1.0 - ds.pi_hat(i)) * part;
  }
  return cov;
}


// -sum over event times u in [tau0, tau] of K_tau(u) (dN_X(u) - Y_X(u)/Y(u) dN(u)) / Y(u),
// counts restricted to `group` (< 0: both arms).
double covariance_at_risk(const TrialDataset& ds, int group, const KFunction& k, double tau0, double tau) {
  const auto recs = ds.records();
  double y = 0.0, yx = 0.0, sum = 0.0;
  // walk backwards so y, yx are the at-risk counts at the current time
  std::size_t j = recs.size();
  while (j > 0) {
    const double u = recs[j - 1].time;
    double d = 0.0, dx = 0.0;
    while (j > 0 && recs[j - 1].time == u) {
      const auto& r = recs[j - 1];
      --j;
      if (group >= 0 && r.group != group) continue;
      y += 1.0;
      yx += r.binary;
      d += r.status;
      dx += r.status * r.binary;
    }
    if (d == 0.0 || u < tau0 || u > tau) continue;
    sum -= k(u, tau) * (dx - yx / y * d) / y;
  }
  return sum;
}

double covariance_bs_at_risk(const Components& c, VarianceMode mode) {
  if (mode == VarianceMode::pooled) {
    const KFunction k(c.q, c.s_pooled);
    return covariance_at_risk(c.ds, -1, k, c.cfg.tau0, c.cfg.tau);
  }
  double cov = 0.0;
  for (int i = 0; i < 2; ++i) {
    const KFunction k(c.q, *c.s[static_cast<std::size_t>(i)]);
    cov += (1.0 - c.ds.pi_hat(i)) * covariance_at_risk(c.ds, i, k, c.cfg.tau0, c.cfg.tau);
  }
  return cov;
}
}  // namespace

BinaryStatistic u_binary(const TrialDataset& ds, double /*tau_b*/) {
  BinaryStatistic b;
  b.p_hat0 = ds.p_hat(0);
  b.p_hat1 = ds.p_hat(1);
  b.u_b = root_scale(ds) * (b.p_hat1 - b.p_hat0);
  return b;
}

namespace {
double u_survival_from(const TrialDataset& ds, double tau0, double tau, const StepFunction& q,
                       const StepFunction& s0, const StepFunction& s1) {
  return root_scale(ds) * integrate(q * (s1 - s0), tau0, tau);
}
}  // namespace

double u_survival(const TrialDataset& ds, double tau0, double tau, const StepFunction& q) {
  return u_survival_from(ds, tau0, tau, q, group_km(ds, 0), group_km(ds, 1));
}

double u_survival(const TrialDataset& ds, double tau0, double tau,
                  const std::function<double(double)>& q) {
  const auto diff = group_km(ds, 1) - group_km(ds, 0);
  const auto br = diff.breakpoints();
  std::vector<double> cuts{tau0};
  for (double t : br)
    if (t > tau0 && t < tau) cuts.push_back(t);
  cuts.push_back(tau);
  double sum = 0.0;
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    const double d = diff(cuts[k - 1]);
    if (d == 0.0) continue;
    sum += d * boost::math::quadrature::gauss<double, 7>::integrate(q, cuts[k - 1], cuts[k]);
  }
  return root_scale(ds) * sum;
}

double k_hat(const StepFunction& q, const StepFunction& s_pooled, double t, double tau_star) {
  if (t >= tau_star) return 0.0;
  return integrate(q * s_pooled, t, tau_star);
}

double sigma_b_sq_hat(const TrialDataset& ds, double /*tau_b*/, VarianceMode mode) {
  return variance_b(ds, mode);
}

double sigma_s_sq_hat(const TrialDataset& ds, double tau0, double tau, const StepFunction& q,
                      VarianceMode mode) {
  StudyConfig cfg;
  cfg.tau0 = tau0;
  cfg.tau = tau;
  const auto pooled = pooled_km(ds);
  const std::array<StepFunction, 2> s{group_km(ds, 0), group_km(ds, 1)};
  const std::array<StepFunction, 2> g{group_censoring_km(ds, 0), group_censoring_km(ds, 1)};
  const Components c{ds, cfg, q, pooled.survival, {&s[0], &s[1]}, {&g[0], &g[1]}, {nullptr, nullptr}};
  return variance_s(c, mode);
}

double sigma_bs_hat(const TrialDataset& ds, const StudyConfig& cfg, const StepFunction& q,
                    const HazardEstimate& hazard0, const HazardEstimate& hazard1, VarianceMode mode) {
  const auto pooled = pooled_km(ds);
  const std::array<StepFunction, 2> s{group_km(ds, 0), group_km(ds, 1)};
  const std::array<StepFunction, 2> sx{responders_km(ds, 0), responders_km(ds, 1)};
  const Components c{ds, cfg, q, pooled.survival, {&s[0], &s[1]}, {nullptr, nullptr}, {&sx[0], &sx[1]}};
  return covariance_bs(c, &hazard0, &hazard1, mode);
}

double sigma_bs_hat(const TrialDataset& ds, const StudyConfig& cfg, const StepFunction& q, VarianceMode mode) {
  return StudyEstimates(ds, cfg, q).sigma_bs(mode);
}

StudyEstimates::StudyEstimates(const TrialDataset& ds, const StudyConfig& cfg)
    : StudyEstimates(ds, cfg, build_q(ds, pooled_km(ds), cfg.weight, cfg.tau_b)) {}

StudyEstimates::StudyEstimates(const TrialDataset& ds, const StudyConfig& cfg, StepFunction q)
    : StudyEstimates(ds, cfg, std::move(q), std::nullopt) {}

StudyEstimates::StudyEstimates(const TrialDataset& ds, const StudyConfig& cfg, StepFunction q,
                               std::optional<std::array<HazardEstimate, 2>> hazards)
    : ds_(&ds), cfg_(cfg), pooled_(pooled_km(ds)), q_(std::move(q)), hazards_(std::move(hazards)) {
  cfg_.check();
  for (int i = 0; i < 2; ++i) {
    const auto k = static_cast<std::size_t>(i);
    s_[k] = group_km(ds, i);
    g_[k] = group_censoring_km(ds, i);
    sx_[k] = ds.responders(i) > 0 ? responders_km(ds, i) : StepFunction(1.0);
  }
  if (!hazards_ && cfg_.covariance == CovarianceForm::marginal && cfg_.tau0 < cfg_.tau_b) fit_hazards();
}

void StudyEstimates::fit_hazards() {
  HazardOptions opts;
  opts.bandwidth = cfg_.bandwidth;
  hazards_ = std::array<HazardEstimate, 2>{hazard_xt(*ds_, 0, cfg_.tau0, cfg_.tau_b, opts),
                                           hazard_xt(*ds_, 1, cfg_.tau0, cfg_.tau_b, opts)};
}

BinaryStatistic StudyEstimates::binary() const { return u_binary(*ds_, cfg_.tau_b); }

double StudyEstimates::u_survival() const {
  return u_survival_from(*ds_, cfg_.tau0, cfg_.tau, q_, s_[0], s_[1]);
}

double StudyEstimates::sigma_b_sq(VarianceMode mode) const { return variance_b(*ds_, mode); }

double StudyEstimates::sigma_s_sq(VarianceMode mode) const {
  const Components c{*ds_, cfg_, q_, pooled_.survival, {&s_[0], &s_[1]}, {&g_[0], &g_[1]}, {&sx_[0], &sx_[1]}};
  return variance_s(c, mode);
}

double StudyEstimates::sigma_bs(VarianceMode mode) const {
  const Components c{*ds_, cfg_, q_, pooled_.survival, {&s_[0], &s_[1]}, {&g_[0], &g_[1]}, {&sx_[0], &sx_[1]}};
  if (cfg_.covariance == CovarianceForm::compensated) return covariance_bs_at_risk(c, mode);
  const HazardEstimate* h0 = hazards_ ? &(*hazards_)[0] : nullptr;
  const HazardEstimate* h1 = hazards_ ? &(*hazards_)[1] : nullptr;
  return covariance_bs(c, h0, h1, mode);
}

TestResult StudyEstimates::result(VarianceMode mode) const {
  TestResult r;
  r.variance_mode = mode;
  const auto b = binary();
  r.u_b = b.u_b;
  r.p_hat0 = b.p_hat0;
  r.p_hat1 = b.p_hat1;
  r.u_s = u_survival();
  r.sigma_b_hat = std::sqrt(sigma_b_sq(mode));
  const double vs = sigma_s_sq(mode);
  if (!(vs > 0.0)) throw DegenerateVariance("survival variance is 0 (no events in [tau0, tau])");
  r.sigma_s_hat = std::sqrt(vs);
  r.sigma_bs_hat = sigma_bs(mode);
  r.rho_raw = r.sigma_bs_hat / (r.sigma_b_hat * r.sigma_s_hat);
  r.rho_hat = std::clamp(r.rho_raw, -1.0, 1.0);
  const double wb = cfg_.omega_b;
  const double ws = cfg_.omega_s;
  r.l_stat = wb * r.u_b / r.sigma_b_hat + ws * r.u_s / r.sigma_s_hat;
  r.var_l = wb * wb + ws * ws + 2.0 * wb * ws * r.rho_hat;
  if (!(r.var_l > 1e-12)) throw DegenerateVariance("variance of the combined statistic is ~0");
  r.z = r.l_stat / std::sqrt(r.var_l);
  r.p_value = upper_tail_p(r.z);
  return r;
}

namespace {
void require_valid(const TrialDataset& ds, const StudyConfig& cfg) {
  cfg.check();
  const auto rep = validate(ds, cfg);
  if (rep.blocking()) throw AssumptionViolation(rep.summary());
}
}  // namespace

TestResult l_statistic(const TrialDataset& ds, const StudyConfig& cfg) {
  require_valid(ds, cfg);
  return StudyEstimates(ds, cfg).result(cfg.variance_mode);
}

std::array<TestResult, 2> l_statistic_both(const TrialDataset& ds, const StudyConfig& cfg) {
  require_valid(ds, cfg);
  const StudyEstimates est(ds, cfg);
  return {est.result(VarianceMode::pooled), est.result(VarianceMode::unpooled)};
}

UnivariateResult binary_test(const TrialDataset& ds, const StudyConfig& cfg) {
  cfg.check();
  UnivariateResult r;
  r.statistic = u_binary(ds, cfg.tau_b).u_b;
  r.sigma_hat = std::sqrt(variance_b(ds, cfg.variance_mode));
  r.z = r.statistic / r.sigma_hat;
  r.p_value = upper_tail_p(r.z);
  return r;
}

UnivariateResult survival_test(const TrialDataset& ds, const StudyConfig& cfg) {
  cfg.check();
  const auto q = build_q(ds, cfg.weight, cfg.tau_b);
  UnivariateResult r;
  r.statistic = u_survival(ds, cfg.tau0, cfg.tau, q);
  const double v = sigma_s_sq_hat(ds, cfg.tau0, cfg.tau, q, cfg.variance_mode);
  if (!(v > 0.0)) throw DegenerateVariance("survival variance is 0 (no events in [tau0, tau])");
  r.sigma_hat = std::sqrt(v);
  r.z = r.statistic / r.sigma_hat;
  r.p_value = upper_tail_p(r.z);
  return r;
}

double noncentrality(const NoncentralitySpec& spec, const StudyConfig& cfg) {
  constexpr int points = 1001;
  const double h = (cfg.tau - cfg.tau0) / (points - 1);
  double integral = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = i + 1 == points ? cfg.tau : cfg.tau0 + h * i;
    const double d = spec.drift(t);
    if (!(d >= 0.0)) throw ConfigError("survival drift must be nonnegative on [tau0, tau]");
    const double w = (i == 0 || i + 1 == points) ? 0.5 : 1.0;
    integral += w * spec.q(t) * d;
  }
  return cfg.omega_b * spec.g + cfg.omega_s * h * integral;
}

}  // namespace bisurv
