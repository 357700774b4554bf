#include "bisurv/weights.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "bisurv/errors.hpp"

namespace bisurv {

double pow0(double base, double exponent) {
  if (exponent == 0.0) return 1.0;
  if (exponent == 1.0) return base;
  return std::pow(base, exponent);
}

StepFunction fh_weight(const StepFunction& s_pooled, double rho, double gamma) {
  return s_pooled.transform([rho, gamma](double s) { return pow0(s, rho) * pow0(1.0 - s, gamma); });
}

StepFunction piecewise_emphasis(double a, double tau_b) {
  return StepFunction({tau_b}, {1.0 - a}, a);
}

StepFunction at_risk_weight(const TrialDataset& ds) {
  // right-continuous version #{obs > t}/n, whose left limit is #{obs >= t}/n
  const auto recs = ds.records();
  const double n = static_cast<double>(recs.size());
  std::vector<double> br;
  std::vector<double> v;
  std::size_t k = 0;
  while (k < recs.size()) {
    const double t = recs[k].time;
    while (k < recs.size() && recs[k].time == t) ++k;
    br.push_back(t);
    v.push_back(static_cast<double>(recs.size() - k) / n);
  }
  return StepFunction(std::move(br), std::move(v), 1.0);
}

namespace {

// tau = +inf skips the support check
StepFunction vc_from(const TrialDataset& ds, const StepFunction& g0, const StepFunction& g1, double tau) {
  const double n = static_cast<double>(ds.n_total());
  const double n0 = static_cast<double>(ds.n(0));
  const double n1 = static_cast<double>(ds.n(1));
  // Breakpoints of g0, g1 are where the left-limit version changes just after.
  const auto both = combine(g0, g1, [](double a, double b) { return a + b; });
  for (double t : both.breakpoints())
    if (std::isfinite(tau) && t < tau && g0(t) == 0.0 && g1(t) == 0.0)
      throw SupportExhausted("both arms' censoring KMs reach 0 at t=" + std::to_string(t) +
                             " before tau; v_c undefined");
  return combine(g0, g1, [n, n0, n1](double a, double b) {
    const double den = n0 * a + n1 * b;
    return den > 0.0 ? n * a * b / den : 0.0;
  });
}

}  // namespace

StepFunction vc_weight(const TrialDataset& ds, double tau) {
  return vc_from(ds, group_censoring_km(ds, 0), group_censoring_km(ds, 1), tau);
}

StepFunction sqrt_vc_weight(const TrialDataset& ds, double tau) {
  return vc_weight(ds, tau).transform([](double v) { return std::sqrt(v); });
}

StepFunction build_q(const TrialDataset& ds, const PooledKm& pooled, const WeightSpec& spec,
                     double tau_b) {
  StepFunction q = fh_weight(pooled.survival, spec.rho, spec.gamma);
  if (spec.eta != 0.0) {
    const double eta = spec.eta;
    StepFunction censor_factor =
        spec.use_vc ? vc_from(ds, group_censoring_km(ds, 0), group_censoring_km(ds, 1),
                              std::numeric_limits<double>::infinity())
                    : pooled.censoring;
    q = combine(q, censor_factor, [eta](double x, double g) { return x * pow0(g, eta); });
  }
  if (spec.piecewise_a) q = q * piecewise_emphasis(*spec.piecewise_a, tau_b);
  if (spec.use_at_risk) q = q * at_risk_weight(ds);
  return q.compressed();
}

StepFunction build_q(const TrialDataset& ds, const WeightSpec& spec, double tau_b) {
  spec.check();
  return build_q(ds, pooled_km(ds), spec, tau_b);
}

}  // namespace bisurv
