#pragma once

#include "bisurv/config.hpp"
#include "bisurv/dataset.hpp"
#include "bisurv/km.hpp"
#include "bisurv/step_function.hpp"

namespace bisurv {

// Weight functions are predictable: Q(t) is built from left limits G(t-),
// S(t-). The StepFunction returned by the builders below stores the
// right-continuous version, so Q(t) = q.left_limit(t). The two agree except
// at breakpoints and give identical integrals.

/// x^e with 0^0 = 1.
double pow0(double base, double exponent);

/// Survival weight G(t-)^eta * S(t-)^rho * (1 - S(t-))^gamma, times the
/// optional two-level emphasis and at-risk factors of `spec`.
StepFunction build_q(const TrialDataset& ds, const WeightSpec& spec, double tau_b);
StepFunction build_q(const TrialDataset& ds, const PooledKm& pooled, const WeightSpec& spec,
                     double tau_b);

/// v_c(t) = n G0(t-) G1(t-) / (n0 G0(t-) + n1 G1(t-)). Throws SupportExhausted
/// when both arms' censoring KMs vanish before `tau`.
StepFunction vc_weight(const TrialDataset& ds, double tau);
StepFunction sqrt_vc_weight(const TrialDataset& ds, double tau);

/// S(t-)^rho * (1 - S(t-))^gamma on the pooled KM.
StepFunction fh_weight(const StepFunction& s_pooled, double rho, double gamma);

/// f(t) = a for t < tau_b, 1 - a for t >= tau_b.
StepFunction piecewise_emphasis(double a, double tau_b);

/// Pooled at-risk fraction Ybar(t)/n, Ybar(t) = #{obs >= t}.
StepFunction at_risk_weight(const TrialDataset& ds);

}  // namespace bisurv
