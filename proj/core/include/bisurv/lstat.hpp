#pragma once

#include <array>
#include <functional>
#include <optional>

#include "bisurv/config.hpp"
#include "bisurv/dataset.hpp"
#include "bisurv/kernel_hazard.hpp"
#include "bisurv/km.hpp"
#include "bisurv/step_function.hpp"

namespace bisurv {

/// Everything reported for one combined binary + survival test.
struct TestResult {
  double u_b = 0.0;             // sqrt(n0 n1 / n) (p1 - p0)
  double u_s = 0.0;             // sqrt(n0 n1 / n) * integral of Q (S1 - S0) over [tau0, tau]
  double p_hat0 = 0.0;
  double p_hat1 = 0.0;
  double sigma_b_hat = 0.0;     // standard deviations, not variances
  double sigma_s_hat = 0.0;
  double sigma_bs_hat = 0.0;    // covariance of u_b and u_s
  double rho_raw = 0.0;         // sigma_bs / (sigma_b sigma_s) before clipping
  double rho_hat = 0.0;         // clipped to [-1, 1]
  double l_stat = 0.0;
  double var_l = 0.0;
  double z = 0.0;
  double p_value = 0.0;         // one-sided, large z favours arm 1
  VarianceMode variance_mode = VarianceMode::pooled;
};

struct UnivariateResult {
  double statistic = 0.0;
  double sigma_hat = 0.0;
  double z = 0.0;
  double p_value = 0.0;
};

/// 1 - Phi(z).
double upper_tail_p(double z);

struct BinaryStatistic {
  double u_b = 0.0;
  double p_hat0 = 0.0;
  double p_hat1 = 0.0;
};

BinaryStatistic u_binary(const TrialDataset& ds, double tau_b);

/// Exact integral over the union of breakpoints of q, S0, S1 in [tau0, tau].
double u_survival(const TrialDataset& ds, double tau0, double tau, const StepFunction& q);
/// Same statistic with a deterministic weight; each constant piece of
/// S1 - S0 is integrated against q by Gauss-Legendre quadrature.
double u_survival(const TrialDataset& ds, double tau0, double tau,
                  const std::function<double(double)>& q);

/// K(t) = integral of q * s over [t, tau_star]; 0 for t >= tau_star.
double k_hat(const StepFunction& q, const StepFunction& s_pooled, double t, double tau_star);

/// Variance estimates (squared scale) of u_b and u_s, and their covariance.
double sigma_b_sq_hat(const TrialDataset& ds, double tau_b, VarianceMode mode);
double sigma_s_sq_hat(const TrialDataset& ds, double tau0, double tau, const StepFunction& q,
                      VarianceMode mode);
/// Covariance in the form selected by cfg.covariance.
double sigma_bs_hat(const TrialDataset& ds, const StudyConfig& cfg, const StepFunction& q,
                    VarianceMode mode);
/// Marginal (kernel joint-hazard) form with caller-supplied hazard fits.
double sigma_bs_hat(const TrialDataset& ds, const StudyConfig& cfg, const StepFunction& q,
                    const HazardEstimate& hazard0, const HazardEstimate& hazard1, VarianceMode mode);

/// Nuisance estimates shared by every component of the statistic.
///
/// Building it runs all product-limit passes and the kernel hazard fits once;
/// `result` can then be asked for either variance mode.
class StudyEstimates {
 public:
  StudyEstimates(const TrialDataset& ds, const StudyConfig& cfg);
  StudyEstimates(const TrialDataset& ds, const StudyConfig& cfg, StepFunction q);
  StudyEstimates(const TrialDataset& ds, const StudyConfig& cfg, StepFunction q,
                 std::optional<std::array<HazardEstimate, 2>> hazards);

  const TrialDataset& data() const { return *ds_; }
  const StudyConfig& config() const { return cfg_; }
  const StepFunction& q() const { return q_; }
  const StepFunction& s_pooled() const { return pooled_.survival; }
  const StepFunction& g_pooled() const { return pooled_.censoring; }
  const StepFunction& s(int g) const { return s_[static_cast<std::size_t>(g)]; }
  const StepFunction& g(int g) const { return g_[static_cast<std::size_t>(g)]; }
  const StepFunction& sx(int g) const { return sx_[static_cast<std::size_t>(g)]; }
  const std::optional<std::array<HazardEstimate, 2>>& hazards() const { return hazards_; }

  BinaryStatistic binary() const;
  double u_survival() const;
  double sigma_b_sq(VarianceMode mode) const;
  double sigma_s_sq(VarianceMode mode) const;
  double sigma_bs(VarianceMode mode) const;
  TestResult result(VarianceMode mode) const;

 private:
  void fit_hazards();

  const TrialDataset* ds_;
  StudyConfig cfg_;
  PooledKm pooled_;
  std::array<StepFunction, 2> s_;
  std::array<StepFunction, 2> g_;
  std::array<StepFunction, 2> sx_;
  StepFunction q_;
  std::optional<std::array<HazardEstimate, 2>> hazards_;
};

/// Validates, then assembles the standardized combined statistic. Throws
/// AssumptionViolation when validation blocks.
TestResult l_statistic(const TrialDataset& ds, const StudyConfig& cfg);
/// Both variance modes on one dataset: {pooled, unpooled}.
std::array<TestResult, 2> l_statistic_both(const TrialDataset& ds, const StudyConfig& cfg);

UnivariateResult binary_test(const TrialDataset& ds, const StudyConfig& cfg);
UnivariateResult survival_test(const TrialDataset& ds, const StudyConfig& cfg);

/// Drift parameters of a contiguous alternative.
struct NoncentralitySpec {
  double g = 0.0;                          // binary drift
  std::function<double(double)> drift;     // survival drift on [tau0, tau]
  std::function<double(double)> q;         // deterministic weight
};

/// omega_b g + omega_s * integral of Q * drift over [tau0, tau] (trapezoid, 1001 points).
double noncentrality(const NoncentralitySpec& spec, const StudyConfig& cfg);

}  // namespace bisurv
