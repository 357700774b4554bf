#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>

#include "bisurv/config.hpp"
#include "bisurv/copula.hpp"

namespace bisurv {

/// True laws of one simulated arm.
struct ArmLaw {
  double shape = 1.0;              // Weibull a
  double scale = 1.0;              // Weibull b
  double p = 0.2;                  // response probability
  std::optional<double> c;         // Uniform(0, c) censoring; none = uncensored

  double survival(double t) const;     // e^{-(t/b)^a}
  double density(double t) const;      // -dS/dt
  double censoring(double t) const;    // 1 - t/c on [0, c]
  double at_risk(double t) const { return survival(t) * censoring(t); }
};

/// Population counterpart of a simulation scenario.
struct TheoreticalModel {
  std::array<ArmLaw, 2> arms;
  double pi0 = 0.5;
  double theta = 0.001;

  static TheoreticalModel from_scenario(const Scenario& sc);
  double pi(int group) const { return group == 0 ? pi0 : 1.0 - pi0; }
  /// theta at or below 0.001 is treated as independence of X and T.
  bool independent() const { return std::abs(theta) <= 1e-3; }
};

struct TheoreticalSigma {
  double sigma_b_sq = 0.0;
  double sigma_s_sq = 0.0;
  std::optional<double> sigma_bs;  // set only for the independence model (0)
};

/// Closed-form binary variance and adaptive nested quadrature of the survival
/// variance -sum_i (1 - pi_i) int K_i(t)^2 / (S_i(t)^2 G_i(t)) dS_i(t),
/// K_i(t) = int_t^tau q S_i, relative tolerance 1e-6 or better.
TheoreticalSigma theoretical_sigma(const TheoreticalModel& model, const StudyConfig& cfg,
                                   const std::function<double(double)>& q_true);

/// Covariance of the two components; only the independence model is
/// supported (where it is exactly 0). Throws UnsupportedModel otherwise.
double theoretical_sigma_bs(const TheoreticalModel& model, const StudyConfig& cfg);

/// Deterministic limit of the estimated weight under equal arm laws:
/// G(t)^eta S(t)^rho (1 - S(t))^gamma [* f(t)] [* y(t)].
std::function<double(double)> true_weight(const TheoreticalModel& model, const WeightSpec& spec,
                                          double tau_b);

}  // namespace bisurv
