#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace bisurv {

enum class VarianceMode { pooled, unpooled };

std::string_view to_string(VarianceMode mode);
VarianceMode parse_variance_mode(std::string_view text);

/// How the covariance of the binary and survival components is estimated.
///  compensated: counting-process plug-in whose compensator uses the
///    responder fraction among subjects still at risk, Y_X(t)/Y(t).
///  marginal: kernel joint-hazard form compensated by the overall response
///    rate p; biased low when response and survival are associated.
enum class CovarianceForm { compensated, marginal };

std::string_view to_string(CovarianceForm form);
CovarianceForm parse_covariance_form(std::string_view text);

/// Exponents and options of the survival weight
/// Q(t) = G(t-)^eta * S(t-)^rho * (1 - S(t-))^gamma [* f(t)] [* Y(t-)/n].
struct WeightSpec {
  double eta = 0.0;
  double rho = 0.0;
  double gamma = 0.0;
  // Two-level emphasis f(t) = a before tau_b and 1 - a from tau_b on.
  std::optional<double> piecewise_a;
  // Replace the pooled censoring factor G(t-)^eta by v_c(t)^eta, the
  // two-sample censoring weight (eta = 0.5 gives its square root).
  bool use_vc = false;
  // Multiply by the normalized pooled at-risk fraction Y(t-)/n.
  bool use_at_risk = false;

  void check() const;
};

struct StudyConfig {
  double tau0 = 0.0;
  double tau_b = 1.0;
  double tau = 1.0;
  double omega_b = 0.5;
  double omega_s = 0.5;
  WeightSpec weight;
  VarianceMode variance_mode = VarianceMode::pooled;
  CovarianceForm covariance = CovarianceForm::compensated;
  // Kernel bandwidth for the joint-hazard estimate; default (tau_b - tau0) / 8.
  std::optional<double> bandwidth;

  double tau_max() const { return tau0 > tau_b ? tau0 : tau_b; }
  /// Throws ConfigError on a violated invariant.
  void check() const;
};

}  // namespace bisurv
