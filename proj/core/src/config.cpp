#include "bisurv/config.hpp"

#include <cctype>
#include <cmath>

#include "bisurv/errors.hpp"

namespace bisurv {

std::string_view to_string(VarianceMode mode) {
  return mode == VarianceMode::pooled ? "pooled" : "unpooled";
}

namespace {
std::string lowered(std::string_view text) {
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower;
}
}  // namespace

VarianceMode parse_variance_mode(std::string_view text) {
  const auto lower = lowered(text);
  if (lower == "pooled") return VarianceMode::pooled;
  if (lower == "unpooled") return VarianceMode::unpooled;
  throw ConfigError("variance mode must be 'pooled' or 'unpooled', got '" + std::string(text) + "'");
}

std::string_view to_string(CovarianceForm form) {
  return form == CovarianceForm::compensated ? "compensated" : "marginal";
}

CovarianceForm parse_covariance_form(std::string_view text) {
  const auto lower = lowered(text);
  if (lower == "compensated") return CovarianceForm::compensated;
  if (lower == "marginal") return CovarianceForm::marginal;
  throw ConfigError("covariance form must be 'compensated' or 'marginal', got '" + std::string(text) + "'");
}

void WeightSpec::check() const {
  if (!(eta >= 0.0) || !(rho >= 0.0) || !(gamma >= 0.0))
    throw ConfigError("weight exponents eta, rho, gamma must be >= 0");
  if (piecewise_a && !(*piecewise_a >= 0.0 && *piecewise_a < 0.5))
    throw ConfigError("piecewise weight level a must lie in [0, 0.5)");
}

void StudyConfig::check() const {
  if (!std::isfinite(tau0) || !std::isfinite(tau_b) || !std::isfinite(tau))
    throw ConfigError("time points must be finite");
  if (!(tau0 >= 0.0 && tau0 < tau)) throw ConfigError("require 0 <= tau0 < tau");
  if (!(tau_b > 0.0 && tau_b <= tau)) throw ConfigError("require 0 < tau_b <= tau");
  if (!(omega_b > 0.0 && omega_b < 1.0 && omega_s > 0.0 && omega_s < 1.0))
    throw ConfigError("endpoint weights omega_b, omega_s must lie in (0, 1)");
  if (std::abs(omega_b + omega_s - 1.0) > 1e-9)
    throw ConfigError("endpoint weights must sum to 1");
  if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  weight.check();
}

}  // namespace bisurv
