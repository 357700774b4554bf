#include "bisurv/theory.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "bisurv/errors.hpp"
#include "bisurv/weights.hpp"

namespace bisurv {

double ArmLaw::survival(double t) const {
  if (t <= 0.0) return 1.0;
  return std::exp(-std::pow(t / scale, shape));
}

double ArmLaw::density(double t) const {
  if (t <= 0.0) return 0.0;
  const double z = t / scale;
  return shape / scale * std::pow(z, shape - 1.0) * std::exp(-std::pow(z, shape));
}

double ArmLaw::censoring(double t) const {
  if (!c) return 1.0;
  return std::max(0.0, 1.0 - t / *c);
}

TheoreticalModel TheoreticalModel::from_scenario(const Scenario& sc) {
  TheoreticalModel m;
  for (int g = 0; g < 2; ++g) {
    auto& arm = m.arms[static_cast<std::size_t>(g)];
    arm.shape = sc.a;
    arm.scale = sc.scale(g);
    arm.p = sc.p(g);
    arm.c = sc.c;
  }
  m.pi0 = 0.5;
  m.theta = sc.theta;
  return m;
}

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kDepth = 15;
constexpr double kTol = 1e-10;

}  // namespace

TheoreticalSigma theoretical_sigma(const TheoreticalModel& model, const StudyConfig& cfg,
                                   const std::function<double(double)>& q_true) {
  TheoreticalSigma out;
  const double tau0 = cfg.tau0;
  const double tau = cfg.tau;
  for (int i = 0; i < 2; ++i) {
    const auto& arm = model.arms[static_cast<std::size_t>(i)];
    const double weight = 1.0 - model.pi(i);
    out.sigma_b_sq += weight * arm.p * (1.0 - arm.p);

    const auto k = [&](double t) {
      if (t >= tau) return 0.0;
      return Quad::integrate([&](double u) { return q_true(u) * arm.survival(u); }, t, tau, kDepth, kTol);
    };
    const auto integrand = [&](double t) {
      const double g = arm.censoring(t);
      const double s = arm.survival(t);
      if (!(g > 0.0) || !(s > 0.0)) return 0.0;
      const double kk = k(t);
      return kk * kk * arm.density(t) / (s * s * g);
    };
    out.sigma_s_sq += weight * Quad::integrate(integrand, tau0, tau, kDepth, kTol);
  }
  if (model.independent()) out.sigma_bs = 0.0;
  return out;
}

double theoretical_sigma_bs(const TheoreticalModel& model, const StudyConfig& /*cfg*/) {
  if (!model.independent())
    throw UnsupportedModel("theoretical covariance is only available for the independence model");
  return 0.0;
}

std::function<double(double)> true_weight(const TheoreticalModel& model, const WeightSpec& spec,
                                          double tau_b) {
  return [model, spec, tau_b](double t) {
    const auto& arm = model.arms[0];
    const double s = arm.survival(t);
    double q = pow0(s, spec.rho) * pow0(1.0 - s, spec.gamma);
    if (spec.eta != 0.0) {
      double g;
      if (spec.use_vc) {
        const double g0 = model.arms[0].censoring(t);
        const double g1 = model.arms[1].censoring(t);
        const double den = model.pi(0) * g0 + model.pi(1) * g1;
        g = den > 0.0 ? g0 * g1 / den : 0.0;
      } else {
        g = arm.censoring(t);
      }
      q *= pow0(g, spec.eta);
    }
    if (spec.piecewise_a) q *= t < tau_b ? *spec.piecewise_a : 1.0 - *spec.piecewise_a;
    if (spec.use_at_risk) q *= model.pi(0) * model.arms[0].at_risk(t) + model.pi(1) * model.arms[1].at_risk(t);
    return q;
  };
}

}  // namespace bisurv
