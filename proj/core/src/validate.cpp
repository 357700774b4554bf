#include <sstream>

#include "bisurv/dataset.hpp"
#include "bisurv/km.hpp"

namespace bisurv {

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& b : blocking_issues) os << "blocking: " << b << '\n';
  for (const auto& w : warnings) os << "warning: " << w << '\n';
  return os.str();
}

ValidationReport validate(const TrialDataset& ds, const StudyConfig& cfg) {
  ValidationReport rep;
  const auto rt = risk_table(ds);
  for (int g = 0; g < 2; ++g) {
    auto& chk = rep.groups[static_cast<std::size_t>(g)];
    const std::string arm = "arm " + std::to_string(g);
    const auto s = group_km(ds, g);
    const auto cens = group_censoring_km(ds, g);
    chk.survival_at_tau = s(cfg.tau);
    chk.censoring_at_tau = cens(cfg.tau);
    chk.responders = ds.responders(g);
    chk.at_risk_at_tau = at_risk(ds, g, cfg.tau);
    if (chk.responders > 0) chk.responder_survival_at_tau = responders_km(ds, g)(cfg.tau);

    if (!(chk.survival_at_tau > 0.0))
      rep.blocking_issues.push_back(arm + ": survival KM is 0 at tau (S(tau) > 0 required)");
    if (chk.responders == 0)
      rep.blocking_issues.push_back(arm + ": no responders; responder survival S_X undefined");
    else if (!(chk.responder_survival_at_tau > 0.0)) {
      // only the marginal covariance form divides by S_X
      auto& sink = cfg.covariance == CovarianceForm::marginal ? rep.blocking_issues : rep.warnings;
      sink.push_back(arm + ": responder survival KM is 0 at tau (S_X(tau) > 0 assumed)");
    }

    for (std::size_t k = 0; k < rt.times.size(); ++k) {
      const double u = rt.times[k];
      if (u < cfg.tau0) continue;
      if (u > cfg.tau) break;
      if (!(cens.left_limit(u) > 0.0)) {
        chk.censoring_support = false;
        rep.blocking_issues.push_back(arm + ": censoring KM reaches 0 before the event at t=" +
                                      std::to_string(u) + " (support exhausted)");
        break;
      }
    }
    if (!(chk.censoring_at_tau > 0.0))
      rep.warnings.push_back(arm + ": censoring KM is 0 at tau (G(tau) > 0 assumed)");
    if (chk.at_risk_at_tau == 0)
      rep.warnings.push_back(arm + ": nobody at risk at tau; KM carried flat from the last observation");
  }
  return rep;
}

}  // namespace bisurv
