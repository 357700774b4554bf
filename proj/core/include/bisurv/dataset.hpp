#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bisurv/config.hpp"

namespace bisurv {

/// One subject: arm, binary response, observed time min(T, C), event flag.
struct SubjectRecord {
  int group = 0;
  int binary = 0;
  double time = 0.0;
  int status = 0;

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

/// Two-arm binary + right-censored survival sample.
///
/// Records are kept sorted by time, events before censorings at tied times;
/// every product-limit pass over the data relies on that order.
class TrialDataset {
 public:
  /// Throws RowError for an out-of-domain record and InsufficientDataError
  /// when an arm has fewer than two subjects.
  explicit TrialDataset(std::vector<SubjectRecord> records);

  std::span<const SubjectRecord> records() const { return records_; }
  std::size_t n(int group) const { return counts_[static_cast<std::size_t>(group)]; }
  std::size_t n_total() const { return records_.size(); }
  double pi_hat(int group) const { return pi_[static_cast<std::size_t>(group)]; }

  std::size_t responders(int group) const { return responders_[static_cast<std::size_t>(group)]; }
  /// Responder fraction in one arm.
  double p_hat(int group) const;
  /// Responder fraction with both arms combined.
  double p_hat_pooled() const;

  double last_time() const { return records_.back().time; }
  double last_time(int group) const;

  /// Same subjects with the arm labels swapped.
  TrialDataset relabeled() const;
  /// All times multiplied by k > 0.
  TrialDataset rescaled(double k) const;

 private:
  std::vector<SubjectRecord> records_;
  std::array<std::size_t, 2> counts_{};
  std::array<std::size_t, 2> responders_{};
  std::array<double, 2> pi_{};
};

/// Reads `time,status,binary,treat` CSV (header required, any column order,
/// case-insensitive names, extra columns ignored).
TrialDataset parse_csv(std::istream& in);
TrialDataset parse_csv(std::string_view text);
void write_csv(std::ostream& out, const TrialDataset& ds);

struct GroupCheck {
  double survival_at_tau = 0.0;
  double censoring_at_tau = 0.0;
  double responder_survival_at_tau = 0.0;
  std::size_t responders = 0;
  std::size_t at_risk_at_tau = 0;
  // censoring KM strictly positive just before every event time in [tau0, tau]
  bool censoring_support = true;
};

/// Outcome of checking a dataset against the estimators' assumptions.
///
/// Failures that make an estimator undefined or degenerate are blocking;
/// censoring-support shortfalls at tau itself are reported as warnings
/// (see README, "Validation").
struct ValidationReport {
  std::array<GroupCheck, 2> groups;
  std::vector<std::string> blocking_issues;
  std::vector<std::string> warnings;

  bool blocking() const { return !blocking_issues.empty(); }
  std::string summary() const;
};

ValidationReport validate(const TrialDataset& ds, const StudyConfig& cfg);

}  // namespace bisurv
