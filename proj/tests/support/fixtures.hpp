#pragma once

#include <bisurv/dataset.hpp>
#include <vector>

namespace fixture {

// {group, binary, time, status}
inline bisurv::TrialDataset trial(std::vector<bisurv::SubjectRecord> recs) {
  return bisurv::TrialDataset(std::move(recs));
}

}  // namespace fixture
