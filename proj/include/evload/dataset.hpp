#pragma once

#include <string>
#include <vector>

#include "evload/model.hpp"

namespace evload {

/// One training pair: location features and the observed daily load curve.
struct Sample {
  model::FeatureVector features;
  std::vector<double> target;
  std::string charger_id;
  std::string bucket;
};

using Dataset = std::vector<Sample>;

}  // namespace evload
