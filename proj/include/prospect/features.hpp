#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "prospect/types.hpp"

namespace prospect {

// Risk scores may only use what is known at registration time; nuisance
// models for the causal stage additionally see the caseworker rating and
// the female x married interaction.
enum class FeatureSet { registration, causal };

struct FeatureMatrix {
  Eigen::MatrixXd values;  // n x p, no intercept column
  std::vector<std::string> names;
};

// Income enters as log(1 + CHF); everything else is raw.
FeatureMatrix build_features(const Population& pop, FeatureSet set);

}  // namespace prospect
