#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "prospect/features.hpp"
#include "prospect/forest.hpp"
#include "prospect/logistic.hpp"
#include "prospect/types.hpp"

namespace prospect {

struct CausalOptions {
  int folds = 2;
  double e_min = 0.01;      // propensity clip floor
  double ridge = 1e-4;      // nuisance ridge on slopes
  std::uint64_t seed = 0;
  ForestParams forest;      // IAPO regression forests
  // When set, nuisance models see only these feature columns (by name);
  // used to study robustness under deliberate misspecification.
  std::optional<std::vector<std::string>> feature_subset;
};

// Cross-fitted multinomial propensities: out-of-fold predictions only,
// clipped to [e_min, 1] and renormalized so rows sum to one.
struct PropensityModel {
  Eigen::MatrixXd predictions;  // n x 7
  std::vector<int> fold_of;     // fold that held each row out
  double e_min = 0.01;
};

// Cross-fitted per-arm outcome means mu(d, x) on the observed allocation.
struct OutcomeModel {
  Eigen::MatrixXd predictions;  // n x 7, out-of-fold for every arm
  std::vector<int> fold_of;
};

struct DrScoreTable {
  Eigen::MatrixXd scores;  // n x 7; entries may fall outside [0,1]
};

struct IapoTable {
  Eigen::MatrixXd po;  // n x 7, clipped to [0,1]

  int size() const { return static_cast<int>(po.rows()); }
};

struct AteResult {
  double estimate = 0.0;
  double standard_error = 0.0;
};

// With folds == 2 the cross-fitting folds are exactly the halves of `split`,
// honoring the 50/50 design; other fold counts use a seeded arm-stratified
// assignment. Fits use the full sample; predictions are out-of-fold.
PropensityModel fit_propensity(const Population& pop, const SplitSpec& split,
                               const CausalOptions& options);

OutcomeModel fit_outcome_model(const Population& pop, const SplitSpec& split,
                               const CausalOptions& options);

// Gamma = mu + treated * (y - mu) / e. Throws PositivityError when e <= 0.
double dr_score(double mu, double e, double y, int treated);

DrScoreTable dr_score_table(const Population& pop, const PropensityModel& propensity,
                            const OutcomeModel& outcome);

// One regression forest per arm, trained on the training half of `split`
// with the DR scores as pseudo-outcomes; predictions for all rows.
IapoTable fit_iapo(const DrScoreTable& scores, const FeatureMatrix& features,
                   const SplitSpec& split, const CausalOptions& options);

Eigen::VectorXd iate(const IapoTable& iapo, ProgramId d, ProgramId d_ref = ProgramId::no_program);

AteResult ate(const DrScoreTable& scores, ProgramId d, ProgramId d_ref = ProgramId::no_program);

}  // namespace prospect
