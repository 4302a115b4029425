#include "prospect/causal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "prospect/rng.hpp"

namespace prospect {

namespace {

Eigen::MatrixXd select_columns(const FeatureMatrix& fm,
                               const std::optional<std::vector<std::string>>& subset) {
  if (!subset) return fm.values;
  std::vector<int> cols;
  for (const auto& name : *subset) {
    auto it = std::find(fm.names.begin(), fm.names.end(), name);
    if (it == fm.names.end()) throw Error("feature subset names unknown column '" + name + "'");
    cols.push_back(static_cast<int>(it - fm.names.begin()));
  }
  Eigen::MatrixXd out(fm.values.rows(), static_cast<long>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<long>(j)) = fm.values.col(cols[j]);
  return out;
}

// Column-standardized copy; constant columns stay centered at zero.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& X, Eigen::VectorXd& mean, Eigen::VectorXd& scale) {
  mean = X.colwise().mean();
  Eigen::MatrixXd out = X.rowwise() - mean.transpose();
  scale.resize(X.cols());
  for (long j = 0; j < X.cols(); ++j) {
    const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(X.rows()));
    scale(j) = sd > 1e-12 ? sd : 1.0;
    out.col(j) /= scale(j);
  }
  return out;
}

std::vector<int> fold_assignment(const Population& pop, const SplitSpec& split, int folds,
                                 std::uint64_t seed) {
  const int n = pop.size();
  std::vector<int> fold_of(n, -1);
  if (folds == 2) {
    for (int i : split.train_ids) fold_of[i] = 0;
    for (int i : split.test_ids) fold_of[i] = 1;
    for (int i = 0; i < n; ++i)
      if (fold_of[i] < 0) throw Error("split does not cover the population");
    return fold_of;
  }
  // Arm-stratified round-robin over a seeded shuffle.
  std::map<int, std::vector<int>> by_arm;
  for (int i = 0; i < n; ++i)
    by_arm[pop.decisions ? static_cast<int>((*pop.decisions)[i]) : 0].push_back(i);
  Rng rng = Rng(seed).substream(0xF01D);
  for (auto& [arm, ids] : by_arm) {
    rng.substream(static_cast<std::uint64_t>(arm)).shuffle(ids);
    for (std::size_t k = 0; k < ids.size(); ++k)
      fold_of[ids[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

void require_arms_populated(const Population& pop, int folds) {
  const auto counts = pop.arm_counts();
  std::string empty, thin;
  for (int d = 0; d < kNumPrograms; ++d) {
    if (counts[d] == 0) empty += std::string(empty.empty() ? "" : ", ") + kProgramNames[d];
    else if (counts[d] < folds) thin += std::string(thin.empty() ? "" : ", ") + kProgramNames[d];
  }
  if (!empty.empty()) throw EstimationError("no observations in arm(s): " + empty);
  if (!thin.empty())
    throw EstimationError("fewer observations than folds in arm(s): " + thin);
}

}  // namespace

PropensityModel fit_propensity(const Population& pop, const SplitSpec& split,
                               const CausalOptions& options) {
  if (!pop.decisions) throw EstimationError("fit_propensity: decisions not observed");
  require_arms_populated(pop, options.folds);
  if (options.e_min <= 0.0) throw Error("e_min must be > 0");

  const FeatureMatrix fm = build_features(pop, FeatureSet::causal);
  const Eigen::MatrixXd X = select_columns(fm, options.feature_subset);
  const int n = pop.size();

  PropensityModel model;
  model.e_min = options.e_min;
  model.fold_of = fold_assignment(pop, split, options.folds, options.seed);
  model.predictions.resize(n, kNumPrograms);

  for (int fold = 0; fold < options.folds; ++fold) {
    std::vector<int> fit_rows, holdout_rows;
    for (int i = 0; i < n; ++i)
      (model.fold_of[i] == fold ? holdout_rows : fit_rows).push_back(i);
    if (fit_rows.empty() || holdout_rows.empty())
      throw EstimationError("fit_propensity: a fold is empty");

    Eigen::MatrixXd Xfit(fit_rows.size(), X.cols());
    std::vector<int> labels(fit_rows.size());
    std::set<int> seen;
    for (std::size_t k = 0; k < fit_rows.size(); ++k) {
      Xfit.row(static_cast<long>(k)) = X.row(fit_rows[k]);
      labels[k] = static_cast<int>((*pop.decisions)[fit_rows[k]]);
      seen.insert(labels[k]);
    }
    if (static_cast<int>(seen.size()) < kNumPrograms) {
      std::string missing;
      for (int d = 0; d < kNumPrograms; ++d)
        if (!seen.count(d)) missing += std::string(missing.empty() ? "" : ", ") + kProgramNames[d];
      throw EstimationError("fit_propensity: fold " + std::to_string(fold) +
                            " lacks observations in arm(s): " + missing);
    }

    Eigen::VectorXd mean, scale;
    const Eigen::MatrixXd Xs = standardize(Xfit, mean, scale);
    const MultinomialFit fit = fit_multinomial(Xs, labels, kNumPrograms, options.ridge);

    Eigen::MatrixXd Xhold(holdout_rows.size(), X.cols());
    for (std::size_t k = 0; k < holdout_rows.size(); ++k)
      Xhold.row(static_cast<long>(k)) = X.row(holdout_rows[k]);
    Xhold.rowwise() -= mean.transpose();
    Xhold.array().rowwise() /= scale.transpose().array();
    const Eigen::MatrixXd probs = multinomial_predict(Xhold, fit);
    for (std::size_t k = 0; k < holdout_rows.size(); ++k)
      model.predictions.row(holdout_rows[k]) = probs.row(static_cast<long>(k));
  }

  // Clip then renormalize; rows sum to one afterwards.
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < kNumPrograms; ++d)
      model.predictions(i, d) = std::clamp(model.predictions(i, d), options.e_min, 1.0);
    model.predictions.row(i) /= model.predictions.row(i).sum();
  }
  return model;
}

OutcomeModel fit_outcome_model(const Population& pop, const SplitSpec& split,
                               const CausalOptions& options) {
  if (!pop.outcomes) throw EstimationError("fit_outcome_model: outcomes not observed");
  if (!pop.decisions) throw EstimationError("fit_outcome_model: decisions not observed");
  require_arms_populated(pop, options.folds);

  const FeatureMatrix fm = build_features(pop, FeatureSet::causal);
  const Eigen::MatrixXd X = select_columns(fm, options.feature_subset);
  const int n = pop.size();

  OutcomeModel model;
  model.fold_of = fold_assignment(pop, split, options.folds, options.seed);
  model.predictions.resize(n, kNumPrograms);

  for (int fold = 0; fold < options.folds; ++fold) {
    std::vector<int> holdout_rows;
    for (int i = 0; i < n; ++i)
      if (model.fold_of[i] == fold) holdout_rows.push_back(i);

    Eigen::MatrixXd Xhold(holdout_rows.size(), X.cols());
    for (std::size_t k = 0; k < holdout_rows.size(); ++k)
      Xhold.row(static_cast<long>(k)) = X.row(holdout_rows[k]);

    for (int d = 0; d < kNumPrograms; ++d) {
      std::vector<int> arm_rows;
      for (int i = 0; i < n; ++i)
        if (model.fold_of[i] != fold && static_cast<int>((*pop.decisions)[i]) == d)
          arm_rows.push_back(i);
      if (arm_rows.empty())
        throw EstimationError(std::string("fit_outcome_model: fold ") + std::to_string(fold) +
                              " has no observations in arm " + kProgramNames[d]);

      Eigen::MatrixXd Xarm(arm_rows.size(), X.cols());
      Eigen::VectorXd yarm(arm_rows.size());
      for (std::size_t k = 0; k < arm_rows.size(); ++k) {
        Xarm.row(static_cast<long>(k)) = X.row(arm_rows[k]);
        yarm(static_cast<long>(k)) = (*pop.outcomes)[arm_rows[k]];
      }
      Eigen::VectorXd mean, scale;
      const Eigen::MatrixXd Xs = standardize(Xarm, mean, scale);
      const LogisticObjective objective{Xs, yarm, options.ridge};
      const LogisticFit fit = fit_logistic(objective);

      Eigen::MatrixXd Xh = Xhold;
      Xh.rowwise() -= mean.transpose();
      Xh.array().rowwise() /= scale.transpose().array();
      const Eigen::VectorXd mu = logistic_predict(Xh, fit.weights);
      for (std::size_t k = 0; k < holdout_rows.size(); ++k)
        model.predictions(holdout_rows[k], d) = mu(static_cast<long>(k));
    }
  }
  return model;
}

double dr_score(double mu, double e, double y, int treated) {
  if (e <= 0.0)
    throw PositivityError("dr_score: propensity " + std::to_string(e) +
                          " violates positivity (no-unprecedented-decisions overlap)");
  if (e > 1.0) throw Error("dr_score: propensity above 1");
  return mu + (treated != 0 ? (y - mu) / e : 0.0);
}

DrScoreTable dr_score_table(const Population& pop, const PropensityModel& propensity,
                            const OutcomeModel& outcome) {
  if (!pop.decisions || !pop.outcomes)
    throw EstimationError("dr_score_table: decisions and outcomes required");
  const int n = pop.size();
  DrScoreTable table;
  table.scores.resize(n, kNumPrograms);
  for (int i = 0; i < n; ++i) {
    const int di = static_cast<int>((*pop.decisions)[i]);
    const double yi = (*pop.outcomes)[i];
    for (int d = 0; d < kNumPrograms; ++d)
      table.scores(i, d) = dr_score(outcome.predictions(i, d), propensity.predictions(i, d), yi,
                                    di == d ? 1 : 0);
  }
  return table;
}

IapoTable fit_iapo(const DrScoreTable& scores, const FeatureMatrix& features,
                   const SplitSpec& split, const CausalOptions& options) {
  if (!scores.scores.allFinite()) throw EstimationError("fit_iapo: non-finite pseudo-outcomes");
  if (split.train_ids.empty()) throw EstimationError("fit_iapo: empty training set");

  const Eigen::MatrixXd& X = features.values;
  Eigen::MatrixXd Xtrain(split.train_ids.size(), X.cols());
  for (std::size_t k = 0; k < split.train_ids.size(); ++k)
    Xtrain.row(static_cast<long>(k)) = X.row(split.train_ids[k]);

  IapoTable table;
  table.po.resize(X.rows(), kNumPrograms);
  for (int d = 0; d < kNumPrograms; ++d) {
    Eigen::VectorXd target(split.train_ids.size());
    for (std::size_t k = 0; k < split.train_ids.size(); ++k)
      target(static_cast<long>(k)) = scores.scores(split.train_ids[k], d);
    ForestParams params = options.forest;
    params.seed = Rng(options.seed).substream(0x1AB0, static_cast<std::uint64_t>(d)).next_u64();
    RegressionForest forest;
    forest.fit(Xtrain, target, split.train_ids, params);
    table.po.col(d) = forest.predict(X);
    for (long i = 0; i < table.po.rows(); ++i)
      table.po(i, d) = std::clamp(table.po(i, d), 0.0, 1.0);
  }
  return table;
}

Eigen::VectorXd iate(const IapoTable& iapo, ProgramId d, ProgramId d_ref) {
  return iapo.po.col(static_cast<int>(d)) - iapo.po.col(static_cast<int>(d_ref));
}

AteResult ate(const DrScoreTable& scores, ProgramId d, ProgramId d_ref) {
  const long n = scores.scores.rows();
  if (n < 2) throw EstimationError("ate: need at least 2 observations");
  const Eigen::VectorXd diff =
      scores.scores.col(static_cast<int>(d)) - scores.scores.col(static_cast<int>(d_ref));
  AteResult result;
  result.estimate = diff.mean();
  const double ss = (diff.array() - result.estimate).square().sum();
  result.standard_error = std::sqrt(ss / static_cast<double>(n - 1)) /
                          std::sqrt(static_cast<double>(n));
  return result;
}

}  // namespace prospect
