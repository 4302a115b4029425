#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "prospect/types.hpp"

namespace prospect {

// Logit shift of one program relative to no_program, plus interaction terms
// on the centered covariate transforms.
struct ProgramEffect {
  double delta = 0.0;
  std::map<std::string, double> interactions;
};

// Multinomial-logit utility of one program; no_program is the reference arm
// with utility 0.
struct SelectionModel {
  double intercept = 0.0;
  std::map<std::string, double> coefficients;
};

// Fully specified structural model: covariate marginals are fixed (see
// generate_population), the LTU logit and the selection utilities are linear
// in the centered covariate transforms listed in kScmCovariates.
struct ScmConfig {
  int n = 0;
  std::uint64_t seed = 0;
  double base_intercept = 0.0;
  std::map<std::string, double> covariate_effects;
  double gender_penalty = 0.0;   // added for female x married
  double citizen_penalty = 0.0;  // added for non_citizen
  std::array<ProgramEffect, kNumPrograms> program_effects;   // [no_program] stays zero
  std::array<SelectionModel, kNumPrograms> selection;        // [no_program] is the reference

  void validate() const;
};

inline constexpr std::array<const char*, 9> kScmCovariates = {
    "female",       "non_citizen", "age",          "married",        "log_income",
    "emp_frac_2y",  "ue_spells_2y", "employability", "female_married"};

// Centered transform used by the SCM logits (age - 36.8, log income - 10.58,
// employability - 1.93, emp_frac - 0.62, ue_spells - 0.8; binaries raw).
double scm_covariate(const IndividualRecord& r, const std::string& name);

struct GroundTruth {
  Eigen::MatrixXd po_table;         // n x 7, P(Y^d = 1 | a, x)
  Eigen::MatrixXd true_propensity;  // n x 7, rows sum to 1

  int size() const { return static_cast<int>(po_table.rows()); }
};

// Draws covariates, potential outcomes, status-quo decisions, and realized
// outcomes; Consistency holds by construction (Y is drawn from po[i, d_i]).
std::pair<Population, GroundTruth> generate_population(const ScmConfig& cfg);

double true_potential_outcome(const GroundTruth& gt, int i, ProgramId d);

// Fresh multinomial draw per individual from the stored propensity rows.
std::vector<ProgramId> status_quo_assign(const GroundTruth& gt, std::uint64_t seed);

// Bernoulli(po[i, d_i]) per individual; used for consistency checks and for
// re-realizing outcomes under forced decisions.
std::vector<int> draw_outcomes(const GroundTruth& gt, const std::vector<ProgramId>& decisions,
                               std::uint64_t seed);

// Expected status-quo LTU rate: mean_i sum_d propensity(i,d) * po(i,d).
double expected_status_quo_rate(const GroundTruth& gt);

// Calibration helpers; each returns the tuned config.
ScmConfig calibrate_base_intercept(ScmConfig cfg, double target_ltu, double tol = 1e-4);
ScmConfig calibrate_program_deltas(ScmConfig cfg,
                                   const std::array<double, kNumPrograms>& target_mean_effects,
                                   double tol = 1e-4);
ScmConfig calibrate_selection_intercepts(ScmConfig cfg,
                                         const std::array<double, kNumPrograms>& target_shares,
                                         int rounds = 60);

// The shipped default: calibrated against the published status-quo margins.
ScmConfig default_scm_config(int n, std::uint64_t seed);

}  // namespace prospect
