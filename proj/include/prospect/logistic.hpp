#pragma once

#include <Eigen/Dense>

#include "prospect/types.hpp"

namespace prospect {

enum class FairnessKind { none, stat_parity, equal_opportunity };

const char* fairness_kind_name(FairnessKind kind);
FairnessKind fairness_kind_from_name(const std::string& name);

// Mean negative log-likelihood with a ridge on the slopes (intercept never
// penalized) and an optional squared-covariance fairness penalty:
//   stat_parity:       + gamma * cov(eta, a)^2          over all rows
//   equal_opportunity: + gamma * cov(eta, a | y = 1)^2  over positive rows
// Weights are laid out [intercept, slopes...]; X carries no intercept column.
struct LogisticObjective {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  double lambda = 0.0;
  FairnessKind kind = FairnessKind::none;
  double gamma = 0.0;
  const Eigen::VectorXd* sensitive = nullptr;  // required when kind != none

  double value(const Eigen::VectorXd& w) const;
  double value_and_gradient(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const;
  void hessian(const Eigen::VectorXd& w, Eigen::MatrixXd& hess) const;

  // Direction d with cov(eta, a) = d . w; fixed in w, so the penalty term is
  // gamma * (d . w)^2.
  Eigen::VectorXd covariance_direction() const;
};

struct LogisticFit {
  Eigen::VectorXd weights;  // [intercept, slopes...]
  int iterations = 0;
  double grad_norm = 0.0;
};

// Damped Newton; converged when the gradient max-norm drops below tol.
// Throws ConvergenceError when max_iter is exhausted.
LogisticFit fit_logistic(const LogisticObjective& objective,
                         const Eigen::VectorXd* warm_start = nullptr, int max_iter = 500,
                         double tol = 1e-8);

Eigen::VectorXd logistic_predict(const Eigen::MatrixXd& X, const Eigen::VectorXd& weights);

// Multinomial logistic with class 0 as the reference (its weight row is
// implicitly zero) and ridge on all non-intercept weights.
struct MultinomialFit {
  Eigen::MatrixXd weights;  // (K-1) x (p+1), column 0 = intercepts
  int num_classes = 0;
  int iterations = 0;
  double grad_norm = 0.0;
};

MultinomialFit fit_multinomial(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                               int num_classes, double ridge, int max_iter = 500,
                               double tol = 1e-8);

// n x K matrix of class probabilities.
Eigen::MatrixXd multinomial_predict(const Eigen::MatrixXd& X, const MultinomialFit& fit);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace prospect
