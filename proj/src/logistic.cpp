#include "prospect/logistic.hpp"

#include <cmath>

namespace prospect {

const char* fairness_kind_name(FairnessKind kind) {
  switch (kind) {
    case FairnessKind::none: return "none";
    case FairnessKind::stat_parity: return "stat_parity";
    case FairnessKind::equal_opportunity: return "equal_opportunity";
  }
  return "none";
}

FairnessKind fairness_kind_from_name(const std::string& name) {
  if (name == "none") return FairnessKind::none;
  if (name == "stat_parity") return FairnessKind::stat_parity;
  if (name == "equal_opportunity") return FairnessKind::equal_opportunity;
  throw Error("unknown fairness kind: '" + name + "'");
}

namespace {

double log1pexp(double z) {
  // log(1 + e^z) without overflow.
  if (z > 35.0) return z;
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

}  // namespace

Eigen::VectorXd LogisticObjective::covariance_direction() const {
  const auto n = X.rows();
  const auto p = X.cols();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(p + 1);
  if (kind == FairnessKind::none) return d;
  if (sensitive == nullptr) throw SpecificationError("fairness penalty requires a sensitive attribute");

  // cov(eta, a) over S = (1/|S|) sum_{i in S} eta_i (a_i - mean_S(a));
  // linear in w, with direction (1/|S|) sum x_tilde_i (a_i - mean_S(a)).
  double a_sum = 0.0;
  long m = 0;
  for (long i = 0; i < n; ++i) {
    const bool in_set = kind == FairnessKind::stat_parity || y(i) == 1.0;
    if (!in_set) continue;
    a_sum += (*sensitive)(i);
    ++m;
  }
  if (m == 0) throw SpecificationError("equal_opportunity penalty: no positive outcomes");
  const double a_bar = a_sum / static_cast<double>(m);
  for (long i = 0; i < n; ++i) {
    const bool in_set = kind == FairnessKind::stat_parity || y(i) == 1.0;
    if (!in_set) continue;
    const double c = (*sensitive)(i) - a_bar;
    d(0) += c;
    d.tail(p) += c * X.row(i).transpose();
  }
  d /= static_cast<double>(m);
  return d;
}

double LogisticObjective::value(const Eigen::VectorXd& w) const {
  Eigen::VectorXd grad;
  return value_and_gradient(w, grad);
}

double LogisticObjective::value_and_gradient(const Eigen::VectorXd& w,
                                             Eigen::VectorXd& grad) const {
  const auto n = X.rows();
  const auto p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, w(0));
  eta.noalias() += X * w.tail(p);

  double nll = 0.0;
  Eigen::VectorXd resid(n);
  for (long i = 0; i < n; ++i) {
    nll += log1pexp(eta(i)) - y(i) * eta(i);
    resid(i) = sigmoid(eta(i)) - y(i);
  }
  nll *= inv_n;

  grad = Eigen::VectorXd::Zero(p + 1);
  grad(0) = resid.sum() * inv_n;
  grad.tail(p).noalias() = (X.transpose() * resid) * inv_n;

  double value = nll + 0.5 * lambda * w.tail(p).squaredNorm();
  grad.tail(p) += lambda * w.tail(p);

  if (kind != FairnessKind::none && gamma > 0.0) {
    const Eigen::VectorXd d = covariance_direction();
    const double cov = d.dot(w);
    value += gamma * cov * cov;
    grad += (2.0 * gamma * cov) * d;
  }
  return value;
}

void LogisticObjective::hessian(const Eigen::VectorXd& w, Eigen::MatrixXd& hess) const {
  const auto n = X.rows();
  const auto p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, w(0));
  eta.noalias() += X * w.tail(p);
  Eigen::VectorXd s(n);
  for (long i = 0; i < n; ++i) {
    const double pi = sigmoid(eta(i));
    s(i) = pi * (1.0 - pi);
  }
  hess.setZero(p + 1, p + 1);
  hess(0, 0) = s.sum() * inv_n;
  const Eigen::VectorXd xs = (X.transpose() * s) * inv_n;
  hess.block(1, 0, p, 1) = xs;
  hess.block(0, 1, 1, p) = xs.transpose();
  hess.block(1, 1, p, p).noalias() = (X.transpose() * s.asDiagonal() * X) * inv_n;
  for (long j = 1; j <= p; ++j) hess(j, j) += lambda;
  if (kind != FairnessKind::none && gamma > 0.0) {
    const Eigen::VectorXd d = covariance_direction();
    hess.noalias() += (2.0 * gamma) * (d * d.transpose());
  }
}

LogisticFit fit_logistic(const LogisticObjective& objective, const Eigen::VectorXd* warm_start,
                         int max_iter, double tol) {
  const auto p = objective.X.cols();
  Eigen::VectorXd w = warm_start ? *warm_start : Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd grad(p + 1), step(p + 1);
  Eigen::MatrixXd hess(p + 1, p + 1);

  double value = objective.value_and_gradient(w, grad);
  for (int iter = 1; iter <= max_iter; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < tol) return {w, iter - 1, grad.lpNorm<Eigen::Infinity>()};
    objective.hessian(w, hess);
    for (long j = 0; j <= p; ++j) hess(j, j) += 1e-10;  // guards near-singular solves
    step = hess.ldlt().solve(grad);

    // Armijo backtracking on the Newton direction.
    const double slope = grad.dot(step);
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd cand = w - t * step;
      const double cand_value = objective.value(cand);
      if (cand_value <= value - 1e-4 * t * slope) {
        w = cand;
        break;
      }
      t *= 0.5;
    }
    value = objective.value_and_gradient(w, grad);
  }
  if (grad.lpNorm<Eigen::Infinity>() < tol)
    return {w, max_iter, grad.lpNorm<Eigen::Infinity>()};
  throw ConvergenceError("logistic fit did not converge: gradient max-norm " +
                         std::to_string(grad.lpNorm<Eigen::Infinity>()) + " after " +
                         std::to_string(max_iter) + " iterations");
}

Eigen::VectorXd logistic_predict(const Eigen::MatrixXd& X, const Eigen::VectorXd& weights) {
  if (X.cols() + 1 != weights.size())
    throw Error("logistic_predict: feature dimension " + std::to_string(X.cols()) +
                " does not match model dimension " + std::to_string(weights.size() - 1));
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(X.rows(), weights(0));
  eta.noalias() += X * weights.tail(X.cols());
  for (long i = 0; i < eta.size(); ++i) eta(i) = sigmoid(eta(i));
  return eta;
}

namespace {

struct MultinomialWork {
  const Eigen::MatrixXd& X;
  const std::vector<int>& labels;
  int num_classes;
  double ridge;

  // Parameters as a flat vector, row-major over (K-1) x (p+1).
  double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                            Eigen::MatrixXd* probs_out) const {
    const long n = X.rows();
    const long p = X.cols();
    const long km1 = num_classes - 1;
    const double inv_n = 1.0 / static_cast<double>(n);

    Eigen::Map<const Eigen::MatrixXd> W(theta.data(), p + 1, km1);
    Eigen::MatrixXd eta(n, km1);
    for (long k = 0; k < km1; ++k) {
      eta.col(k) = Eigen::VectorXd::Constant(n, W(0, k));
      eta.col(k).noalias() += X * W.block(1, k, p, 1);
    }

    double nll = 0.0;
    Eigen::MatrixXd probs(n, num_classes);
    for (long i = 0; i < n; ++i) {
      double zmax = 0.0;
      for (long k = 0; k < km1; ++k) zmax = std::max(zmax, eta(i, k));
      double denom = std::exp(-zmax);
      for (long k = 0; k < km1; ++k) denom += std::exp(eta(i, k) - zmax);
      const double log_denom = std::log(denom) + zmax;
      const int yi = labels[i];
      const double eta_y = yi == 0 ? 0.0 : eta(i, yi - 1);
      nll += log_denom - eta_y;
      probs(i, 0) = std::exp(-log_denom);
      for (long k = 0; k < km1; ++k) probs(i, k + 1) = std::exp(eta(i, k) - log_denom);
    }
    nll *= inv_n;

    double penalty = 0.0;
    for (long k = 0; k < km1; ++k) penalty += W.block(1, k, p, 1).squaredNorm();
    const double value = nll + 0.5 * ridge * penalty;

    if (grad) {
      grad->setZero((p + 1) * km1);
      Eigen::Map<Eigen::MatrixXd> G(grad->data(), p + 1, km1);
      Eigen::MatrixXd resid(n, km1);
      for (long i = 0; i < n; ++i)
        for (long k = 0; k < km1; ++k)
          resid(i, k) = probs(i, k + 1) - (labels[i] == k + 1 ? 1.0 : 0.0);
      for (long k = 0; k < km1; ++k) {
        G(0, k) = resid.col(k).sum() * inv_n;
        G.block(1, k, p, 1).noalias() = (X.transpose() * resid.col(k)) * inv_n;
        G.block(1, k, p, 1) += ridge * W.block(1, k, p, 1);
      }
    }
    if (probs_out) *probs_out = std::move(probs);
    return value;
  }

  void hessian(const Eigen::MatrixXd& probs, Eigen::MatrixXd& hess) const {
    const long n = X.rows();
    const long p = X.cols();
    const long km1 = num_classes - 1;
    const long dim = (p + 1) * km1;
    const double inv_n = 1.0 / static_cast<double>(n);
    hess.setZero(dim, dim);
    Eigen::VectorXd wvec(n);
    Eigen::MatrixXd block(p + 1, p + 1);
    for (long k = 0; k < km1; ++k) {
      for (long l = k; l < km1; ++l) {
        for (long i = 0; i < n; ++i) {
          const double pk = probs(i, k + 1);
          const double pl = probs(i, l + 1);
          wvec(i) = k == l ? pk * (1.0 - pk) : -pk * pl;
        }
        block(0, 0) = wvec.sum() * inv_n;
        const Eigen::VectorXd xw = (X.transpose() * wvec) * inv_n;
        block.block(1, 0, p, 1) = xw;
        block.block(0, 1, 1, p) = xw.transpose();
        block.block(1, 1, p, p).noalias() = (X.transpose() * wvec.asDiagonal() * X) * inv_n;
        hess.block(k * (p + 1), l * (p + 1), p + 1, p + 1) = block;
        if (l != k) hess.block(l * (p + 1), k * (p + 1), p + 1, p + 1) = block.transpose();
      }
      for (long j = 1; j <= p; ++j) hess(k * (p + 1) + j, k * (p + 1) + j) += ridge;
    }
  }
};

}  // namespace

MultinomialFit fit_multinomial(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                               int num_classes, double ridge, int max_iter, double tol) {
  if (static_cast<long>(labels.size()) != X.rows())
    throw Error("fit_multinomial: label/feature length mismatch");
  const long p = X.cols();
  const long dim = (p + 1) * (num_classes - 1);
  MultinomialWork work{X, labels, num_classes, ridge};

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd grad(dim), step(dim);
  Eigen::MatrixXd probs, hess;
  double value = work.value_and_gradient(theta, &grad, &probs);
  for (int iter = 1; iter <= max_iter; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < tol) {
      MultinomialFit fit;
      fit.weights = Eigen::Map<Eigen::MatrixXd>(theta.data(), p + 1, num_classes - 1).transpose();
      fit.num_classes = num_classes;
      fit.iterations = iter - 1;
      fit.grad_norm = grad.lpNorm<Eigen::Infinity>();
      return fit;
    }
    work.hessian(probs, hess);
    for (long j = 0; j < dim; ++j) hess(j, j) += 1e-10;
    step = hess.ldlt().solve(grad);
    const double slope = grad.dot(step);
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd cand = theta - t * step;
      const double cand_value = work.value_and_gradient(cand, nullptr, nullptr);
      if (cand_value <= value - 1e-4 * t * slope) {
        theta = cand;
        break;
      }
      t *= 0.5;
    }
    value = work.value_and_gradient(theta, &grad, &probs);
  }
  if (grad.lpNorm<Eigen::Infinity>() < tol) {
    MultinomialFit fit;
    fit.weights = Eigen::Map<Eigen::MatrixXd>(theta.data(), p + 1, num_classes - 1).transpose();
    fit.num_classes = num_classes;
    fit.iterations = max_iter;
    fit.grad_norm = grad.lpNorm<Eigen::Infinity>();
    return fit;
  }
  throw ConvergenceError("multinomial fit did not converge: gradient max-norm " +
                         std::to_string(grad.lpNorm<Eigen::Infinity>()) + " after " +
                         std::to_string(max_iter) + " iterations");
}

Eigen::MatrixXd multinomial_predict(const Eigen::MatrixXd& X, const MultinomialFit& fit) {
  const long n = X.rows();
  const long p = X.cols();
  const long km1 = fit.num_classes - 1;
  if (fit.weights.cols() != p + 1) throw Error("multinomial_predict: feature dimension mismatch");
  Eigen::MatrixXd eta(n, km1);
  for (long k = 0; k < km1; ++k) {
    eta.col(k) = Eigen::VectorXd::Constant(n, fit.weights(k, 0));
    eta.col(k).noalias() += X * fit.weights.row(k).tail(p).transpose();
  }
  Eigen::MatrixXd probs(n, fit.num_classes);
  for (long i = 0; i < n; ++i) {
    double zmax = 0.0;
    for (long k = 0; k < km1; ++k) zmax = std::max(zmax, eta(i, k));
    double denom = std::exp(-zmax);
    for (long k = 0; k < km1; ++k) denom += std::exp(eta(i, k) - zmax);
    probs(i, 0) = std::exp(-zmax) / denom;
    for (long k = 0; k < km1; ++k) probs(i, k + 1) = std::exp(eta(i, k) - zmax) / denom;
  }
  return probs;
}

}  // namespace prospect
