#include "pxt/ordinal_logit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>

namespace pxt {

Eigen::VectorXd OrdinalLogitModel::cumulative_probabilities(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double eta = coefficients.dot(x);
  Eigen::VectorXd out(thresholds.size());
  for (Eigen::Index j = 0; j < thresholds.size(); ++j) out(j) = special::logistic(thresholds(j) - eta);
  return out;
}

namespace {

using Objective = OrdinalLogitObjective<double>;

}  // namespace

OrdinalLogitModel fit_ordinal_logit(const Eigen::Ref<const Eigen::MatrixXd>& x, const std::vector<int>& y,
                                    std::vector<std::string> names, const OrdinalLogitOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (static_cast<Eigen::Index>(y.size()) != n) throw Error(ErrorCode::LengthMismatch, "X and y differ in length");
  if (names.empty()) {
    for (Eigen::Index c = 0; c < k; ++c) names.push_back("x" + std::to_string(c));
  }
  if (static_cast<Eigen::Index>(names.size()) != k) throw Error(ErrorCode::LengthMismatch, "name count != columns");

  OrdinalLogitModel model;
  model.names = std::move(names);
  model.levels = y;
  std::sort(model.levels.begin(), model.levels.end());
  model.levels.erase(std::unique(model.levels.begin(), model.levels.end()), model.levels.end());
  const int levels = static_cast<int>(model.levels.size());
  if (levels < 2) throw Error(ErrorCode::ConstantInput, "ordinal outcome needs at least 2 observed levels");
  if (n <= k + levels) {
    throw Error(ErrorCode::EmptyInput, fmt::format("{} observations are too few for {} predictors and {} levels", n, k, levels));
  }

  Eigen::VectorXi coded(n);
  Eigen::VectorXd cumulative = Eigen::VectorXd::Zero(levels);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto it = std::lower_bound(model.levels.begin(), model.levels.end(), y[static_cast<std::size_t>(i)]);
    coded(i) = static_cast<int>(it - model.levels.begin());
    cumulative(coded(i)) += 1.0;
  }
  Objective objective(x, coded, levels);
  const Eigen::Index m = levels - 1;

  // start: empirical cumulative log-odds, beta = 0
  Eigen::VectorXd theta(m);
  double running = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    running += cumulative(j);
    double p = running / static_cast<double>(n);
    theta(j) = std::log(p / (1.0 - p));
  }
  Eigen::VectorXd params = Objective::pack(theta, Eigen::VectorXd::Zero(k));
  double ll = objective.log_likelihood(params);

  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  for (model.iterations = 0; model.iterations < options.max_iterations; ++model.iterations) {
    objective.derivatives(params, &grad, &hess);
    model.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (model.gradient_norm < options.gradient_tolerance) {
      model.converged = true;
      break;
    }
    Eigen::MatrixXd info = -hess;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0).all()) {
      step = ldlt.solve(grad);
    } else {
      // not locally concave in the packed coordinates: damped ascent
      double ridge = info.diagonal().cwiseAbs().maxCoeff() + 1.0;
      Eigen::MatrixXd damped = info + ridge * Eigen::MatrixXd::Identity(info.rows(), info.cols());
      step = damped.ldlt().solve(grad);
    }
    double t = 1.0;
    bool accepted = false;
    for (int half = 0; half < 60; ++half, t *= 0.5) {
      Eigen::VectorXd candidate = params + t * step;
      double cand_ll = objective.log_likelihood(candidate);
      if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        params = std::move(candidate);
        ll = cand_ll;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (params.tail(k).cwiseAbs().maxCoeff() > options.separation_bound) {
      throw Error(ErrorCode::SeparationDetected,
                  fmt::format("coefficient magnitude exceeded {} after {} iterations", options.separation_bound,
                              model.iterations + 1));
    }
  }
  if (!model.converged) {
    model.gradient_norm = objective.gradient(params).lpNorm<Eigen::Infinity>();
    model.converged = model.gradient_norm < options.gradient_tolerance;
  }

  model.thresholds = objective.thresholds(params);
  model.coefficients = params.tail(k);
  model.nll = -ll;

  Eigen::VectorXd gn;
  Eigen::MatrixXd hn;
  objective.natural_derivatives(model.thresholds, model.coefficients, &gn, &hn);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(-hn);
  model.std_errors = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  model.p_values = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  if (lu.isInvertible()) {
    Eigen::MatrixXd cov = lu.inverse();
    for (Eigen::Index c = 0; c < k; ++c) {
      double var = cov(m + c, m + c);
      if (var > 0) {
        model.std_errors(c) = std::sqrt(var);
        model.p_values(c) = special::normal_two_sided(model.coefficients(c) / model.std_errors(c));
      }
    }
  }
  return model;
}

std::vector<OrdinalLogitModel> fit_ordinal_logit_per_column(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                                            const std::vector<int>& y,
                                                            const std::vector<std::string>& names,
                                                            const OrdinalLogitOptions& options) {
  std::vector<OrdinalLogitModel> out;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    std::vector<std::string> one;
    one.push_back(names.empty() ? "x" + std::to_string(c) : names[static_cast<std::size_t>(c)]);
    out.push_back(fit_ordinal_logit(x.col(c), y, std::move(one), options));
  }
  return out;
}

}  // namespace pxt
