#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pxt/error.hpp"
#include "pxt/special_functions.hpp"

namespace pxt {

/// Proportional-odds log-likelihood, P(Y <= j | x) = logistic(theta_j - x.beta),
/// for y coded 0..J-1. Parameters are packed as
///   [phi_0, phi_1, ..., phi_{J-2}, beta_0, ..., beta_{k-1}]
/// with theta_0 = phi_0 and theta_j = theta_{j-1} + exp(phi_j).
template <typename Scalar>
class OrdinalLogitObjective {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  OrdinalLogitObjective(Matrix x, Eigen::VectorXi y, int levels)
      : x_(std::move(x)), y_(std::move(y)), levels_(levels) {
    if (x_.rows() != y_.size()) throw Error(ErrorCode::LengthMismatch, "X and y differ in length");
    if (levels_ < 2) throw Error(ErrorCode::ConstantInput, "ordinal outcome needs at least 2 levels");
  }

  int levels() const { return levels_; }
  Eigen::Index n_thresholds() const { return levels_ - 1; }
  Eigen::Index n_coefficients() const { return x_.cols(); }
  Eigen::Index n_params() const { return n_thresholds() + n_coefficients(); }
  const Matrix& x() const { return x_; }
  const Eigen::VectorXi& y() const { return y_; }

  Vector thresholds(const Vector& params) const {
    Vector theta(n_thresholds());
    theta(0) = params(0);
    for (Eigen::Index j = 1; j < n_thresholds(); ++j) theta(j) = theta(j - 1) + std::exp(params(j));
    return theta;
  }

  static Vector pack(const Vector& theta, const Vector& beta) {
    Vector p(theta.size() + beta.size());
    p(0) = theta(0);
    for (Eigen::Index j = 1; j < theta.size(); ++j) p(j) = std::log(theta(j) - theta(j - 1));
    p.tail(beta.size()) = beta;
    return p;
  }

  Scalar log_likelihood(const Vector& params) const {
    Vector theta = thresholds(params);
    Vector eta = x_ * params.tail(n_coefficients());
    Scalar ll = 0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) ll += std::log(cell(theta, eta(i), y_(i)).p);
    return ll;
  }

  /// Gradient and Hessian with respect to the natural (theta, beta) parameters.
  void natural_derivatives(const Vector& theta, const Vector& beta, Vector* grad, Matrix* hess) const {
    const Eigen::Index m = n_thresholds();
    const Eigen::Index k = n_coefficients();
    Vector eta = x_ * beta;
    if (grad) grad->setZero(m + k);
    if (hess) hess->setZero(m + k, m + k);
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      const int j = y_(i);
      const Cell c = cell(theta, eta(i), j);
      const bool has_upper = j < levels_ - 1;
      const bool has_lower = j > 0;
      const Scalar ga = c.fa / c.p;
      const Scalar gb = -c.fb / c.p;
      const auto xi = x_.row(i).transpose();
      if (grad) {
        if (has_upper) (*grad)(j) += ga;
        if (has_lower) (*grad)(j - 1) += gb;
        grad->tail(k) -= (ga + gb) * xi;
      }
      if (hess) {
        const Scalar p2 = c.p * c.p;
        const Scalar haa = c.dfa / c.p - c.fa * c.fa / p2;
        const Scalar hbb = -c.dfb / c.p - c.fb * c.fb / p2;
        const Scalar hab = c.fa * c.fb / p2;
        // a = theta_j - eta, b = theta_{j-1} - eta; d eta / d beta = x
        if (has_upper) {
          (*hess)(j, j) += haa;
          hess->block(j, m, 1, k) -= (haa + hab) * xi.transpose();
        }
        if (has_lower) {
          (*hess)(j - 1, j - 1) += hbb;
          hess->block(j - 1, m, 1, k) -= (hbb + hab) * xi.transpose();
        }
        if (has_upper && has_lower) {
          (*hess)(j, j - 1) += hab;
          (*hess)(j - 1, j) += hab;
        }
        hess->block(m, m, k, k) += (haa + hbb + 2 * hab) * xi * xi.transpose();
      }
    }
    if (hess) {
      hess->block(m, 0, k, m) = hess->block(0, m, m, k).transpose();
    }
  }

  Vector gradient(const Vector& params) const {
    Vector g;
    derivatives(params, &g, nullptr);
    return g;
  }

  Matrix hessian(const Vector& params) const {
    Matrix h;
    derivatives(params, nullptr, &h);
    return h;
  }

  /// Gradient and Hessian in the packed parameterization.
  void derivatives(const Vector& params, Vector* grad, Matrix* hess) const {
    const Eigen::Index m = n_thresholds();
    const Eigen::Index k = n_coefficients();
    Vector theta = thresholds(params);
    Vector gn;
    Matrix hn;
    natural_derivatives(theta, params.tail(k), &gn, hess ? &hn : nullptr);

    // d theta_r / d phi_l: 1 for l = 0; exp(phi_l) for 1 <= l <= r
    Matrix jac = Matrix::Identity(m + k, m + k);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index l = 0; l <= r; ++l) jac(r, l) = l == 0 ? Scalar(1) : std::exp(params(l));
    }
    if (grad) *grad = jac.transpose() * gn;
    if (hess) {
      *hess = jac.transpose() * hn * jac;
      for (Eigen::Index l = 1; l < m; ++l) (*hess)(l, l) += std::exp(params(l)) * gn.segment(l, m - l).sum();
    }
  }

 private:
  struct Cell {
    Scalar p;
    Scalar fa, fb;    // densities at the upper / lower cut
    Scalar dfa, dfb;  // density derivatives
  };

  Cell cell(const Vector& theta, Scalar eta, int j) const {
    Cell c{0, 0, 0, 0, 0};
    const bool has_upper = j < levels_ - 1;
    const bool has_lower = j > 0;
    Scalar a = has_upper ? theta(j) - eta : Scalar(0);
    Scalar b = has_lower ? theta(j - 1) - eta : Scalar(0);
    if (has_upper && has_lower) {
      // subtract on the tail that keeps precision
      c.p = b > 0 ? special::logistic(-b) - special::logistic(-a) : special::logistic(a) - special::logistic(b);
    } else if (has_upper) {
      c.p = special::logistic(a);
    } else {
      c.p = special::logistic(-b);
    }
    if (has_upper) {
      c.fa = special::logistic_density(a);
      c.dfa = c.fa * (1 - 2 * special::logistic(a));
    }
    if (has_lower) {
      c.fb = special::logistic_density(b);
      c.dfb = c.fb * (1 - 2 * special::logistic(b));
    }
    if (!(c.p > 0)) c.p = std::numeric_limits<Scalar>::min();
    return c;
  }

  Matrix x_;
  Eigen::VectorXi y_;
  int levels_;
};

struct OrdinalLogitOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double separation_bound = 30.0;
};

struct OrdinalLogitModel {
  std::vector<int> levels;  // observed rating values, ascending
  std::vector<std::string> names;
  Eigen::VectorXd thresholds;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd p_values;  // Wald, two-sided normal
  double nll = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;

  /// P(Y <= level_j | x) for j = 0..J-2.
  Eigen::VectorXd cumulative_probabilities(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Fits the joint model. Rows of `x` are observations; `y` holds raw ratings.
/// Throws SeparationDetected when a coefficient leaves [-30, 30].
OrdinalLogitModel fit_ordinal_logit(const Eigen::Ref<const Eigen::MatrixXd>& x, const std::vector<int>& y,
                                    std::vector<std::string> names = {},
                                    const OrdinalLogitOptions& options = {});

/// One single-predictor fit per column.
std::vector<OrdinalLogitModel> fit_ordinal_logit_per_column(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                                            const std::vector<int>& y,
                                                            const std::vector<std::string>& names = {},
                                                            const OrdinalLogitOptions& options = {});

}  // namespace pxt
