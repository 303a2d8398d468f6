#pragma once

/// Damped Gauss-Newton (Levenberg-Marquardt) curve fitting with central
/// difference Jacobians and covariance-based uncertainties.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dipolar/errors.hpp"

namespace dipolar::lsq {

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::VectorXd uncertainties;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;  // sqrt(sum w r^2)
  std::size_t points = 0;
  int iterations = 0;
  bool converged = false;
  std::string model_tag;
  std::vector<std::string> flags;

  std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw InvalidInput("fit has no parameter '" + name + "'");
  }
  double value(const std::string& name) const { return params[index(name)]; }
  double sigma(const std::string& name) const { return uncertainties[index(name)]; }
  bool has_flag(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
  }
};

/// Model evaluated at every data abscissa for a parameter vector.
using VectorModel = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct Problem {
  VectorModel model;
  Eigen::VectorXd observed;
  std::optional<Eigen::VectorXd> sigmas;  // per-point; unit weights if absent
  std::vector<std::string> names;
  Eigen::VectorXd initial;
  // Typical magnitude of each parameter. Parameters are fitted in units of
  // this scale, and difference steps are relative to it.
  Eigen::VectorXd scale;
};

struct Options {
  int max_iterations = 200;
  double cost_tolerance = 1e-15;   // relative change in cost
  double step_tolerance = 1e-12;   // relative step in scaled parameters
  double rank_tolerance = 1e-12;   // relative singular value cutoff
};

namespace detail {

inline Eigen::VectorXd weighted_residuals(const Problem& p, const Eigen::VectorXd& params) {
  Eigen::VectorXd r = p.observed - p.model(params);
  if (p.sigmas) r = r.cwiseQuotient(*p.sigmas);
  return r;
}

inline Eigen::MatrixXd jacobian(const Problem& p, const Eigen::VectorXd& params) {
  const Eigen::Index n = p.observed.size();
  const Eigen::Index k = params.size();
  Eigen::MatrixXd J(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double h = 1e-6 * std::max(std::abs(params[j]), p.scale[j]);
    Eigen::VectorXd up = params, down = params;
    up[j] += h;
    down[j] -= h;
    // d(residual)/dp = -d(model)/dp
    J.col(j) = (weighted_residuals(p, up) - weighted_residuals(p, down)) / (2.0 * h);
  }
  return J;
}

}  // namespace detail

/// Minimizes sum_i ((y_i - f_i(p)) / s_i)^2. Covariance is
/// s^2 (J^T W J)^{-1} with s^2 the reduced residual variance.
inline FitResult nonlinear_least_squares(const Problem& problem, const Options& opt = {}) {
  const Eigen::Index n = problem.observed.size();
  const Eigen::Index k = problem.initial.size();
  if (k == 0) throw InvalidInput("fit needs at least one parameter");
  if (n < k) throw InsufficientData("fit needs at least as many points as parameters");
  if (problem.scale.size() != k || static_cast<Eigen::Index>(problem.names.size()) != k)
    throw InvalidInput("parameter names/scales do not match the initial vector");
  if (!problem.initial.allFinite()) throw InvalidInput("initial parameters must be finite");
  if (problem.sigmas && (problem.sigmas->size() != n || (problem.sigmas->array() <= 0.0).any()))
    throw InvalidInput("per-point sigmas must be positive and match the data length");
  for (Eigen::Index j = 0; j < k; ++j)
    if (!(problem.scale[j] > 0.0)) throw InvalidInput("parameter scales must be > 0");

  const Eigen::VectorXd scale = problem.scale;
  Eigen::VectorXd p = problem.initial;
  Eigen::VectorXd r = detail::weighted_residuals(problem, p);
  if (!r.allFinite()) throw NumericalFailure("model is not finite at the initial parameters");
  double cost = r.squaredNorm();

  FitResult result;
  result.names = problem.names;
  result.points = static_cast<std::size_t>(n);
  double lambda = 1e-3;
  int it = 0;
  bool converged = cost == 0.0;
  Eigen::MatrixXd J = detail::jacobian(problem, p);

  for (; it < opt.max_iterations && !converged; ++it) {
    // Work in scaled parameters q = p / scale.
    const Eigen::MatrixXd Js = J * scale.asDiagonal();
    const Eigen::MatrixXd A = Js.transpose() * Js;
    const Eigen::VectorXd g = Js.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd damped = A;
      damped.diagonal() += lambda * A.diagonal().cwiseMax(1e-12 * A.diagonal().maxCoeff());
      // r = y - f, J = dr/dp, so the Gauss-Newton step solves (J^T J) dq = -J^T r
      const Eigen::VectorXd dq = damped.ldlt().solve(-g);
      if (!dq.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = p + scale.cwiseProduct(dq);
      const Eigen::VectorXd r_trial = detail::weighted_residuals(problem, trial);
      const double cost_trial = r_trial.allFinite() ? r_trial.squaredNorm() : INFINITY;
      if (cost_trial <= cost) {
        const double rel_drop = cost > 0.0 ? (cost - cost_trial) / cost : 0.0;
        const double step = dq.norm() / (1.0 + (p.cwiseQuotient(scale)).norm());
        p = trial;
        r = r_trial;
        cost = cost_trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        if (cost == 0.0 || rel_drop < opt.cost_tolerance || step < opt.step_tolerance)
          converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) {
      // No descent direction left: at a minimum to machine precision.
      converged = true;
      break;
    }
    J = detail::jacobian(problem, p);
  }

  result.params = p;
  result.iterations = it;
  result.converged = converged;
  if (!converged) result.flags.push_back("not_converged");
  result.residual_norm = std::sqrt(cost);

  // Covariance from the Jacobian at the solution.
  J = detail::jacobian(problem, p);
  const Eigen::MatrixXd Js = J * scale.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Js, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() < k || sv[k - 1] <= opt.rank_tolerance * sv[0] || sv[0] == 0.0)
    throw DegenerateFit("normal matrix is singular: parameters are not identifiable from the data");
  const Eigen::MatrixXd V = svd.matrixV();
  const Eigen::VectorXd inv_s2 = sv.array().square().inverse();
  const Eigen::MatrixXd cov_scaled = V * inv_s2.asDiagonal() * V.transpose();
  const double dof = static_cast<double>(n - k);
  const double s2 = dof > 0.0 ? cost / dof : 0.0;
  result.covariance = s2 * (scale.asDiagonal() * cov_scaled * scale.asDiagonal());
  result.covariance = 0.5 * (result.covariance + result.covariance.transpose()).eval();
  result.uncertainties = result.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return result;
}

/// Convenience: scalar model y = f(t, p) over abscissae t.
template <class ScalarModel>
VectorModel pointwise(std::vector<double> t, ScalarModel f) {
  return [t = std::move(t), f](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) out[static_cast<Eigen::Index>(i)] = f(t[i], p);
    return out;
  };
}

}  // namespace dipolar::lsq
