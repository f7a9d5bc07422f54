#pragma once

#include <Eigen/Core>

#include <deque>
#include <functional>
#include <stdexcept>
#include <vector>

namespace anselect {

// Objective callback: returns f(x) and writes the gradient into grad.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  double gradient_tolerance = 1e-8;  // stop when ||grad||_2 falls below this
  int max_iterations = 500;
  int history = 10;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

// Limited-memory BFGS with two-loop recursion and Armijo backtracking.
// Intended for small smooth convex objectives; throws if the gradient
// tolerance is not reached within the iteration budget.
inline LbfgsResult lbfgs_minimize(const ObjectiveFn& objective,
                                  Eigen::VectorXd x,
                                  const LbfgsOptions& options = {}) {
  const double armijo_c1 = 1e-4;
  Eigen::VectorXd grad(x.size());
  double value = objective(x, grad);

  std::deque<Eigen::VectorXd> s_history;
  std::deque<Eigen::VectorXd> y_history;

  LbfgsResult result;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double grad_norm = grad.norm();
    if (grad_norm < options.gradient_tolerance) {
      result.x = std::move(x);
      result.value = value;
      result.gradient_norm = grad_norm;
      result.iterations = iter;
      return result;
    }

    // Two-loop recursion for the search direction.
    Eigen::VectorXd direction = -grad;
    const int k = static_cast<int>(s_history.size());
    std::vector<double> alpha(k);
    for (int i = k - 1; i >= 0; --i) {
      const double rho = 1.0 / y_history[i].dot(s_history[i]);
      alpha[i] = rho * s_history[i].dot(direction);
      direction -= alpha[i] * y_history[i];
    }
    if (k > 0) {
      const double gamma = s_history[k - 1].dot(y_history[k - 1]) /
                           y_history[k - 1].squaredNorm();
      direction *= gamma;
    }
    for (int i = 0; i < k; ++i) {
      const double rho = 1.0 / y_history[i].dot(s_history[i]);
      const double beta = rho * y_history[i].dot(direction);
      direction += (alpha[i] - beta) * s_history[i];
    }

    double directional = grad.dot(direction);
    if (directional >= 0.0) {
      // Fall back to steepest descent if curvature information went stale.
      direction = -grad;
      directional = -grad.squaredNorm();
    }

    double step = 1.0;
    Eigen::VectorXd x_next;
    Eigen::VectorXd grad_next(x.size());
    double value_next = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_next = x + step * direction;
      value_next = objective(x_next, grad_next);
      if (value_next <= value + armijo_c1 * step * directional) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw std::runtime_error("lbfgs: line search failed");
    }

    Eigen::VectorXd s = x_next - x;
    Eigen::VectorXd y = grad_next - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_history.push_back(std::move(s));
      y_history.push_back(std::move(y));
      if (static_cast<int>(s_history.size()) > options.history) {
        s_history.pop_front();
        y_history.pop_front();
      }
    }
    x = std::move(x_next);
    grad = grad_next;
    value = value_next;
  }
  throw std::runtime_error(
      "lbfgs: gradient tolerance not reached within the iteration budget");
}

}  // namespace anselect
