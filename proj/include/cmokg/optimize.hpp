#pragma once

#include <Eigen/Dense>
#include <functional>

namespace cmokg {

struct MinimizeOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-7;
  double step_tolerance = 1e-11;
  double fd_step = 1e-6;  // central-difference step for the value-only variant
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
using ValueGradFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

/// Projected BFGS on a box. Small and dense; meant for a handful of variables.
MinimizeResult bounded_minimize(const ValueGradFn& f, Eigen::VectorXd x0,
                                const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper,
                                const MinimizeOptions& opts = {});

/// Value-only variant; gradients via central differences with opts.fd_step.
MinimizeResult bounded_minimize_fd(const ValueFn& f, Eigen::VectorXd x0,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper,
                                   const MinimizeOptions& opts = {});

}  // namespace cmokg
