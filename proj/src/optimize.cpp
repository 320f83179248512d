#include "cmokg/optimize.hpp"

#include <cmath>

namespace cmokg {

namespace {

Eigen::VectorXd clamp_box(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

MinimizeResult bounded_minimize(const ValueGradFn& f, Eigen::VectorXd x0,
                                const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper,
                                const MinimizeOptions& opts) {
  const int n = static_cast<int>(x0.size());
  MinimizeResult res;
  res.x = clamp_box(std::move(x0), lower, upper);

  Eigen::VectorXd grad(n);
  res.value = f(res.x, &grad);

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);

  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it;

    // Gradient components pointing out of an active bound do not count.
    Eigen::VectorXd eff = grad;
    for (int i = 0; i < n; ++i) {
      if ((res.x[i] <= lower[i] && grad[i] > 0.0) ||
          (res.x[i] >= upper[i] && grad[i] < 0.0)) {
        eff[i] = 0.0;
      }
    }
    if (eff.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
      res.converged = true;
      return res;
    }

    Eigen::VectorXd dir = -hinv * grad;
    for (int i = 0; i < n; ++i) {
      if ((res.x[i] <= lower[i] && dir[i] < 0.0) ||
          (res.x[i] >= upper[i] && dir[i] > 0.0)) {
        dir[i] = 0.0;
      }
    }
    if (dir.dot(grad) > -1e-14 * dir.norm() * grad.norm()) {
      hinv.setIdentity();
      dir = -eff;
    }
    if (dir.lpNorm<Eigen::Infinity>() == 0.0) {
      res.converged = true;
      return res;
    }

    // Backtracking Armijo line search on the projected step.
    double t = 1.0;
    Eigen::VectorXd x_new;
    Eigen::VectorXd grad_new(n);
    double f_new = res.value;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = clamp_box(res.x + t * dir, lower, upper);
      Eigen::VectorXd step = x_new - res.x;
      if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
      f_new = f(x_new, &grad_new);
      if (f_new <= res.value + 1e-4 * grad.dot(step)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.converged = true;  // no descent available at line-search resolution
      return res;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = grad_new - grad;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      Eigen::VectorXd hy = hinv * y;
      double yhy = y.dot(hy);
      // BFGS update of the inverse Hessian.
      hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
              (hy * s.transpose() + s * hy.transpose()) / sy;
    }

    res.x = x_new;
    res.value = f_new;
    grad = grad_new;

    if (s.lpNorm<Eigen::Infinity>() < opts.step_tolerance) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

MinimizeResult bounded_minimize_fd(const ValueFn& f, Eigen::VectorXd x0,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper,
                                   const MinimizeOptions& opts) {
  const double h = opts.fd_step;
  ValueGradFn wrapped = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    double v = f(x);
    if (grad != nullptr) {
      grad->resize(x.size());
      Eigen::VectorXd probe = x;
      for (int i = 0; i < x.size(); ++i) {
        double lo = std::max(lower[i], x[i] - h);
        double hi = std::min(upper[i], x[i] + h);
        probe[i] = hi;
        double fp = f(probe);
        probe[i] = lo;
        double fm = f(probe);
        probe[i] = x[i];
        (*grad)[i] = (hi > lo) ? (fp - fm) / (hi - lo) : 0.0;
      }
    }
    return v;
  };
  return bounded_minimize(wrapped, std::move(x0), lower, upper, opts);
}

}  // namespace cmokg
