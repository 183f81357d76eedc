#pragma once

// Small dense quasi-Newton minimizer with central-difference gradients.

#include <Eigen/Dense>

#include <cmath>
#include <functional>

namespace bbcrop::detail {

struct MinResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
};

inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    const double fp = f(xp);
    xp[i] = x[i] - step;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2 * step);
  }
  return g;
}

inline MinResult bfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                               Eigen::VectorXd x, int max_iterations, double gtol,
                               double h = 1e-6) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  double fx = f(x);
  Eigen::VectorXd g = numeric_gradient(f, x, h);
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (g.norm() < gtol) break;
    Eigen::VectorXd d = -H * g;
    if (g.dot(d) >= 0) {
      H.setIdentity();
      d = -g;
    }
    double step = 1.0;
    double fn = fx;
    Eigen::VectorXd xn = x;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = x + step * d;
      fn = f(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * g.dot(d)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (H.isIdentity()) break;
      H.setIdentity();
      continue;
    }
    const Eigen::VectorXd gn = numeric_gradient(f, xn, h);
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    const double df = fx - fn;
    x = xn;
    fx = fn;
    g = gn;
    if (df >= 0 && df < 1e-15 * std::max(1.0, std::abs(fx))) break;
  }
  return {x, fx, it};
}

}  // namespace bbcrop::detail
