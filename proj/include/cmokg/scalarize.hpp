#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cmokg/sobol.hpp"

namespace cmokg {

/// A weight vector on the standard simplex: non-negative entries summing to 1.
struct SimplexWeight {
  Eigen::VectorXd w;

  static SimplexWeight of(Eigen::VectorXd weights);  // validates
  int size() const { return static_cast<int>(w.size()); }
};

double linear_scalarize(const SimplexWeight& lambda, const Eigen::VectorXd& v);

/// Map a point of [0,1]^{M-1} onto the simplex: (u, 1-u) for M = 2, the
/// sorted-spacings construction for larger M. Uniform input gives uniform
/// output on the simplex.
SimplexWeight simplex_from_cube(const Eigen::VectorXd& u);

/// Draw the next `count` weights from an (M-1)-dimensional stream.
std::vector<SimplexWeight> next_weights(SobolStream& stream, int count);

}  // namespace cmokg
