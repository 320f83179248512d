#include "cmokg/scalarize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmokg {

SimplexWeight SimplexWeight::of(Eigen::VectorXd weights) {
  if (weights.size() == 0) throw std::invalid_argument("SimplexWeight: empty");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      throw std::invalid_argument("SimplexWeight: components must be non-negative");
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("SimplexWeight: components must sum to 1");
  }
  return SimplexWeight{std::move(weights)};
}

double linear_scalarize(const SimplexWeight& lambda, const Eigen::VectorXd& v) {
  if (lambda.w.size() != v.size()) {
    throw std::invalid_argument("linear_scalarize: dimension mismatch");
  }
  return lambda.w.dot(v);
}

SimplexWeight simplex_from_cube(const Eigen::VectorXd& u) {
  const int k = static_cast<int>(u.size());
  if (k == 0) throw std::invalid_argument("simplex_from_cube: empty input");
  for (int i = 0; i < k; ++i) {
    if (!(u[i] >= 0.0 && u[i] <= 1.0)) {
      throw std::invalid_argument("simplex_from_cube: coordinates must lie in [0,1]");
    }
  }
  Eigen::VectorXd w(k + 1);
  if (k == 1) {
    w << u[0], 1.0 - u[0];
  } else {
    std::vector<double> sorted(u.data(), u.data() + k);
    std::sort(sorted.begin(), sorted.end());
    w[0] = sorted[0];
    for (int i = 1; i < k; ++i) w[i] = sorted[i] - sorted[i - 1];
    w[k] = 1.0 - sorted[k - 1];
  }
  // Normalize away any rounding residue before validation.
  w /= w.sum();
  return SimplexWeight::of(std::move(w));
}

std::vector<SimplexWeight> next_weights(SobolStream& stream, int count) {
  std::vector<SimplexWeight> out;
  out.reserve(count);
  for (const auto& u : stream.next(count)) out.push_back(simplex_from_cube(u));
  return out;
}

}  // namespace cmokg
