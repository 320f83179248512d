#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cmokg/gp.hpp"
#include "cmokg/rng.hpp"
#include "cmokg/scalarize.hpp"

namespace cmokg::test {

inline KernelSpec kernel2(double ls1, double ls2, double os1, double os2,
                          double mean1 = 0.0, double mean2 = 0.0) {
  KernelSpec k;
  k.length_scale = Eigen::Vector2d(ls1, ls2);
  k.output_scale = Eigen::Vector2d(os1, os2);
  k.constant_mean = Eigen::Vector2d(mean1, mean2);
  return k;
}

inline NoiseModel noise2(double nv1, double nv2, bool learn1 = false, bool learn2 = false) {
  NoiseModel n;
  n.noise_variance = Eigen::Vector2d(nv1, nv2);
  n.learnable = {learn1, learn2};
  return n;
}

inline ObservationRecord obs(double x1, double x2, int m, double y, double cost = 1.0) {
  ObservationRecord rec;
  rec.location = Eigen::Vector2d(x1, x2);
  rec.objective = m;
  rec.value = y;
  rec.cost = cost;
  return rec;
}

inline Eigen::Vector2d pt(double x1, double x2) { return Eigen::Vector2d(x1, x2); }

inline SimplexWeight weight2(double w1) {
  return SimplexWeight::of(Eigen::Vector2d(w1, 1.0 - w1));
}

/// Random two-objective state with a handful of observations.
inline PosteriorState random_state(RngStream& rng, int min_obs = 2, int max_obs = 6) {
  KernelSpec kernel = kernel2(0.2 + 0.6 * rng.uniform(), 0.2 + 0.6 * rng.uniform(),
                              0.5 + 1.5 * rng.uniform(), 0.5 + 1.5 * rng.uniform(),
                              rng.normal() * 0.3, rng.normal() * 0.3);
  NoiseModel noise = noise2(1e-4 + 0.05 * rng.uniform(), 1e-4 + 0.05 * rng.uniform());
  PosteriorState prior(kernel, noise, 2);
  const int count =
      min_obs + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_obs - min_obs + 1)));
  std::vector<ObservationRecord> records;
  records.reserve(count);
  for (int i = 0; i < count; ++i) {
    records.push_back(obs(rng.uniform(), rng.uniform(), static_cast<int>(rng.below(2)),
                          rng.normal()));
  }
  return prior.conditioned(records);
}

/// Dense direct conditioning over the joint (block) system with plain
/// inversion; the independent check for posterior mean and covariance.
struct DenseOracle {
  const KernelSpec& kernel;
  const NoiseModel& noise;
  std::vector<ObservationRecord> records;

  static double k_entry(const KernelSpec& kernel, int mi, int mj,
                        const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (mi != mj) return 0.0;
    return matern52(a, b, kernel.length_scale[mi], kernel.output_scale[mi]);
  }

  Eigen::MatrixXd inv() const {
    const int n = static_cast<int>(records.size());
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        k(i, j) = k_entry(kernel, records[i].objective, records[j].objective,
                          records[i].location, records[j].location);
      }
      k(i, i) += noise.noise_variance[records[i].objective] +
                 1e-6 * kernel.output_scale[records[i].objective];
    }
    return k.inverse();
  }

  double mean(const Eigen::VectorXd& x, int m) const {
    const int n = static_cast<int>(records.size());
    Eigen::VectorXd kv(n), centered(n);
    for (int i = 0; i < n; ++i) {
      kv[i] = k_entry(kernel, m, records[i].objective, x, records[i].location);
      centered[i] = records[i].value - kernel.constant_mean[records[i].objective];
    }
    return kernel.constant_mean[m] + kv.dot(inv() * centered);
  }

  double cov(const Eigen::VectorXd& x, const Eigen::VectorXd& x2, int m) const {
    const int n = static_cast<int>(records.size());
    Eigen::VectorXd kx(n), ky(n);
    for (int i = 0; i < n; ++i) {
      kx[i] = k_entry(kernel, m, records[i].objective, x, records[i].location);
      ky[i] = k_entry(kernel, m, records[i].objective, x2, records[i].location);
    }
    return matern52(x, x2, kernel.length_scale[m], kernel.output_scale[m]) -
           kx.dot(inv() * ky);
  }
};

}  // namespace cmokg::test
