#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "cmokg/gp.hpp"

namespace cmokg {

struct GammaPrior {
  double shape = 1.0;  // alpha
  double rate = 1.0;   // beta
  void validate() const;
};

/// log p(z) = alpha log beta - log Gamma(alpha) + (alpha-1) log z - beta z.
double gamma_log_pdf(double z, const GammaPrior& prior);

/// Priors for one objective. The constant mean carries an improper uniform
/// prior (no contribution). A missing noise prior means the noise variance is
/// fixed at 1e-4 and never fitted.
struct ObjectivePrior {
  GammaPrior length_scale;
  GammaPrior output_scale;
  std::optional<GammaPrior> noise;
  double fixed_noise = 1e-4;
};

struct PriorSet {
  std::vector<ObjectivePrior> per_objective;
  void validate() const;
};

/// GP evidence of one objective's data under the given hyperparameters:
/// -1/2 y'(K+S)^{-1}y - 1/2 log|K+S| - n/2 log 2pi, where S adds the noise
/// variance and the module's 1e-6*output_scale jitter to the diagonal.
double log_marginal_likelihood(const Eigen::MatrixXd& locations,
                               const Eigen::VectorXd& values, double length_scale,
                               double output_scale, double noise_variance,
                               double mean);

/// MAP objective (evidence plus log-priors) for one objective on standardized
/// data, with gradient w.r.t. the log parameters. Passing mean = NaN profiles
/// the constant mean in closed form (its improper prior contributes nothing).
/// The third gradient component is zero when the noise is not learnable.
double map_objective(const Eigen::MatrixXd& locations, const Eigen::VectorXd& std_values,
                     const ObjectivePrior& prior, double log_ls, double log_os,
                     double log_nv, bool learn_noise, double mean,
                     Eigen::Vector3d* grad = nullptr);

struct FitConfig {
  int restarts = 8;          // warm start plus prior samples
  int burst_iterations = 8;  // every restart runs this far
  int survivors = 2;         // best restarts continue to max_iterations
  int max_iterations = 60;
  std::uint64_t seed = 0;
  double log_ls_lo = std::log(0.01), log_ls_hi = std::log(10.0);
  double log_os_lo = std::log(1e-4), log_os_hi = std::log(1e3);
  double log_nv_lo = std::log(1e-6), log_nv_hi = std::log(1e2);
};

struct FitResult {
  KernelSpec kernel;  // standardized units
  NoiseModel noise;
  std::vector<StandardizeTransform> transforms;
  Eigen::VectorXd fitted_mean_raw;  // raw units; meaningful when the mean was fitted
  Eigen::VectorXd log_posterior;    // per objective, at the returned values
  bool warning = false;             // some objective kept its best initialization
};

/// MAP fit of all objectives' hyperparameters. Each objective needs at least
/// one observation. When frozen_mean_raw is null the constant mean is fitted
/// (profiled); otherwise it is mapped through the fresh standardization
/// transform and held fixed. Deterministic given (data, priors, config.seed).
FitResult fit_map(std::span<const ObservationRecord> data, int num_objectives,
                  const PriorSet& priors, const FitConfig& config,
                  const Eigen::VectorXd* frozen_mean_raw = nullptr,
                  const KernelSpec* warm_kernel = nullptr,
                  const NoiseModel* warm_noise = nullptr);

}  // namespace cmokg
