#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cmokg/kg.hpp"

namespace cmokg {

enum class AcquisitionMode { Expectation, RandomLambda, BenchmarkJoint };

/// Objective index recorded when every objective is evaluated at once.
inline constexpr int kAllObjectives = -1;

struct OptimizerConfig {
  int restarts = 10;
  int max_iterations = 60;
  int coarse_per_dim = 21;       // seeding/validation grid resolution
  int grid_seed_points = 10;     // best coarse points used as restart seeds
  double finite_difference_step = 1e-4;
  int benchmark_fantasies = 64;
  std::uint64_t benchmark_fantasy_seed = 9001;
};

struct AcquisitionChoice {
  Eigen::VectorXd x;
  int objective = 0;   // kAllObjectives in benchmark mode
  double value = 0.0;  // cost-weighted acquisition value at (x, objective)
  bool fallback = false;  // local search never improved on the seeding grid
};

/// Row-major uniform grid over [0,1]^input_dim with per_dim points per axis.
std::vector<Eigen::VectorXd> uniform_grid(int input_dim, int per_dim);

/// Maximize the mode's acquisition over x in [0,1]^D for every allowed
/// objective and return the best (x, m) by cost-weighted value. Ties break to
/// the lowest objective index, then the lexicographically smallest x.
/// RandomLambda mode requires exactly one weight. An empty allowed list means
/// every objective is allowed.
AcquisitionChoice maximize_acquisition(const PosteriorState& state, AcquisitionMode mode,
                                       std::span<const SimplexWeight> lambdas,
                                       std::span<const Eigen::VectorXd> inner_grid,
                                       const CostVector& costs,
                                       const OptimizerConfig& config,
                                       std::span<const int> allowed_objectives = {});

/// Maximize the scalarized posterior mean over [0,1]^D.
Eigen::VectorXd maximize_posterior_mean(const PosteriorState& state,
                                        const SimplexWeight& lambda,
                                        const OptimizerConfig& config);

}  // namespace cmokg
