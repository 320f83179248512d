#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "cmokg/gp.hpp"
#include "cmokg/pareto.hpp"
#include "cmokg/problems.hpp"
#include "cmokg/scalarize.hpp"

namespace cmokg {

struct RegretReport {
  double optimal_expected_utility = 0.0;
  double expected_utility = 0.0;
  double regret = 0.0;             // optimal_expected_utility - expected_utility
  double normalized_regret = 0.0;  // regret / utility_range
  double qmc_std_error = 0.0;      // over the weight sample
  double utility_range = 0.0;      // spread of the per-weight optimal utility
  int lambda_count = 0;
  int true_archive_size = 0;
  int posterior_archive_size = 0;
};

/// Expected (over the weight list) best scalarized true value attainable
/// within the solution set.
double r2_indicator(std::span<const Eigen::VectorXd> solution_points,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f_true,
                    std::span<const SimplexWeight> lambdas);

/// Pareto archive of the noise-free ground truth.
ParetoArchive true_front_archive(const SyntheticProblem& problem,
                                 const Nsga2Config& config, int target_points = 1000);

/// Pareto archive of the posterior mean vector of `state`.
ParetoArchive posterior_mean_archive(const PosteriorState& state,
                                     const Nsga2Config& config, int target_points = 1000);

/// Regret given explicit archives: for each weight the decision maker picks
/// the posterior-archive point with the best scalarized archive value and is
/// scored under the ground truth.
RegretReport regret_from_archives(
    const ParetoArchive& true_archive, const ParetoArchive& posterior_archive,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f_true,
    std::span<const SimplexWeight> lambdas);

/// Full metric: NSGA-II archives (the true-function archive can be supplied
/// from a per-problem cache), then regret over the weight list.
RegretReport bayesian_regret(const PosteriorState& state, const SyntheticProblem& problem,
                             std::span<const SimplexWeight> lambdas,
                             const Nsga2Config& config,
                             const ParetoArchive* cached_true_archive = nullptr,
                             int target_points = 1000);

}  // namespace cmokg
