#include "cmokg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmokg {

double r2_indicator(std::span<const Eigen::VectorXd> solution_points,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f_true,
                    std::span<const SimplexWeight> lambdas) {
  if (solution_points.empty()) throw std::invalid_argument("r2_indicator: empty solution set");
  if (lambdas.empty()) throw std::invalid_argument("r2_indicator: empty weight list");
  std::vector<Eigen::VectorXd> values;
  values.reserve(solution_points.size());
  for (const auto& x : solution_points) values.push_back(f_true(x));
  double sum = 0.0;
  for (const auto& lambda : lambdas) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : values) best = std::max(best, lambda.w.dot(v));
    sum += best;
  }
  return sum / static_cast<double>(lambdas.size());
}

ParetoArchive true_front_archive(const SyntheticProblem& problem,
                                 const Nsga2Config& config, int target_points) {
  return nsga2_maximize([&](const Eigen::VectorXd& x) { return problem.true_vector(x); },
                        problem.input_dim(), config, target_points);
}

ParetoArchive posterior_mean_archive(const PosteriorState& state,
                                     const Nsga2Config& config, int target_points) {
  return nsga2_maximize([&](const Eigen::VectorXd& x) { return state.mean_vector(x); },
                        state.input_dim(), config, target_points);
}

RegretReport regret_from_archives(
    const ParetoArchive& true_archive, const ParetoArchive& posterior_archive,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f_true,
    std::span<const SimplexWeight> lambdas) {
  if (true_archive.values.empty() || posterior_archive.values.empty()) {
    throw std::invalid_argument("regret_from_archives: empty archive");
  }
  if (lambdas.empty()) throw std::invalid_argument("regret_from_archives: empty weight list");

  RegretReport report;
  report.lambda_count = static_cast<int>(lambdas.size());
  report.true_archive_size = static_cast<int>(true_archive.values.size());
  report.posterior_archive_size = static_cast<int>(posterior_archive.values.size());

  // Ground-truth scores of selected posterior-archive points, evaluated once
  // per distinct selection.
  std::vector<Eigen::VectorXd> true_scores(posterior_archive.points.size());
  std::vector<bool> scored(posterior_archive.points.size(), false);

  double opt_sum = 0.0, util_sum = 0.0, diff_sq_sum = 0.0;
  double opt_min = std::numeric_limits<double>::infinity();
  double opt_max = -std::numeric_limits<double>::infinity();
  for (const auto& lambda : lambdas) {
    double opt = -std::numeric_limits<double>::infinity();
    for (const auto& v : true_archive.values) opt = std::max(opt, lambda.w.dot(v));

    int pick = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < posterior_archive.values.size(); ++i) {
      const double s = lambda.w.dot(posterior_archive.values[i]);
      if (s > best_mean) {
        best_mean = s;
        pick = static_cast<int>(i);
      }
    }
    if (!scored[pick]) {
      true_scores[pick] = f_true(posterior_archive.points[pick]);
      scored[pick] = true;
    }
    const double util = lambda.w.dot(true_scores[pick]);

    opt_sum += opt;
    util_sum += util;
    const double diff = opt - util;
    diff_sq_sum += diff * diff;
    opt_min = std::min(opt_min, opt);
    opt_max = std::max(opt_max, opt);
  }

  const double n = static_cast<double>(lambdas.size());
  report.optimal_expected_utility = opt_sum / n;
  report.expected_utility = util_sum / n;
  report.regret = report.optimal_expected_utility - report.expected_utility;
  report.utility_range = opt_max - opt_min;
  report.normalized_regret = report.regret / std::max(report.utility_range, 1e-12);
  if (lambdas.size() > 1) {
    const double mean_diff = report.regret;
    const double var = std::max(0.0, diff_sq_sum / n - mean_diff * mean_diff);
    report.qmc_std_error = std::sqrt(var / n);
  }
  return report;
}

RegretReport bayesian_regret(const PosteriorState& state, const SyntheticProblem& problem,
                             std::span<const SimplexWeight> lambdas,
                             const Nsga2Config& config,
                             const ParetoArchive* cached_true_archive, int target_points) {
  ParetoArchive owned;
  const ParetoArchive* true_arch = cached_true_archive;
  if (true_arch == nullptr) {
    owned = true_front_archive(problem, config, target_points);
    true_arch = &owned;
  }
  ParetoArchive post = posterior_mean_archive(state, config, target_points);
  return regret_from_archives(*true_arch, post,
                              [&](const Eigen::VectorXd& x) { return problem.true_vector(x); },
                              lambdas);
}

}  // namespace cmokg
