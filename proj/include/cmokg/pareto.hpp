#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace cmokg {

/// Mutually non-dominated points with their objective vectors (maximization).
struct ParetoArchive {
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::VectorXd> values;
};

/// Indices of the values not dominated by any other (maximization convention;
/// exact duplicates are all kept).
std::vector<int> non_dominated_filter(std::span<const Eigen::VectorXd> values);

/// Sort-based bi-objective variant; same result as non_dominated_filter in
/// O(n log n), used on the archive-maintenance hot path.
std::vector<int> non_dominated_filter_2d(std::span<const Eigen::VectorXd> values);

/// Crowding distances of one front: boundary points per objective get +inf,
/// interior points sum normalized neighbor gaps; a zero objective range
/// contributes nothing.
std::vector<double> crowding_distance(std::span<const Eigen::VectorXd> front_values);

struct Nsga2Config {
  int population = 100;  // even, >= 4
  int generations = 100;
  double crossover_prob = 0.9;
  double crossover_eta = 15.0;
  double mutation_prob = -1.0;  // < 0 means 1/D
  double mutation_eta = 20.0;
  std::uint64_t seed = 1;
};

/// NSGA-II over [0,1]^D (maximization). Non-dominated evaluations accumulate
/// in an archive capped at target_points by crowding-distance truncation.
/// Deterministic under config.seed.
ParetoArchive nsga2_maximize(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                             int input_dim, const Nsga2Config& config,
                             int target_points = 1000);

}  // namespace cmokg
