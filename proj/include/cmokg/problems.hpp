#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "cmokg/gp.hpp"
#include "cmokg/kg.hpp"
#include "cmokg/rng.hpp"

namespace cmokg {

/// A bi-objective ground-truth function on [0,1]^2: each objective is the
/// posterior mean of a generator GP conditioned on 100 low-discrepancy
/// samples drawn jointly from its prior. Deterministic under (family, seed);
/// observation noise is added only by evaluate().
class SyntheticProblem {
public:
  static constexpr int kConditioningPoints = 100;

  int family() const { return family_; }
  std::uint64_t seed() const { return seed_; }
  int input_dim() const { return 2; }
  int num_objectives() const { return static_cast<int>(generator_.num_objectives()); }
  const KernelSpec& generator() const { return generator_; }
  const Eigen::VectorXd& noise_sd() const { return noise_sd_; }
  const CostVector& costs() const { return costs_; }
  const Eigen::MatrixXd& locations() const { return locations_; }
  const Eigen::MatrixXd& values() const { return values_; }

  /// Noise-free ground truth.
  double true_value(const Eigen::VectorXd& x, int m) const;
  Eigen::VectorXd true_vector(const Eigen::VectorXd& x) const;

  friend SyntheticProblem generate_problem(int family, std::uint64_t seed);
  friend SyntheticProblem make_problem(int family, std::uint64_t seed,
                                       KernelSpec generator, Eigen::VectorXd noise_sd,
                                       CostVector costs, Eigen::MatrixXd locations,
                                       Eigen::MatrixXd values);

private:
  SyntheticProblem() : costs_(CostVector{Eigen::VectorXd::Ones(1)}) {}
  void build_interpolant();

  int family_ = 0;
  std::uint64_t seed_ = 0;
  KernelSpec generator_;
  Eigen::VectorXd noise_sd_;
  CostVector costs_;
  Eigen::MatrixXd locations_;  // 100 x 2
  Eigen::MatrixXd values_;     // 100 x M
  Eigen::MatrixXd alpha_;      // 100 x M, interpolation weights
};

SyntheticProblem generate_problem(int family, std::uint64_t seed);

/// Rebuild a problem from stored fields (loader and tests).
SyntheticProblem make_problem(int family, std::uint64_t seed, KernelSpec generator,
                              Eigen::VectorXd noise_sd, CostVector costs,
                              Eigen::MatrixXd locations, Eigen::MatrixXd values);

/// Ground truth plus per-objective Gaussian noise drawn from `noise_rng`.
double evaluate(const SyntheticProblem& problem, const Eigen::VectorXd& x, int m,
                RngStream& noise_rng);

/// Flat, versioned problem archive (JSON). Serialization is byte-stable:
/// saving a loaded file reproduces it exactly.
void save_problem(const SyntheticProblem& problem, const std::filesystem::path& path);
SyntheticProblem load_problem(const std::filesystem::path& path);
std::string problem_to_string(const SyntheticProblem& problem);
SyntheticProblem problem_from_string(const std::string& text);

}  // namespace cmokg
