#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cmokg/gp.hpp"
#include "cmokg/scalarize.hpp"

namespace cmokg {

struct CostVector {
  Eigen::VectorXd c;  // budget units per evaluation, all > 0

  static CostVector of(Eigen::VectorXd costs);
  double total() const { return c.sum(); }
};

/// Upper envelope of a set of affine lines z -> a_j + b_j z.
struct Epigraph {
  std::vector<int> kept;            // indices into the input, slope-ascending
  std::vector<double> breakpoints;  // kept.size() - 1 change points
};

Epigraph epigraph(std::span<const double> intercepts, std::span<const double> slopes);

/// E[max_j (a_j + b_j Z)] for standard-normal Z, computed exactly from the
/// upper envelope.
double expected_max_affine(std::span<const double> intercepts,
                           std::span<const double> slopes);

struct AffineEnsemble {
  Eigen::VectorXd intercept;
  Eigen::VectorXd slope;
  double baseline;  // current max scalarized posterior mean over the grid
};

/// KG of the scalarized posterior for observing objective m at x, with the
/// inner maximization restricted to `grid`.
double mokg_discrete(const PosteriorState& state, const Eigen::VectorXd& x, int m,
                     const SimplexWeight& lambda, std::span<const Eigen::VectorXd> grid);

double cmokg(const PosteriorState& state, const Eigen::VectorXd& x, int m,
             const SimplexWeight& lambda, std::span<const Eigen::VectorXd> grid,
             const CostVector& costs);

/// Arithmetic mean of cmokg over a weight list.
double cmokg_expectation(const PosteriorState& state, const Eigen::VectorXd& x, int m,
                         std::span<const SimplexWeight> lambdas,
                         std::span<const Eigen::VectorXd> grid, const CostVector& costs);

/// KG of jointly observing every objective at x, estimated with
/// `fantasy_count` quasi-random normal fantasies (deterministic under seed).
double mokg_joint_benchmark(const PosteriorState& state, const Eigen::VectorXd& x,
                            const SimplexWeight& lambda,
                            std::span<const Eigen::VectorXd> grid, int fantasy_count,
                            std::uint64_t seed);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of E[max over grid of the scalarized sample] minus
/// the max over grid of the scalarized posterior mean, using joint posterior
/// samples on the grid.
McEstimate residual_uncertainty_mc(const PosteriorState& state,
                                   const SimplexWeight& lambda,
                                   std::span<const Eigen::VectorXd> grid,
                                   int sample_count, std::uint64_t seed);

/// Precomputation shared across many candidate evaluations against one
/// (state, grid) pair. Pure and reusable from several threads.
class KgContext {
public:
  KgContext(const PosteriorState& state, std::vector<Eigen::VectorXd> grid);

  const std::vector<Eigen::VectorXd>& grid() const { return grid_; }
  const PosteriorState& state() const { return state_; }

  double baseline(const SimplexWeight& lambda) const;

  double mokg(const Eigen::VectorXd& x, int m, const SimplexWeight& lambda) const;
  /// Mean over the weight list of the (cost-unweighted) KG.
  double mokg_mean(const Eigen::VectorXd& x, int m,
                   std::span<const SimplexWeight> lambdas) const;
  /// Batched variant over candidate rows.
  Eigen::VectorXd mokg_mean_batch(const Eigen::MatrixXd& candidates, int m,
                                  std::span<const SimplexWeight> lambdas) const;

  /// Mean over the weight list of the joint-observation KG.
  double joint_mean(const Eigen::VectorXd& x, std::span<const SimplexWeight> lambdas,
                    int fantasy_count, std::uint64_t seed) const;

private:
  struct Candidate {
    std::vector<Eigen::VectorXd> cov;  // per objective: raw cov(grid, x)
    Eigen::VectorXd total_sd;          // per objective: sqrt(post var + noise), raw
  };
  Candidate prepare_candidate(const Eigen::VectorXd& x) const;
  double mokg_from_candidate(const Candidate& cand, int m,
                             const SimplexWeight& lambda) const;
  double mokg_with_order(const Candidate& cand, const std::vector<int>& order, int m,
                         const SimplexWeight& lambda) const;
  double mokg_mean_from_candidate(const Candidate& cand, int m,
                                  std::span<const SimplexWeight> lambdas) const;

  const PosteriorState& state_;
  std::vector<Eigen::VectorXd> grid_;
  Eigen::MatrixXd grid_points_;      // G x D
  Eigen::MatrixXd grid_mean_;        // G x M, raw units
  std::vector<Eigen::MatrixXd> v_;   // per objective: n x G, chol-solved cross kernels
};

}  // namespace cmokg
