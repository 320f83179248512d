#include <doctest.h>

#include <cmath>

#include "cmokg/acq_opt.hpp"
#include "cmokg/rng.hpp"
#include "test_util.hpp"

using namespace cmokg;
using namespace cmokg::test;

TEST_SUITE_BEGIN("acq_opt");

namespace {

OptimizerConfig fast_config() {
  OptimizerConfig config;
  config.restarts = 4;
  config.grid_seed_points = 4;
  config.coarse_per_dim = 11;
  config.max_iterations = 25;
  return config;
}

std::vector<SimplexWeight> some_weights(int count, std::uint64_t seed) {
  SobolStream stream(1, seed);
  return next_weights(stream, count);
}

}  // namespace

TEST_CASE("uniform grid is row-major over the unit square") {
  auto grid = uniform_grid(2, 3);
  REQUIRE(grid.size() == 9);
  CHECK(grid[0] == Eigen::Vector2d(0.0, 0.0));
  CHECK(grid[1] == Eigen::Vector2d(0.0, 0.5));
  CHECK(grid[8] == Eigen::Vector2d(1.0, 1.0));
  CHECK_THROWS_AS(uniform_grid(0, 3), std::invalid_argument);
}

TEST_CASE("a fully known objective is never chosen") {
  RngStream rng(7);
  // Objective 2's prior variance is at machine level: nothing to learn.
  KernelSpec kernel = kernel2(0.3, 0.3, 1.0, 1e-14);
  PosteriorState prior(kernel, noise2(1e-4, 0.0), 2);
  std::vector<ObservationRecord> recs;
  for (int i = 0; i < 3; ++i) {
    recs.push_back(obs(rng.uniform(), rng.uniform(), 0, rng.normal()));
  }
  PosteriorState state = prior.conditioned(recs);
  auto lambdas = some_weights(4, 3);
  auto grid = uniform_grid(2, 6);
  CostVector costs = CostVector::of(Eigen::Vector2d(1.0, 1.0));
  AcquisitionChoice choice = maximize_acquisition(
      state, AcquisitionMode::Expectation, lambdas, grid, costs, fast_config());
  CHECK(choice.objective == 0);
  CHECK(choice.value > 0.0);
}

TEST_CASE("identical posteriors prefer the cheap objective") {
  RngStream rng(17);
  KernelSpec kernel = kernel2(0.4, 0.4, 1.0, 1.0);
  PosteriorState prior(kernel, noise2(1e-4, 1e-4), 2);
  std::vector<ObservationRecord> recs;
  for (int i = 0; i < 3; ++i) {
    const double x1 = rng.uniform(), x2 = rng.uniform(), y = rng.normal();
    recs.push_back(obs(x1, x2, 0, y));
    recs.push_back(obs(x1, x2, 1, y));
  }
  PosteriorState state = prior.conditioned(recs);
  SimplexWeight half = SimplexWeight::of(Eigen::Vector2d(0.5, 0.5));
  std::vector<SimplexWeight> lambdas = {half};
  CostVector costs = CostVector::of(Eigen::Vector2d(1.0, 10.0));
  AcquisitionChoice choice = maximize_acquisition(
      state, AcquisitionMode::RandomLambda, lambdas, uniform_grid(2, 6), costs,
      fast_config());
  CHECK(choice.objective == 0);
}

TEST_CASE("returned value beats the validation grid") {
  RngStream rng(29);
  CostVector costs = CostVector::of(Eigen::Vector2d(1.0, 10.0));
  auto inner = uniform_grid(2, 6);
  for (int trial = 0; trial < 3; ++trial) {
    PosteriorState state = random_state(rng, 3, 6);
    auto lambdas = some_weights(4, 100 + trial);
    OptimizerConfig config = fast_config();
    config.coarse_per_dim = 21;
    config.grid_seed_points = 10;
    config.restarts = 10;
    AcquisitionChoice choice = maximize_acquisition(
        state, AcquisitionMode::Expectation, lambdas, inner, costs, config);

    double grid_best = -1e300;
    for (const auto& x : uniform_grid(2, 21)) {
      for (int m = 0; m < 2; ++m) {
        grid_best = std::max(grid_best,
                             cmokg_expectation(state, x, m, lambdas, inner, costs));
      }
    }
    CHECK(choice.value >= grid_best - 1e-6);
  }
}

TEST_CASE("benchmark mode evaluates everything at once") {
  RngStream rng(31);
  PosteriorState state = random_state(rng, 3, 5);
  auto lambdas = some_weights(4, 5);
  CostVector costs = CostVector::of(Eigen::Vector2d(1.0, 10.0));
  AcquisitionChoice choice = maximize_acquisition(
      state, AcquisitionMode::BenchmarkJoint, lambdas, uniform_grid(2, 6), costs,
      fast_config());
  CHECK(choice.objective == kAllObjectives);
  CHECK(choice.value >= -1e-10);
}

TEST_CASE("posterior mean maximization hits a dense grid oracle") {
  RngStream rng(37);
  for (int trial = 0; trial < 3; ++trial) {
    PosteriorState state = random_state(rng, 4, 6);
    SimplexWeight lambda = weight2(rng.uniform());
    OptimizerConfig config = fast_config();
    config.coarse_per_dim = 21;
    Eigen::VectorXd best = maximize_posterior_mean(state, lambda, config);
    const double found = lambda.w.dot(state.mean_vector(best));
    for (const auto& x : uniform_grid(2, 101)) {
      CHECK(found >= lambda.w.dot(state.mean_vector(x)) - 1e-6);
    }
  }
}

TEST_CASE("weight (1,0) maximizes the first objective alone") {
  RngStream rng(41);
  PosteriorState state = random_state(rng, 4, 6);
  SimplexWeight lambda = SimplexWeight::of(Eigen::Vector2d(1.0, 0.0));
  OptimizerConfig config = fast_config();
  config.coarse_per_dim = 21;
  Eigen::VectorXd best = maximize_posterior_mean(state, lambda, config);
  const double found = state.mean_one(best, 0);
  for (const auto& x : uniform_grid(2, 51)) {
    CHECK(found >= state.mean_one(x, 0) - 1e-6);
  }
}

TEST_CASE("flat posterior resolves ties deterministically") {
  PosteriorState prior(kernel2(0.4, 0.4, 1.0, 1.0, 0.7, 0.7), noise2(1e-4, 1e-4), 2);
  OptimizerConfig config = fast_config();
  Eigen::VectorXd a = maximize_posterior_mean(prior, weight2(0.5), config);
  Eigen::VectorXd b = maximize_posterior_mean(prior, weight2(0.5), config);
  CHECK(a == b);
  CHECK(a == Eigen::Vector2d(0.0, 0.0));
}

TEST_CASE("selection is deterministic") {
  RngStream rng(43);
  PosteriorState state = random_state(rng, 3, 6);
  auto lambdas = some_weights(4, 9);
  CostVector costs = CostVector::of(Eigen::Vector2d(1.0, 10.0));
  auto grid = uniform_grid(2, 6);
  AcquisitionChoice a = maximize_acquisition(state, AcquisitionMode::Expectation, lambdas,
                                             grid, costs, fast_config());
  AcquisitionChoice b = maximize_acquisition(state, AcquisitionMode::Expectation, lambdas,
                                             grid, costs, fast_config());
  CHECK(a.x == b.x);
  CHECK(a.objective == b.objective);
  CHECK(a.value == b.value);
}

TEST_CASE("raising a cost never attracts its objective") {
  RngStream rng(47);
  auto grid = uniform_grid(2, 5);
  CostVector flat = CostVector::of(Eigen::Vector2d(1.0, 1.0));
  CostVector skewed = CostVector::of(Eigen::Vector2d(1.0, 10.0));
  OptimizerConfig config = fast_config();
  config.restarts = 2;
  config.grid_seed_points = 2;
  config.max_iterations = 10;
  for (int trial = 0; trial < 50; ++trial) {
    PosteriorState state = random_state(rng, 2, 5);
    auto lambdas = some_weights(2, 500 + trial);
    const int pick_flat =
        maximize_acquisition(state, AcquisitionMode::Expectation, lambdas, grid, flat,
                             config)
            .objective;
    const int pick_skewed =
        maximize_acquisition(state, AcquisitionMode::Expectation, lambdas, grid, skewed,
                             config)
            .objective;
    if (pick_flat != pick_skewed) {
      // Making objective 2 pricier can only push the choice toward objective 1.
      CHECK(pick_flat == 1);
      CHECK(pick_skewed == 0);
    }
  }
}

TEST_CASE("allowed objectives restrict the search") {
  RngStream rng(53);
  PosteriorState state = random_state(rng, 3, 5);
  auto lambdas = some_weights(2, 11);
  CostVector costs = CostVector::of(Eigen::Vector2d(1.0, 10.0));
  std::vector<int> only_second = {1};
  AcquisitionChoice choice =
      maximize_acquisition(state, AcquisitionMode::Expectation, lambdas,
                           uniform_grid(2, 5), costs, fast_config(), only_second);
  CHECK(choice.objective == 1);
  CHECK_THROWS_AS(maximize_acquisition(state, AcquisitionMode::RandomLambda, lambdas,
                                       uniform_grid(2, 5), costs, fast_config()),
                  std::invalid_argument);
}

TEST_SUITE_END();
