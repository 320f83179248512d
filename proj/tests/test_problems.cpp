#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cmokg/problems.hpp"
#include "test_util.hpp"

using namespace cmokg;
using namespace cmokg::test;

TEST_SUITE_BEGIN("problems");

TEST_CASE("generator hyperparameters per family") {
  SyntheticProblem f1 = generate_problem(1, 3);
  CHECK(f1.generator().length_scale == Eigen::Vector2d(0.2, 1.8));
  CHECK(f1.generator().output_scale == Eigen::Vector2d(1.0, 50.0));
  CHECK(f1.generator().constant_mean == Eigen::Vector2d(0.0, 0.0));
  CHECK(f1.noise_sd() == Eigen::Vector2d(0.0, 0.0));
  CHECK(f1.costs().c == Eigen::Vector2d(1.0, 10.0));
  CHECK(f1.locations().rows() == 100);

  SyntheticProblem f2 = generate_problem(2, 3);
  CHECK(f2.generator().length_scale == Eigen::Vector2d(0.4, 0.4));
  CHECK(f2.generator().output_scale == Eigen::Vector2d(1.0, 1.0));
  CHECK(f2.noise_sd() == Eigen::Vector2d(1.0, 0.0));

  CHECK_THROWS_AS(generate_problem(3, 1), std::invalid_argument);
}

TEST_CASE("same seed regenerates the same function") {
  SyntheticProblem a = generate_problem(1, 99);
  SyntheticProblem b = generate_problem(1, 99);
  SyntheticProblem c = generate_problem(1, 100);
  RngStream rng(1);
  bool any_difference = false;
  for (int i = 0; i < 10; ++i) {
    Eigen::Vector2d x(rng.uniform(), rng.uniform());
    for (int m = 0; m < 2; ++m) {
      CHECK(a.true_value(x, m) == b.true_value(x, m));
      if (a.true_value(x, m) != c.true_value(x, m)) any_difference = true;
    }
  }
  CHECK(any_difference);
}

TEST_CASE("noise is attached exactly where declared") {
  SyntheticProblem f1 = generate_problem(1, 5);
  RngStream noise(9);
  Eigen::Vector2d x(0.3, 0.7);
  CHECK(evaluate(f1, x, 0, noise) == evaluate(f1, x, 0, noise));
  CHECK(evaluate(f1, x, 1, noise) == evaluate(f1, x, 1, noise));

  SyntheticProblem f2 = generate_problem(2, 5);
  CHECK(evaluate(f2, x, 1, noise) == evaluate(f2, x, 1, noise));
  const int reps = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double y = evaluate(f2, x, 0, noise);
    sum += y;
    sum_sq += y * y;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt(sum_sq / reps - mean * mean);
  CHECK(sd >= 0.97);
  CHECK(sd <= 1.03);
  CHECK(std::abs(mean - f2.true_value(x, 0)) < 0.05);
}

TEST_CASE("evaluation validates its inputs") {
  SyntheticProblem p = generate_problem(1, 7);
  RngStream noise(1);
  CHECK_THROWS_AS(evaluate(p, Eigen::Vector2d(1.2, 0.5), 0, noise), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(p, Eigen::Vector2d(0.5, 0.5), 5, noise), std::invalid_argument);
}

TEST_CASE("interpolant is smooth on a dense grid") {
  SyntheticProblem p = generate_problem(1, 11);
  const int n = 101;
  for (int m = 0; m < 2; ++m) {
    Eigen::MatrixXd vals(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        vals(i, j) = p.true_value(Eigen::Vector2d(i / 100.0, j / 100.0), m);
        REQUIRE(std::isfinite(vals(i, j)));
      }
    }
    const double scale = p.generator().output_scale[m];
    double max_dd = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      for (int j = 0; j < n; ++j) {
        max_dd = std::max(max_dd, std::abs(vals(i + 1, j) - 2 * vals(i, j) + vals(i - 1, j)));
        max_dd = std::max(max_dd, std::abs(vals(j, i + 1) - 2 * vals(j, i) + vals(j, i - 1)));
      }
    }
    // Second differences of a smooth surface at h = 0.01 stay far below the
    // output scale.
    CHECK(max_dd < 0.05 * std::max(1.0, scale));
  }
}

TEST_CASE("problem files round-trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cmokg_problem_test";
  fs::create_directories(dir);
  fs::path path = dir / "family1_seed42.problem";

  SyntheticProblem p = generate_problem(1, 42);
  save_problem(p, path);
  SyntheticProblem loaded = load_problem(path);

  RngStream rng(2);
  for (int i = 0; i < 10; ++i) {
    Eigen::Vector2d x(rng.uniform(), rng.uniform());
    for (int m = 0; m < 2; ++m) {
      CHECK(loaded.true_value(x, m) == p.true_value(x, m));
    }
  }

  // Byte-stable re-serialization.
  std::ifstream in(path, std::ios::binary);
  std::string original((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(problem_to_string(loaded) == original);

  fs::remove_all(dir);
}

TEST_CASE("malformed problem files are rejected") {
  CHECK_THROWS(problem_from_string("{\"format\": \"something-else\"}"));
  CHECK_THROWS(problem_from_string("not json"));
}

TEST_SUITE_END();
