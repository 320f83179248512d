#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cmokg/acq_opt.hpp"
#include "cmokg/hyperfit.hpp"
#include "cmokg/metrics.hpp"
#include "cmokg/problems.hpp"

namespace cmokg {

enum class Mode { CmokgExpectation, CmokgRandom, BenchmarkBoth };

const char* mode_name(Mode mode);
std::optional<Mode> mode_from_name(const std::string& name);

struct RunSeeds {
  std::uint64_t problem = 0;
  std::uint64_t design = 0;
  std::uint64_t lambda = 0;
  std::uint64_t noise = 0;
  std::uint64_t optimizer = 0;
  std::uint64_t metric = 0;
};

/// Sub-seeds expanded from one master seed by fixed offsets:
/// problem = master + 1000*i, design = master + 2000*i, lambda = master + 3000*i,
/// noise = master + 4000*i, optimizer = master + 5000*i, metric = master + 6000 + i.
RunSeeds derive_seeds(std::uint64_t master, int repeat_index);

struct RunConfig {
  Mode mode = Mode::CmokgExpectation;
  double budget = 400.0;
  int initial_points = 6;
  int q = 16;
  CostVector costs = CostVector{Eigen::Vector2d(1.0, 10.0)};
  RunSeeds seeds;
  double checkpoint_interval = 25.0;       // 0 disables interval checkpoints
  std::vector<double> extra_checkpoints;   // merged with the interval grid
  int inner_grid_per_dim = 11;
  OptimizerConfig opt;
  FitConfig fit;
  PriorSet priors;
  Nsga2Config nsga;
  int archive_points = 1000;
  int metric_lambda_count = 1024;
  bool compute_regret = true;
};

/// Default surrogate priors for a problem family.
PriorSet default_priors(int family);

struct IterationRecord {
  int iteration = 0;  // 0 marks initial-design rows
  Eigen::VectorXd location;
  int objective = 0;           // kAllObjectives when every objective was evaluated
  std::vector<double> values;  // one entry, or one per objective
  double cost = 0.0;
  double cumulative_cost = 0.0;
  double acquisition_value = 0.0;
  bool fallback = false;
};

struct RegretCheckpoint {
  double threshold = 0.0;        // the crossed cumulative-cost checkpoint
  double cumulative_cost = 0.0;  // actual spend when recorded
  int iteration = 0;
  RegretReport report;
};

struct RunTrace {
  Mode mode = Mode::CmokgExpectation;
  RunSeeds seeds;
  std::vector<IterationRecord> records;
  std::vector<RegretCheckpoint> checkpoints;
  double total_cost = 0.0;
  Eigen::VectorXd frozen_mean_raw;
  std::vector<std::string> warnings;
};

/// Space-filling initial design: n locations, every objective evaluated at
/// each, 2n observation records for a bi-objective problem.
std::vector<ObservationRecord> initial_design(const SyntheticProblem& problem, int n,
                                              std::uint64_t design_seed,
                                              RngStream& noise_rng);

RunTrace run_bo(const SyntheticProblem& problem, const RunConfig& config,
                const ParetoArchive* cached_true_front = nullptr);

struct ExperimentSpec {
  std::vector<int> families = {1};
  std::vector<Mode> modes = {Mode::CmokgExpectation};
  int repeats = 1;
  std::uint64_t master_seed = 0;
  RunConfig base;
  int threads = 1;
};

struct RunSummary {
  int family = 0;
  int repeat = 0;
  Mode mode = Mode::CmokgExpectation;
  std::uint64_t problem_seed = 0;
  RunTrace trace;
  bool failed = false;
  std::string error;
};

struct AggregateRow {
  int family = 0;
  Mode mode = Mode::CmokgExpectation;
  double checkpoint = 0.0;
  double mean_regret = 0.0;
  double ci95_halfwidth = 0.0;
  bool has_ci = false;
  int n_runs = 0;
};

struct ExperimentResult {
  std::vector<RunSummary> runs;
  std::vector<AggregateRow> aggregate;
  int failures = 0;
};

/// Paired experiment: per repeat, every mode shares the problem, initial
/// design, weight streams and noise stream. Failed runs are excluded from the
/// aggregates and counted. Repeats may execute on several threads.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Aggregate rows recomputed from finished runs (shuffle-invariant).
std::vector<AggregateRow> aggregate_runs(std::span<const RunSummary> runs);

}  // namespace cmokg
