#include "cmokg/bo_loop.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

namespace cmokg {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::CmokgExpectation: return "cmokg-expectation";
    case Mode::CmokgRandom: return "cmokg-random";
    case Mode::BenchmarkBoth: return "benchmark-both";
  }
  return "unknown";
}

std::optional<Mode> mode_from_name(const std::string& name) {
  if (name == "cmokg-expectation") return Mode::CmokgExpectation;
  if (name == "cmokg-random") return Mode::CmokgRandom;
  if (name == "benchmark-both") return Mode::BenchmarkBoth;
  return std::nullopt;
}

RunSeeds derive_seeds(std::uint64_t master, int repeat_index) {
  const std::uint64_t i = static_cast<std::uint64_t>(repeat_index);
  RunSeeds s;
  s.problem = master + 1000 * i;
  s.design = master + 2000 * i;
  s.lambda = master + 3000 * i;
  s.noise = master + 4000 * i;
  s.optimizer = master + 5000 * i;
  s.metric = master + 6000 + i;
  return s;
}

PriorSet default_priors(int family) {
  if (family != 1 && family != 2) {
    throw std::invalid_argument("default_priors: family must be 1 or 2");
  }
  PriorSet priors;
  priors.per_objective.resize(2);
  for (auto& p : priors.per_objective) {
    p.output_scale = GammaPrior{2.0, 0.15};
    p.fixed_noise = 1e-4;
  }
  if (family == 1) {
    priors.per_objective[0].length_scale = GammaPrior{3.0, 10.0};
    priors.per_objective[1].length_scale = GammaPrior{3.0, 1.1};
  } else {
    priors.per_objective[0].length_scale = GammaPrior{3.0, 10.0};
    priors.per_objective[1].length_scale = GammaPrior{3.0, 10.0};
    priors.per_objective[0].noise = GammaPrior{1.1, 0.05};
  }
  return priors;
}

namespace {

// Scramble seed 0 would disable scrambling; remap it to a fixed constant.
std::uint64_t nonzero_seed(std::uint64_t s) {
  return s == 0 ? 0x9E3779B97F4A7C15ULL : s;
}

}  // namespace

std::vector<ObservationRecord> initial_design(const SyntheticProblem& problem, int n,
                                              std::uint64_t design_seed,
                                              RngStream& noise_rng) {
  if (n < 1) throw std::invalid_argument("initial_design: n must be >= 1");
  SobolStream stream(problem.input_dim(), nonzero_seed(design_seed));
  std::vector<ObservationRecord> out;
  out.reserve(static_cast<size_t>(n) * problem.num_objectives());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = stream.next();
    for (int m = 0; m < problem.num_objectives(); ++m) {
      ObservationRecord rec;
      rec.location = x;
      rec.objective = m;
      rec.value = evaluate(problem, x, m, noise_rng);
      rec.cost = problem.costs().c[m];
      out.push_back(std::move(rec));
    }
  }
  return out;
}

namespace {

std::vector<double> checkpoint_thresholds(const RunConfig& config, double initial_cost) {
  std::set<double> set;
  if (config.checkpoint_interval > 0.0) {
    for (double t = config.checkpoint_interval; t <= config.budget + 1e-9;
         t += config.checkpoint_interval) {
      set.insert(t);
    }
  }
  for (double t : config.extra_checkpoints) set.insert(t);
  set.insert(initial_cost);
  set.insert(config.budget);
  return {set.begin(), set.end()};
}

}  // namespace

RunTrace run_bo(const SyntheticProblem& problem, const RunConfig& config,
                const ParetoArchive* cached_true_front) {
  if (!(config.budget > 0.0)) throw std::invalid_argument("run_bo: budget must be positive");
  if (config.q < 1) throw std::invalid_argument("run_bo: q must be >= 1");
  const int m_count = problem.num_objectives();
  if (config.costs.c.size() != m_count) {
    throw std::invalid_argument("run_bo: cost vector does not match the problem");
  }

  RunTrace trace;
  trace.mode = config.mode;
  trace.seeds = config.seeds;

  RngStream noise_rng(config.seeds.noise);
  std::vector<ObservationRecord> observations =
      initial_design(problem, config.initial_points, config.seeds.design, noise_rng);
  double spent = config.initial_points * config.costs.c.sum();

  for (int i = 0; i < config.initial_points; ++i) {
    IterationRecord rec;
    rec.iteration = 0;
    rec.location = observations[static_cast<size_t>(i) * m_count].location;
    rec.objective = kAllObjectives;
    for (int m = 0; m < m_count; ++m) {
      rec.values.push_back(observations[static_cast<size_t>(i) * m_count + m].value);
    }
    rec.cost = config.costs.c.sum();
    rec.cumulative_cost = config.costs.c.sum() * (i + 1);
    trace.records.push_back(std::move(rec));
  }

  // Metric fixtures: one weight set per run, one ground-truth archive.
  std::vector<SimplexWeight> metric_lambdas;
  ParetoArchive owned_true_front;
  const ParetoArchive* true_front = cached_true_front;
  if (config.compute_regret) {
    SobolStream metric_stream(std::max(1, m_count - 1), nonzero_seed(config.seeds.metric));
    metric_lambdas = next_weights(metric_stream, config.metric_lambda_count);
    if (true_front == nullptr) {
      Nsga2Config cfg = config.nsga;
      cfg.seed = config.seeds.metric + 101;
      owned_true_front = true_front_archive(problem, cfg, config.archive_points);
      true_front = &owned_true_front;
    }
  }

  SobolStream weight_stream(std::max(1, m_count - 1), nonzero_seed(config.seeds.lambda));
  std::vector<Eigen::VectorXd> inner_grid =
      uniform_grid(problem.input_dim(), config.inner_grid_per_dim);

  const std::vector<double> thresholds = checkpoint_thresholds(config, spent);
  size_t next_threshold = 0;

  FitConfig fit_config = config.fit;
  fit_config.seed = config.seeds.optimizer;
  FitResult fit = fit_map(observations, m_count, config.priors, fit_config, nullptr);
  if (fit.warning) trace.warnings.push_back("initial hyperparameter fit kept an initialization");
  trace.frozen_mean_raw = fit.fitted_mean_raw;

  auto make_state = [&](const FitResult& f) {
    return PosteriorState(f.kernel, f.noise, problem.input_dim(), f.transforms)
        .conditioned(observations);
  };
  PosteriorState state = make_state(fit);

  Nsga2Config post_nsga = config.nsga;
  post_nsga.seed = config.seeds.metric + 202;

  int iteration = 0;
  auto record_crossed_checkpoints = [&]() {
    if (!config.compute_regret) {
      while (next_threshold < thresholds.size() && thresholds[next_threshold] <= spent + 1e-9) {
        ++next_threshold;
      }
      return;
    }
    std::optional<RegretReport> report;
    while (next_threshold < thresholds.size() && thresholds[next_threshold] <= spent + 1e-9) {
      if (!report.has_value()) {
        report = bayesian_regret(state, problem, metric_lambdas, post_nsga, true_front,
                                 config.archive_points);
      }
      RegretCheckpoint cp;
      cp.threshold = thresholds[next_threshold];
      cp.cumulative_cost = spent;
      cp.iteration = iteration;
      cp.report = *report;
      trace.checkpoints.push_back(cp);
      ++next_threshold;
    }
  };
  record_crossed_checkpoints();

  for (;;) {
    const double remaining = config.budget - spent;

    std::vector<int> allowed;
    bool benchmark_affordable = config.costs.total() <= remaining + 1e-12;
    for (int m = 0; m < m_count; ++m) {
      if (config.costs.c[m] <= remaining + 1e-12) allowed.push_back(m);
    }
    const bool can_act = config.mode == Mode::BenchmarkBoth ? benchmark_affordable
                                                            : !allowed.empty();
    if (!can_act) break;
    ++iteration;

    const int weight_count = config.mode == Mode::CmokgRandom ? 1 : config.q;
    std::vector<SimplexWeight> lambdas = next_weights(weight_stream, weight_count);

    OptimizerConfig opt = config.opt;
    opt.benchmark_fantasy_seed = config.seeds.optimizer + 77 * iteration;
    const AcquisitionMode acq_mode = config.mode == Mode::BenchmarkBoth
                                         ? AcquisitionMode::BenchmarkJoint
                                         : (config.mode == Mode::CmokgRandom
                                                ? AcquisitionMode::RandomLambda
                                                : AcquisitionMode::Expectation);
    AcquisitionChoice choice =
        maximize_acquisition(state, acq_mode, lambdas, inner_grid, config.costs, opt, allowed);
    if (choice.fallback) {
      trace.warnings.push_back("iteration " + std::to_string(iteration) +
                               ": local search fell back to the seeding grid");
    }

    IterationRecord rec;
    rec.iteration = iteration;
    rec.location = choice.x;
    rec.objective = choice.objective;
    rec.acquisition_value = choice.value;
    rec.fallback = choice.fallback;
    if (choice.objective == kAllObjectives) {
      for (int m = 0; m < m_count; ++m) {
        ObservationRecord obs;
        obs.location = choice.x;
        obs.objective = m;
        obs.value = evaluate(problem, choice.x, m, noise_rng);
        obs.cost = config.costs.c[m];
        rec.values.push_back(obs.value);
        observations.push_back(std::move(obs));
      }
      rec.cost = config.costs.total();
    } else {
      ObservationRecord obs;
      obs.location = choice.x;
      obs.objective = choice.objective;
      obs.value = evaluate(problem, choice.x, choice.objective, noise_rng);
      obs.cost = config.costs.c[choice.objective];
      rec.values.push_back(obs.value);
      rec.cost = obs.cost;
      observations.push_back(std::move(obs));
    }
    spent += rec.cost;
    rec.cumulative_cost = spent;
    trace.records.push_back(std::move(rec));

    fit = fit_map(observations, m_count, config.priors, fit_config, &trace.frozen_mean_raw,
                  &fit.kernel, &fit.noise);
    if (fit.warning) {
      trace.warnings.push_back("iteration " + std::to_string(iteration) +
                               ": hyperparameter fit kept an initialization");
    }
    state = make_state(fit);

    record_crossed_checkpoints();
  }

  // Budget exhausted: remaining thresholds get the terminal regret.
  if (config.compute_regret && next_threshold < thresholds.size()) {
    RegretReport report = bayesian_regret(state, problem, metric_lambdas, post_nsga,
                                          true_front, config.archive_points);
    while (next_threshold < thresholds.size()) {
      RegretCheckpoint cp;
      cp.threshold = thresholds[next_threshold];
      cp.cumulative_cost = spent;
      cp.iteration = iteration;
      cp.report = report;
      trace.checkpoints.push_back(cp);
      ++next_threshold;
    }
  }

  trace.total_cost = spent;
  return trace;
}

std::vector<AggregateRow> aggregate_runs(std::span<const RunSummary> runs) {
  // Keyed by mode name so row order matches the CSV sort used downstream;
  // per-bucket values are sorted before accumulating, which makes the
  // aggregates exactly invariant to run order.
  std::map<std::tuple<int, std::string, double>, std::pair<Mode, std::vector<double>>>
      buckets;
  for (const auto& run : runs) {
    if (run.failed) continue;
    for (const auto& cp : run.trace.checkpoints) {
      auto& bucket = buckets[{run.family, mode_name(run.mode), cp.threshold}];
      bucket.first = run.mode;
      bucket.second.push_back(cp.report.regret);
    }
  }
  std::vector<AggregateRow> rows;
  for (auto& [key, bucket] : buckets) {
    std::vector<double>& regrets = bucket.second;
    std::sort(regrets.begin(), regrets.end());
    AggregateRow row;
    row.family = std::get<0>(key);
    row.mode = bucket.first;
    row.checkpoint = std::get<2>(key);
    row.n_runs = static_cast<int>(regrets.size());
    double sum = 0.0;
    for (double r : regrets) sum += r;
    row.mean_regret = sum / row.n_runs;
    if (row.n_runs > 1) {
      double ss = 0.0;
      for (double r : regrets) ss += (r - row.mean_regret) * (r - row.mean_regret);
      const double sd = std::sqrt(ss / (row.n_runs - 1));
      row.ci95_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(row.n_runs));
      row.has_ci = true;
    }
    rows.push_back(row);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.repeats < 1) throw std::invalid_argument("run_experiment: repeats must be >= 1");

  struct Task {
    int family;
    int repeat;
    Mode mode;
  };
  std::vector<Task> tasks;
  for (int family : spec.families) {
    for (int repeat = 0; repeat < spec.repeats; ++repeat) {
      for (Mode mode : spec.modes) tasks.push_back({family, repeat, mode});
    }
  }

  ExperimentResult result;
  result.runs.resize(tasks.size());

  // The ground-truth archive is shared by all modes of one (family, repeat).
  std::map<std::pair<int, int>, ParetoArchive> true_fronts;
  if (spec.base.compute_regret) {
    for (int family : spec.families) {
      for (int repeat = 0; repeat < spec.repeats; ++repeat) {
        RunSeeds seeds = derive_seeds(spec.master_seed, repeat);
        SyntheticProblem problem = generate_problem(family, seeds.problem);
        Nsga2Config cfg = spec.base.nsga;
        cfg.seed = seeds.metric + 101;
        true_fronts[{family, repeat}] =
            true_front_archive(problem, cfg, spec.base.archive_points);
      }
    }
  }

  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      RunSummary& summary = result.runs[i];
      summary.family = task.family;
      summary.repeat = task.repeat;
      summary.mode = task.mode;
      RunSeeds seeds = derive_seeds(spec.master_seed, task.repeat);
      summary.problem_seed = seeds.problem;
      try {
        SyntheticProblem problem = generate_problem(task.family, seeds.problem);
        RunConfig config = spec.base;
        config.mode = task.mode;
        config.seeds = seeds;
        if (config.priors.per_objective.empty()) config.priors = default_priors(task.family);
        const ParetoArchive* front = nullptr;
        if (auto it = true_fronts.find({task.family, task.repeat}); it != true_fronts.end()) {
          front = &it->second;
        }
        summary.trace = run_bo(problem, config, front);
      } catch (const std::exception& e) {
        summary.failed = true;
        summary.error = e.what();
      }
    }
  };

  const int thread_count = std::max(1, spec.threads);
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& run : result.runs) {
    if (run.failed) ++result.failures;
  }
  result.aggregate = aggregate_runs(result.runs);
  return result;
}

}  // namespace cmokg
