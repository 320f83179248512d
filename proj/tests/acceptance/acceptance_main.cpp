// Acceptance suite: one pass/fail line per criterion, exit 0 only if all pass.
// An optional argument selects a comma-separated subset, e.g. "1,2,3".

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cmokg/acq_opt.hpp"
#include "cmokg/bo_loop.hpp"
#include "cmokg/report.hpp"
#include "../oracles.hpp"
#include "../test_util.hpp"

namespace fs = std::filesystem;
using namespace cmokg;
using namespace cmokg::test;
using Clock = std::chrono::steady_clock;

namespace {

// ---------------------------------------------------------------------------
// Shared experiment for criteria 4, 5 and 6: family 1, paired repeats, all
// three sampling policies, c = (1, 10), Q = 16, 11x11 inner grid, budget 400.
// ---------------------------------------------------------------------------

constexpr int kRepeats = 20;
constexpr double kBudget = 400.0;
constexpr std::uint64_t kMasterSeed = 424242;

ExperimentSpec experiment_spec() {
  ExperimentSpec spec;
  spec.families = {1};
  spec.modes = {Mode::CmokgExpectation, Mode::CmokgRandom, Mode::BenchmarkBoth};
  spec.repeats = kRepeats;
  spec.master_seed = kMasterSeed;
  spec.threads = 1;
  spec.base.budget = kBudget;
  spec.base.initial_points = 6;
  spec.base.q = 16;
  spec.base.costs = CostVector::of(Eigen::Vector2d(1.0, 10.0));
  spec.base.checkpoint_interval = 25.0;
  spec.base.inner_grid_per_dim = 11;
  spec.base.priors = default_priors(1);
  return spec;
}

const ExperimentResult& shared_experiment() {
  static ExperimentResult result = [] {
    std::cout << "  (running the shared family-1 experiment: 3 modes x " << kRepeats
              << " repeats, budget " << kBudget << ")\n"
              << std::flush;
    return run_experiment(experiment_spec());
  }();
  return result;
}

std::map<int, double> final_regret_by_repeat(const ExperimentResult& result, Mode mode) {
  std::map<int, double> out;
  for (const auto& run : result.runs) {
    if (run.mode != mode || run.failed) continue;
    for (const auto& cp : run.trace.checkpoints) {
      if (cp.threshold == kBudget) out[run.repeat] = cp.report.regret;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

bool criterion_1(std::string& detail) {
  RngStream rng(1001);
  int within = 0;
  const int instances = 100;
  for (int trial = 0; trial < instances; ++trial) {
    PosteriorState state = random_state(rng, 2, 6);
    std::vector<Eigen::VectorXd> grid;
    for (int i = 0; i < 5; ++i) grid.push_back(pt(rng.uniform(), rng.uniform()));
    Eigen::VectorXd x = pt(rng.uniform(), rng.uniform());
    const int m = static_cast<int>(rng.below(2));
    SimplexWeight lambda = weight2(rng.uniform());

    const double exact = mokg_discrete(state, x, m, lambda, grid);
    McResult mc = fantasy_mc(state, x, m, lambda, grid, 1000000, 5000 + trial);
    const double tol = mc.std_error > 0.0 ? 3.0 * mc.std_error : 1e-9;
    if (std::abs(exact - mc.estimate) <= tol) ++within;
  }
  detail = std::to_string(within) + "/" + std::to_string(instances) + " within 3 SE";
  return within >= 97;
}

bool criterion_2(std::string& detail) {
  RngStream rng(2002);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    KernelSpec kernel = kernel2(0.2 + 0.5 * rng.uniform(), 0.2 + 0.5 * rng.uniform(),
                                0.5 + 1.5 * rng.uniform(), 0.5 + 1.5 * rng.uniform(),
                                0.4 * rng.normal(), 0.4 * rng.normal());
    NoiseModel noise = noise2(0.02 * rng.uniform() + 1e-4, 0.02 * rng.uniform() + 1e-4);
    DenseOracle oracle{kernel, noise, {}};
    const int count = 2 + static_cast<int>(rng.below(9));
    for (int i = 0; i < count; ++i) {
      oracle.records.push_back(
          obs(rng.uniform(), rng.uniform(), static_cast<int>(rng.below(2)), rng.normal()));
    }
    PosteriorState state = PosteriorState(kernel, noise, 2).conditioned(oracle.records);
    std::vector<Eigen::VectorXd> queries;
    for (int i = 0; i < 5; ++i) queries.push_back(pt(rng.uniform(), rng.uniform()));
    MeanCov mc = state.mean_cov(queries);
    for (int m = 0; m < 2; ++m) {
      for (int i = 0; i < 5; ++i) {
        worst = std::max(worst, std::abs(mc.mean(i, m) - oracle.mean(queries[i], m)));
        for (int j = 0; j < 5; ++j) {
          worst = std::max(worst, std::abs(mc.cov[m](i, j) -
                                           oracle.cov(queries[i], queries[j], m)));
        }
      }
    }
  }
  std::ostringstream os;
  os << "max |difference| = " << worst;
  detail = os.str();
  return worst <= 1e-8;
}

bool criterion_3(std::string& detail) {
  RngStream rng(3003);
  CostVector costs = CostVector::of(Eigen::Vector2d(1.0, 10.0));
  auto grid = uniform_grid(2, 4);  // 16 points

  double min_value = 1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    PosteriorState state = random_state(rng, 2, 6);
    Eigen::VectorXd x = pt(rng.uniform(), rng.uniform());
    SimplexWeight lambda = weight2(rng.uniform());
    const int m = static_cast<int>(rng.below(2));
    min_value = std::min(min_value, ::cmokg::cmokg(state, x, m, lambda, grid, costs));
  }
  if (min_value < -1e-10) {
    detail = "a cost-weighted value fell to " + format_double(min_value);
    return false;
  }

  auto dense_grid = uniform_grid(2, 6);  // 36 points
  int h_ok = 0, bound_ok = 0;
  const int cases = 200;
  for (int trial = 0; trial < cases; ++trial) {
    PosteriorState state = random_state(rng, 2, 6);
    SimplexWeight lambda = weight2(rng.uniform());
    McEstimate h = residual_uncertainty_mc(state, lambda, dense_grid, 4000, 9000 + trial);
    if (h.value >= -3.0 * h.std_error) ++h_ok;
    Eigen::VectorXd x = pt(rng.uniform(), rng.uniform());
    const int m = static_cast<int>(rng.below(2));
    const double scaled = costs.c[m] * ::cmokg::cmokg(state, x, m, lambda, dense_grid, costs);
    if (h.value >= scaled - 3.0 * h.std_error) ++bound_ok;
  }
  detail = "1000 values >= -1e-10; " + std::to_string(h_ok) + "/200 non-negative, " +
           std::to_string(bound_ok) + "/200 dominate the scaled acquisition";
  return h_ok == cases && bound_ok == cases;
}

bool criterion_4(std::string& detail) {
  const ExperimentResult& result = shared_experiment();
  auto expectation = final_regret_by_repeat(result, Mode::CmokgExpectation);
  auto benchmark = final_regret_by_repeat(result, Mode::BenchmarkBoth);
  if (expectation.size() != kRepeats || benchmark.size() != kRepeats) {
    detail = "missing runs (failures: " + std::to_string(result.failures) + ")";
    return false;
  }
  double mean_e = 0.0, mean_b = 0.0;
  int wins = 0;
  for (int i = 0; i < kRepeats; ++i) {
    mean_e += expectation[i];
    mean_b += benchmark[i];
    if (expectation[i] < benchmark[i]) ++wins;
  }
  mean_e /= kRepeats;
  mean_b /= kRepeats;
  std::ostringstream os;
  os << "mean regret " << mean_e << " vs benchmark " << mean_b << ", paired wins " << wins
     << "/" << kRepeats;
  detail = os.str();
  return mean_e < mean_b && wins >= 14;
}

bool criterion_5(std::string& detail) {
  const ExperimentResult& result = shared_experiment();
  auto expectation = final_regret_by_repeat(result, Mode::CmokgExpectation);
  auto random = final_regret_by_repeat(result, Mode::CmokgRandom);
  if (expectation.size() != kRepeats || random.size() != kRepeats) {
    detail = "missing runs (failures: " + std::to_string(result.failures) + ")";
    return false;
  }
  double mean_e = 0.0, mean_r = 0.0;
  int wins = 0;
  for (int i = 0; i < kRepeats; ++i) {
    mean_e += expectation[i];
    mean_r += random[i];
    if (expectation[i] < random[i]) ++wins;
  }
  mean_e /= kRepeats;
  mean_r /= kRepeats;
  std::ostringstream os;
  os << "mean regret " << mean_e << " vs random-weights " << mean_r << ", paired wins "
     << wins << "/" << kRepeats;
  detail = os.str();
  return mean_e < mean_r && wins >= 13;
}

bool criterion_6(std::string& detail) {
  const ExperimentResult& result = shared_experiment();
  const double initial_cost = 66.0;
  std::vector<double> early_norm, late_norm;
  int violations = 0;
  int used = 0;
  for (const auto& run : result.runs) {
    if (run.mode != Mode::CmokgExpectation || run.failed || run.repeat >= 10) continue;
    ++used;
    const RegretCheckpoint* early = nullptr;
    const RegretCheckpoint* late = nullptr;
    for (const auto& cp : run.trace.checkpoints) {
      if (cp.threshold == initial_cost) early = &cp;
      if (cp.threshold == kBudget) late = &cp;
    }
    if (early == nullptr || late == nullptr) return false;
    early_norm.push_back(early->report.normalized_regret);
    late_norm.push_back(late->report.normalized_regret);
    const double slack = 3.0 * late->report.qmc_std_error +
                         0.02 * late->report.utility_range;
    if (late->report.regret > early->report.regret + slack) ++violations;
  }
  if (used != 10) {
    detail = "expected 10 runs, saw " + std::to_string(used);
    return false;
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  const double med_early = median(early_norm);
  const double med_late = median(late_norm);
  std::ostringstream os;
  os << "median normalized regret " << med_early << " -> " << med_late << ", "
     << violations << " non-monotone beyond slack";
  detail = os.str();
  return med_late <= 0.5 * med_early && violations == 0;
}

bool criterion_7(std::string& detail) {
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(pt(0.1 + 0.2 * i, 0.5));
  const std::vector<Eigen::Vector2d> truth = {
      {2.0, 0.0}, {1.6, 0.9}, {1.0, 1.3}, {0.4, 1.7}, {0.0, 2.1}};
  const std::vector<Eigen::Vector2d> believed = {
      {1.9, 0.2}, {1.4, 1.1}, {1.2, 1.0}, {0.5, 1.5}, {0.2, 1.9}};
  auto f_true = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    for (size_t i = 0; i < xs.size(); ++i) {
      if (x == xs[i]) return truth[i];
    }
    std::abort();
  };
  ParetoArchive ta, pa;
  for (size_t i = 0; i < xs.size(); ++i) {
    ta.points.push_back(xs[i]);
    ta.values.push_back(truth[i]);
    pa.points.push_back(xs[i]);
    pa.values.push_back(believed[i]);
  }
  SobolStream stream(1, 4242);
  auto lambdas = next_weights(stream, 1024);
  RegretReport report = regret_from_archives(ta, pa, f_true, lambdas);

  double opt_sum = 0.0, util_sum = 0.0;
  for (const auto& lam : lambdas) {
    double opt = -1e300;
    for (const auto& v : truth) opt = std::max(opt, lam.w.dot(v));
    int pick = 0;
    double best = -1e300;
    for (size_t i = 0; i < believed.size(); ++i) {
      const double s = lam.w.dot(believed[i]);
      if (s > best) {
        best = s;
        pick = static_cast<int>(i);
      }
    }
    opt_sum += opt;
    util_sum += lam.w.dot(truth[pick]);
  }
  const double expected = (opt_sum - util_sum) / static_cast<double>(lambdas.size());
  std::ostringstream os;
  os << "regret " << report.regret << ", enumeration " << expected;
  detail = os.str();
  return report.regret == expected;
}

bool criterion_8(std::string& detail) {
  Nsga2Config config;
  config.population = 100;
  config.generations = 100;
  config.seed = 8008;
  auto f = [](const Eigen::VectorXd& x) {
    return Eigen::Vector2d(x[0], 1.0 - x[0]);
  };
  ParetoArchive archive = nsga2_maximize(f, 2, config, 1000);
  std::vector<double> firsts;
  for (const auto& v : archive.values) firsts.push_back(v[0]);
  std::sort(firsts.begin(), firsts.end());
  double gap = firsts.front() - 0.05;
  for (size_t i = 1; i < firsts.size(); ++i) {
    if (firsts[i - 1] > 0.95) break;
    gap = std::max(gap, std::min(firsts[i], 0.95) - std::max(firsts[i - 1], 0.05));
  }
  gap = std::max(gap, 0.95 - firsts.back());

  // Regret insensitivity to the archive budget on a fixed mid-run state.
  SyntheticProblem problem = generate_problem(1, 404);
  RngStream noise_rng(5);
  auto design = initial_design(problem, 6, 606, noise_rng);
  FitConfig fit_config;
  fit_config.seed = 17;
  FitResult fit = fit_map(design, 2, default_priors(1), fit_config);
  PosteriorState state =
      PosteriorState(fit.kernel, fit.noise, 2, fit.transforms).conditioned(design);
  SobolStream stream(1, 777);
  auto lambdas = next_weights(stream, 1024);
  Nsga2Config base = config;
  base.seed = 111;
  RegretReport r100 = bayesian_regret(state, problem, lambdas, base, nullptr, 1000);
  Nsga2Config doubled = base;
  doubled.generations = 200;
  RegretReport r200 = bayesian_regret(state, problem, lambdas, doubled, nullptr, 1000);
  const double rel = std::abs(r200.regret - r100.regret) / std::abs(r100.regret);

  std::ostringstream os;
  os << "front gap " << gap << ", regret shift " << 100.0 * rel << "%";
  detail = os.str();
  return gap <= 0.1 && rel < 0.02;
}

bool criterion_9(std::string& detail) {
  fs::path dir = fs::temp_directory_path() / "cmokg_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path config = dir / "config.json";
  {
    std::ofstream out(config);
    out << R"({
  "master_seed": 99,
  "families": [1],
  "modes": ["cmokg-expectation", "benchmark-both"],
  "repeats": 2,
  "budget": 150.0,
  "initial_points": 6,
  "q": 8,
  "costs": [1.0, 10.0],
  "checkpoint_interval": 25.0,
  "threads": 1,
  "archive_points": 300,
  "metric_lambda_count": 256,
  "nsga": {"population": 40, "generations": 30},
  "optimizer": {"restarts": 5, "grid_seed_points": 5, "coarse_per_dim": 11, "max_iterations": 20},
  "fit": {"max_iterations": 20, "burst_iterations": 6}
})";
  }
  auto invoke = [&](const std::string& out_dir) {
    const std::string cmd = std::string(CMOKG_CLI_PATH) + " run --config " +
                            config.string() + " --out " + out_dir + " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  if (!invoke((dir / "a").string()) || !invoke((dir / "b").string())) {
    detail = "cmd_run failed";
    return false;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool same = true;
  for (const char* name : {"family1/trace.csv", "family1/aggregate.csv"}) {
    if (slurp(dir / "a" / name) != slurp(dir / "b" / name)) same = false;
  }
  detail = same ? "trace and aggregate CSVs byte-identical across two invocations"
                : "artifacts differ between invocations";
  fs::remove_all(dir);
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  if (argc > 1) {
    std::stringstream ss(argv[1]);
    std::string tok;
    while (std::getline(ss, tok, ',')) selected.insert(std::stoi(tok));
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "envelope KG equals brute-force fantasy Monte-Carlo", criterion_1},
      {2, "GP conditioning matches the dense direct solve", criterion_2},
      {3, "acquisition non-negativity and residual-uncertainty bounds", criterion_3},
      {4, "separate evaluation beats always-both at the final checkpoint", criterion_4},
      {5, "weight averaging beats single random weights", criterion_5},
      {6, "regret shrinks with budget on family 1", criterion_6},
      {7, "regret matches exhaustive enumeration on a discrete toy", criterion_7},
      {8, "evolutionary front coverage and archive insensitivity", criterion_8},
      {9, "byte-identical artifacts across repeated runs", criterion_9},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!selected.empty() && !selected.contains(criterion.id)) continue;
    const auto start = Clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
            .count() /
        1000.0;
    std::printf("[%s] criterion %d: %s (%s; %.1fs)\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.name, detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
