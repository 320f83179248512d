#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmokg/bo_loop.hpp"
#include "cmokg/plot.hpp"
#include "cmokg/report.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace cmokg;

namespace {

constexpr const char* kCodeVersion = "cmokg 0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) {
      throw UsageError("config: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

struct CliConfig {
  ExperimentSpec spec;
  std::string out_dir = "out";
  std::string raw_text;
};

CliConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }

  reject_unknown_keys(j, {"master_seed", "families", "modes", "repeats", "budget",
                          "initial_points", "q", "costs", "checkpoint_interval",
                          "threads", "out_dir", "archive_points", "metric_lambda_count",
                          "inner_grid_per_dim", "nsga", "optimizer", "fit"},
                      "top level");

  CliConfig cfg;
  cfg.raw_text = text;
  auto& spec = cfg.spec;
  try {
    if (j.contains("master_seed")) spec.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("families")) spec.families = j["families"].get<std::vector<int>>();
    if (j.contains("modes")) {
      spec.modes.clear();
      for (const auto& name : j["modes"].get<std::vector<std::string>>()) {
        auto mode = mode_from_name(name);
        if (!mode) throw UsageError("config: unknown mode \"" + name + "\"");
        spec.modes.push_back(*mode);
      }
    }
    if (j.contains("repeats")) spec.repeats = j["repeats"].get<int>();
    if (j.contains("threads")) spec.threads = j["threads"].get<int>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();

    RunConfig& base = spec.base;
    if (j.contains("budget")) base.budget = j["budget"].get<double>();
    if (j.contains("initial_points")) base.initial_points = j["initial_points"].get<int>();
    if (j.contains("q")) base.q = j["q"].get<int>();
    if (j.contains("costs")) {
      auto costs = j["costs"].get<std::vector<double>>();
      base.costs = CostVector::of(Eigen::Map<const Eigen::VectorXd>(costs.data(), costs.size()));
    }
    if (j.contains("checkpoint_interval")) {
      base.checkpoint_interval = j["checkpoint_interval"].get<double>();
    }
    if (j.contains("archive_points")) base.archive_points = j["archive_points"].get<int>();
    if (j.contains("metric_lambda_count")) {
      base.metric_lambda_count = j["metric_lambda_count"].get<int>();
    }
    if (j.contains("inner_grid_per_dim")) {
      base.inner_grid_per_dim = j["inner_grid_per_dim"].get<int>();
    }
    if (j.contains("nsga")) {
      const json& n = j["nsga"];
      reject_unknown_keys(n, {"population", "generations", "crossover_prob", "crossover_eta",
                              "mutation_prob", "mutation_eta"},
                          "nsga");
      if (n.contains("population")) base.nsga.population = n["population"].get<int>();
      if (n.contains("generations")) base.nsga.generations = n["generations"].get<int>();
      if (n.contains("crossover_prob")) base.nsga.crossover_prob = n["crossover_prob"].get<double>();
      if (n.contains("crossover_eta")) base.nsga.crossover_eta = n["crossover_eta"].get<double>();
      if (n.contains("mutation_prob")) base.nsga.mutation_prob = n["mutation_prob"].get<double>();
      if (n.contains("mutation_eta")) base.nsga.mutation_eta = n["mutation_eta"].get<double>();
    }
    if (j.contains("optimizer")) {
      const json& o = j["optimizer"];
      reject_unknown_keys(o, {"restarts", "max_iterations", "coarse_per_dim",
                              "grid_seed_points", "finite_difference_step",
                              "benchmark_fantasies"},
                          "optimizer");
      if (o.contains("restarts")) base.opt.restarts = o["restarts"].get<int>();
      if (o.contains("max_iterations")) base.opt.max_iterations = o["max_iterations"].get<int>();
      if (o.contains("coarse_per_dim")) base.opt.coarse_per_dim = o["coarse_per_dim"].get<int>();
      if (o.contains("grid_seed_points")) {
        base.opt.grid_seed_points = o["grid_seed_points"].get<int>();
      }
      if (o.contains("finite_difference_step")) {
        base.opt.finite_difference_step = o["finite_difference_step"].get<double>();
      }
      if (o.contains("benchmark_fantasies")) {
        base.opt.benchmark_fantasies = o["benchmark_fantasies"].get<int>();
      }
    }
    if (j.contains("fit")) {
      const json& f = j["fit"];
      reject_unknown_keys(f, {"restarts", "max_iterations", "burst_iterations", "survivors"},
                          "fit");
      if (f.contains("restarts")) base.fit.restarts = f["restarts"].get<int>();
      if (f.contains("max_iterations")) base.fit.max_iterations = f["max_iterations"].get<int>();
      if (f.contains("burst_iterations")) {
        base.fit.burst_iterations = f["burst_iterations"].get<int>();
      }
      if (f.contains("survivors")) base.fit.survivors = f["survivors"].get<int>();
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (spec.families.empty()) throw UsageError("config: families must be nonempty");
  for (int f : spec.families) {
    if (f != 1 && f != 2) throw UsageError("config: families entries must be 1 or 2");
  }
  if (spec.modes.empty()) throw UsageError("config: modes must be nonempty");
  if (spec.repeats < 1) throw UsageError("config: repeats must be >= 1");
  return cfg;
}

int cmd_generate(int family, int count, std::uint64_t seed, const std::string& out_dir) {
  if (family != 1 && family != 2) throw UsageError("generate: family must be 1 or 2");
  if (count < 1) throw UsageError("generate: count must be >= 1");
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    SyntheticProblem problem = generate_problem(family, s);
    fs::path path = fs::path(out_dir) / ("family" + std::to_string(family) + "_seed" +
                                         std::to_string(s) + ".problem");
    save_problem(problem, path);
    std::cout << path.string() << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            int threads_override, std::int64_t seed_override) {
  CliConfig cfg = parse_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (threads_override > 0) cfg.spec.threads = threads_override;
  if (seed_override >= 0) cfg.spec.master_seed = static_cast<std::uint64_t>(seed_override);

  ExperimentResult result = run_experiment(cfg.spec);

  fs::create_directories(cfg.out_dir);
  json manifest;
  manifest["format"] = "cmokg-manifest-v1";
  manifest["code_version"] = kCodeVersion;
  manifest["config_hash"] = fnv1a_hex(cfg.raw_text);
  manifest["master_seed"] = cfg.spec.master_seed;
  manifest["seed_scheme"] = {
      {"problem", "master+1000*i"}, {"design", "master+2000*i"},
      {"lambda", "master+3000*i"},  {"noise", "master+4000*i"},
      {"optimizer", "master+5000*i"}, {"metric", "master+6000+i"}};
  manifest["scramble"] = "digital-shift";
  manifest["repeats"] = cfg.spec.repeats;
  std::vector<std::string> mode_names;
  for (Mode mode : cfg.spec.modes) mode_names.emplace_back(mode_name(mode));
  manifest["modes"] = mode_names;
  manifest["families"] = cfg.spec.families;
  json seeds = json::array();
  for (int i = 0; i < cfg.spec.repeats; ++i) {
    RunSeeds s = derive_seeds(cfg.spec.master_seed, i);
    seeds.push_back({{"repeat", i}, {"problem", s.problem}, {"design", s.design},
                     {"lambda", s.lambda}, {"noise", s.noise}, {"optimizer", s.optimizer},
                     {"metric", s.metric}});
  }
  manifest["seeds"] = seeds;

  std::vector<std::string> artifacts;
  for (int family : cfg.spec.families) {
    std::vector<RunSummary> family_runs;
    for (const auto& run : result.runs) {
      if (run.family == family) family_runs.push_back(run);
    }
    std::vector<AggregateRow> family_rows;
    for (const auto& row : result.aggregate) {
      if (row.family == family) family_rows.push_back(row);
    }
    fs::path dir = fs::path(cfg.out_dir) / ("family" + std::to_string(family));
    fs::create_directories(dir);
    write_text_file(dir / "trace.csv", trace_csv(family_runs));
    write_text_file(dir / "aggregate.csv", aggregate_csv(family_rows));
    write_text_file(dir / "regret.csv", regret_csv(family_runs));
    for (const char* name : {"trace.csv", "aggregate.csv", "regret.csv"}) {
      artifacts.push_back("family" + std::to_string(family) + "/" + name);
    }
  }
  manifest["artifacts"] = artifacts;
  manifest["failures"] = result.failures;
  json failed = json::array();
  for (const auto& run : result.runs) {
    if (run.failed) {
      failed.push_back({{"family", run.family}, {"repeat", run.repeat},
                        {"mode", mode_name(run.mode)}, {"error", run.error}});
    }
  }
  manifest["failed_runs"] = failed;
  write_text_file(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "runs: " << result.runs.size() << ", failures: " << result.failures
            << ", outputs in " << cfg.out_dir << "\n";
  return result.failures == 0 ? 0 : 2;
}

int cmd_aggregate(const std::string& runs_csv, const std::string& out_csv) {
  std::ifstream in(runs_csv);
  if (!in) throw UsageError("aggregate: cannot open " + runs_csv);
  std::string line;
  if (!std::getline(in, line) ||
      line != "run_seed,mode,checkpoint_cost,regret,normalized_regret") {
    throw UsageError("aggregate: unexpected header in " + runs_csv);
  }
  std::map<std::pair<std::string, double>, std::vector<double>> buckets;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5) throw UsageError("aggregate: malformed row: " + line);
    buckets[{fields[1], std::stod(fields[2])}].push_back(std::stod(fields[3]));
  }
  std::string out = "mode,checkpoint_cost,mean_regret,ci95_halfwidth,n_runs\n";
  for (auto& [key, regrets] : buckets) {
    std::sort(regrets.begin(), regrets.end());
    const int n = static_cast<int>(regrets.size());
    double mean = 0.0;
    for (double r : regrets) mean += r;
    mean /= n;
    out += key.first + "," + format_double(key.second) + "," + format_double(mean) + ",";
    if (n > 1) {
      double ss = 0.0;
      for (double r : regrets) ss += (r - mean) * (r - mean);
      out += format_double(1.96 * std::sqrt(ss / (n - 1)) / std::sqrt(double(n)));
    }
    out += "," + std::to_string(n) + "\n";
  }
  write_text_file(out_csv, out);
  return 0;
}

int cmd_plot(const std::string& in_csv, const std::string& out_svg) {
  std::ifstream in(in_csv);
  if (!in) throw UsageError("plot: cannot open " + in_csv);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ParsedAggregate parsed;
  try {
    parsed = parse_aggregate_csv(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("plot: ") + e.what());
  }
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
  write_text_file(out_svg, render_regret_svg(parsed.series));
  return 0;
}

int run_selftest();

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-aware multi-objective Bayesian optimization harness"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Generate synthetic problem files");
  int family = 1, count = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "problems";
  gen->add_option("--family", family, "Problem family (1 or 2)");
  gen->add_option("--count", count, "Number of problems");
  gen->add_option("--seed", seed, "First problem seed");
  gen->add_option("--out", out_dir, "Output directory");

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path;
  std::string run_out;
  int threads = 0;
  std::int64_t master = -1;
  run->add_option("--config", config_path, "JSON config path")->required();
  run->add_option("--out", run_out, "Output directory (overrides config)");
  run->add_option("--threads", threads, "Worker threads (overrides config)");
  run->add_option("--seed", master, "Master seed (overrides config)");

  auto* agg = app.add_subcommand("aggregate", "Aggregate a per-run regret CSV");
  std::string runs_csv, agg_out = "aggregate.csv";
  agg->add_option("--runs", runs_csv, "Per-run regret CSV")->required();
  agg->add_option("--out", agg_out, "Output aggregate CSV");

  auto* plot = app.add_subcommand("plot", "Render an aggregate CSV as SVG");
  std::string plot_in, plot_out = "regret.svg";
  plot->add_option("--input", plot_in, "Aggregate CSV")->required();
  plot->add_option("--out", plot_out, "Output SVG path");

  auto* self = app.add_subcommand("selftest", "Run built-in consistency checks");
  (void)self;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_generate(family, count, seed, out_dir);
    if (run->parsed()) return cmd_run(config_path, run_out, threads, master);
    if (agg->parsed()) return cmd_aggregate(runs_csv, agg_out);
    if (plot->parsed()) return cmd_plot(plot_in, plot_out);
    if (self->parsed()) return run_selftest();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

namespace {

int run_selftest() {
  int failures = 0;
  auto check = [&](bool ok, const std::string& name) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    const double a[] = {0.0, 0.0};
    const double b[] = {-1.0, 1.0};
    const double v = expected_max_affine(a, b);
    check(std::abs(v - 0.7978845608028654) < 1e-12, "expected-max of |Z| lines");
    Epigraph epi = epigraph(a, b);
    check(epi.kept.size() == 2 && std::abs(epi.breakpoints[0]) < 1e-15,
          "epigraph keeps both symmetric lines");
  }
  {
    SobolStream stream(2, 0);
    Eigen::VectorXd p = stream.next();
    check(p[0] == 0.5 && p[1] == 0.5, "first unscrambled 2-D low-discrepancy point");
  }
  {
    KernelSpec kernel;
    kernel.length_scale = Eigen::Vector2d(0.3, 0.5);
    kernel.output_scale = Eigen::Vector2d(1.0, 2.0);
    kernel.constant_mean = Eigen::Vector2d(0.0, 0.0);
    NoiseModel noise;
    noise.noise_variance = Eigen::Vector2d(1e-4, 1e-4);
    noise.learnable = {false, false};
    PosteriorState prior(kernel, noise, 2);
    RngStream rng(7);
    std::vector<ObservationRecord> obs;
    for (int i = 0; i < 5; ++i) {
      ObservationRecord rec;
      rec.location = Eigen::Vector2d(rng.uniform(), rng.uniform());
      rec.objective = i % 2;
      rec.value = rng.normal();
      rec.cost = 1.0;
      obs.push_back(rec);
    }
    PosteriorState state = prior.conditioned(obs);
    CostVector costs = CostVector::of(Eigen::Vector2d(1.0, 10.0));
    auto grid = uniform_grid(2, 4);
    bool ok = true;
    for (int t = 0; t < 100 && ok; ++t) {
      Eigen::Vector2d x(rng.uniform(), rng.uniform());
      SimplexWeight lambda = simplex_from_cube(Eigen::VectorXd::Constant(1, rng.uniform()));
      ok = cmokg::cmokg(state, x, t % 2, lambda, grid, costs) >= -1e-10;
    }
    check(ok, "acquisition non-negativity on random candidates");
  }
  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 2;
}

}  // namespace
