#include "cmokg/acq_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cmokg/optimize.hpp"

namespace cmokg {

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct SearchOutcome {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  bool improved = false;  // local search beat the best seed
};

/// Multistart bounded maximization of `f` over [0,1]^D, seeded from the best
/// points of a coarse grid. `coarse_values` must align with `coarse`.
SearchOutcome refine_from_grid(const std::function<double(const Eigen::VectorXd&)>& f,
                               const std::vector<Eigen::VectorXd>& coarse,
                               const Eigen::VectorXd& coarse_values,
                               const OptimizerConfig& config) {
  const int dim = static_cast<int>(coarse.front().size());
  std::vector<int> order(coarse.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return coarse_values[a] > coarse_values[b]; });

  SearchOutcome best;
  best.x = coarse[order[0]];
  best.value = coarse_values[order[0]];

  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd hi = Eigen::VectorXd::Ones(dim);
  MinimizeOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.fd_step = config.finite_difference_step;

  const int seeds = std::min<int>({config.grid_seed_points, config.restarts,
                                   static_cast<int>(coarse.size())});
  for (int k = 0; k < seeds; ++k) {
    MinimizeResult res = bounded_minimize_fd(
        [&](const Eigen::VectorXd& x) { return -f(x); }, coarse[order[k]], lo, hi, opts);
    const double value = -res.value;
    if (!std::isfinite(value)) continue;
    if (value > best.value ||
        (value == best.value && lex_less(res.x, best.x))) {
      best.x = res.x;
      best.value = value;
      best.improved = true;
    }
  }
  return best;
}

}  // namespace

std::vector<Eigen::VectorXd> uniform_grid(int input_dim, int per_dim) {
  if (input_dim < 1 || per_dim < 2) {
    throw std::invalid_argument("uniform_grid: need input_dim >= 1 and per_dim >= 2");
  }
  std::vector<Eigen::VectorXd> out;
  const int total = static_cast<int>(std::pow(per_dim, input_dim));
  out.reserve(total);
  std::vector<int> idx(input_dim, 0);
  for (int count = 0; count < total; ++count) {
    Eigen::VectorXd p(input_dim);
    for (int d = 0; d < input_dim; ++d) {
      p[d] = static_cast<double>(idx[d]) / (per_dim - 1);
    }
    out.push_back(std::move(p));
    for (int d = input_dim - 1; d >= 0; --d) {
      if (++idx[d] < per_dim) break;
      idx[d] = 0;
    }
  }
  return out;
}

AcquisitionChoice maximize_acquisition(const PosteriorState& state, AcquisitionMode mode,
                                       std::span<const SimplexWeight> lambdas,
                                       std::span<const Eigen::VectorXd> inner_grid,
                                       const CostVector& costs,
                                       const OptimizerConfig& config,
                                       std::span<const int> allowed_objectives) {
  if (lambdas.empty()) throw std::invalid_argument("maximize_acquisition: no weights");
  if (mode == AcquisitionMode::RandomLambda && lambdas.size() != 1) {
    throw std::invalid_argument("maximize_acquisition: random mode takes exactly one weight");
  }
  const int m_count = state.num_objectives();
  std::vector<int> allowed(allowed_objectives.begin(), allowed_objectives.end());
  if (allowed.empty()) {
    allowed.resize(m_count);
    std::iota(allowed.begin(), allowed.end(), 0);
  }

  KgContext ctx(state, std::vector<Eigen::VectorXd>(inner_grid.begin(), inner_grid.end()));
  std::vector<Eigen::VectorXd> coarse = uniform_grid(state.input_dim(), config.coarse_per_dim);
  Eigen::MatrixXd coarse_mat(coarse.size(), state.input_dim());
  for (size_t i = 0; i < coarse.size(); ++i) coarse_mat.row(i) = coarse[i].transpose();

  AcquisitionChoice best;
  best.value = -std::numeric_limits<double>::infinity();
  bool any = false;

  if (mode == AcquisitionMode::BenchmarkJoint) {
    auto f = [&](const Eigen::VectorXd& x) {
      return ctx.joint_mean(x, lambdas, config.benchmark_fantasies,
                            config.benchmark_fantasy_seed);
    };
    Eigen::VectorXd cv(coarse.size());
    for (size_t i = 0; i < coarse.size(); ++i) cv[static_cast<int>(i)] = f(coarse[i]);
    SearchOutcome out = refine_from_grid(f, coarse, cv, config);
    best.x = out.x;
    best.objective = kAllObjectives;
    best.value = out.value / costs.total();
    best.fallback = !out.improved;
    return best;
  }

  for (int m : allowed) {
    if (m < 0 || m >= m_count) {
      throw std::invalid_argument("maximize_acquisition: allowed objective out of range");
    }
    auto f = [&](const Eigen::VectorXd& x) { return ctx.mokg_mean(x, m, lambdas); };
    Eigen::VectorXd cv = ctx.mokg_mean_batch(coarse_mat, m, lambdas);
    SearchOutcome out = refine_from_grid(f, coarse, cv, config);
    const double weighted = out.value / costs.c[m];
    const bool better =
        !any || weighted > best.value ||
        (weighted == best.value &&
         (m < best.objective ||
          (m == best.objective && lex_less(out.x, best.x))));
    if (better) {
      best.x = out.x;
      best.objective = m;
      best.value = weighted;
      best.fallback = !out.improved;
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("maximize_acquisition: no allowed objectives");
  return best;
}

Eigen::VectorXd maximize_posterior_mean(const PosteriorState& state,
                                        const SimplexWeight& lambda,
                                        const OptimizerConfig& config) {
  auto f = [&](const Eigen::VectorXd& x) {
    return lambda.w.dot(state.mean_vector(x));
  };
  std::vector<Eigen::VectorXd> coarse = uniform_grid(state.input_dim(), config.coarse_per_dim);
  Eigen::VectorXd cv(coarse.size());
  for (size_t i = 0; i < coarse.size(); ++i) cv[static_cast<int>(i)] = f(coarse[i]);
  return refine_from_grid(f, coarse, cv, config).x;
}

}  // namespace cmokg
