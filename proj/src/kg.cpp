#include "cmokg/kg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cmokg/rng.hpp"
#include "cmokg/sobol.hpp"

namespace cmokg {

namespace {

constexpr double kParallelTol = 1e-12;  // slope gap below which lines are parallel

struct SortedLines {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<int> index;  // original input index per entry
};

// Collapse slope-tie groups to their best intercept (smallest original index
// on exact ties). Input must be sorted by slope ascending.
SortedLines dedup_parallel(const std::vector<double>& a, const std::vector<double>& b,
                           const std::vector<int>& order) {
  SortedLines out;
  const int n = static_cast<int>(order.size());
  int i = 0;
  while (i < n) {
    int j = i;
    int best = order[i];
    double best_a = a[order[i]];
    double best_b = b[order[i]];
    while (j + 1 < n && b[order[j + 1]] - b[order[j]] <= kParallelTol) {
      ++j;
      const int cand = order[j];
      if (a[cand] > best_a || (a[cand] == best_a && cand < best)) {
        best = cand;
        best_a = a[cand];
        best_b = b[cand];
      }
    }
    out.a.push_back(best_a);
    out.b.push_back(best_b);
    out.index.push_back(best);
    i = j + 1;
  }
  return out;
}

// Middle line dominated test for slope-ascending lines l1, l2, l3.
bool middle_dominated(double a1, double b1, double a2, double b2, double a3, double b3) {
  return (a1 - a2) * (b3 - b2) >= (a2 - a3) * (b2 - b1);
}

Epigraph build_epigraph(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  if (n == 0) throw std::invalid_argument("epigraph: at least one line required");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
    if (b[l] != b[r]) return b[l] < b[r];
    if (a[l] != a[r]) return a[l] < a[r];
    return l < r;
  });
  SortedLines lines = dedup_parallel(a, b, order);

  std::vector<int> kept;  // positions into `lines`
  for (int i = 0; i < static_cast<int>(lines.a.size()); ++i) {
    while (kept.size() >= 2) {
      const int p1 = kept[kept.size() - 2];
      const int p2 = kept[kept.size() - 1];
      if (middle_dominated(lines.a[p1], lines.b[p1], lines.a[p2], lines.b[p2],
                           lines.a[i], lines.b[i])) {
        kept.pop_back();
      } else {
        break;
      }
    }
    kept.push_back(i);
  }

  Epigraph out;
  out.kept.reserve(kept.size());
  for (int p : kept) out.kept.push_back(lines.index[p]);
  for (size_t j = 0; j + 1 < kept.size(); ++j) {
    const int p = kept[j];
    const int q = kept[j + 1];
    out.breakpoints.push_back((lines.a[p] - lines.a[q]) / (lines.b[q] - lines.b[p]));
  }
  return out;
}

}  // namespace

CostVector CostVector::of(Eigen::VectorXd costs) {
  if (costs.size() == 0) throw std::invalid_argument("CostVector: empty");
  for (Eigen::Index i = 0; i < costs.size(); ++i) {
    if (!(costs[i] > 0.0)) throw std::invalid_argument("CostVector: entries must be positive");
  }
  return CostVector{std::move(costs)};
}

Epigraph epigraph(std::span<const double> intercepts, std::span<const double> slopes) {
  if (intercepts.size() != slopes.size()) {
    throw std::invalid_argument("epigraph: intercepts and slopes must match");
  }
  return build_epigraph(std::vector<double>(intercepts.begin(), intercepts.end()),
                        std::vector<double>(slopes.begin(), slopes.end()));
}

namespace {

struct EnvelopeScratch {
  std::vector<double> a, b;
  std::vector<int> order;
};

EnvelopeScratch& envelope_scratch() {
  thread_local EnvelopeScratch scratch;
  return scratch;
}

// E[max_j (a_j + b_j Z)] for lines already sorted by slope ascending (intercept
// order within a slope-tie group is arbitrary). Dedup, hull and integration in
// one pass over the scratch buffers.
double expected_max_sorted(const double* a, const double* b, int n,
                           EnvelopeScratch& s) {
  s.a.clear();
  s.b.clear();
  int i = 0;
  while (i < n) {
    int j = i;
    double best_a = a[i];
    double best_b = b[i];
    while (j + 1 < n && b[j + 1] - b[j] <= kParallelTol) {
      ++j;
      if (a[j] > best_a) {
        best_a = a[j];
        best_b = b[j];
      }
    }
    while (s.a.size() >= 2 &&
           middle_dominated(s.a[s.a.size() - 2], s.b[s.b.size() - 2], s.a.back(),
                            s.b.back(), best_a, best_b)) {
      s.a.pop_back();
      s.b.pop_back();
    }
    s.a.push_back(best_a);
    s.b.push_back(best_b);
    i = j + 1;
  }

  const int pieces = static_cast<int>(s.a.size());
  double sum = 0.0;
  double prev_cdf = 0.0, prev_pdf = 0.0;
  for (int p = 0; p < pieces; ++p) {
    double cdf = 1.0, pdf = 0.0;
    if (p + 1 < pieces) {
      const double z = (s.a[p] - s.a[p + 1]) / (s.b[p + 1] - s.b[p]);
      cdf = normal_cdf(z);
      pdf = normal_pdf(z);
    }
    sum += s.a[p] * (cdf - prev_cdf) + s.b[p] * (prev_pdf - pdf);
    prev_cdf = cdf;
    prev_pdf = pdf;
  }
  return sum;
}

}  // namespace

double expected_max_affine(std::span<const double> intercepts,
                           std::span<const double> slopes) {
  std::vector<double> a(intercepts.begin(), intercepts.end());
  std::vector<double> b(slopes.begin(), slopes.end());
  Epigraph epi = build_epigraph(a, b);

  const int pieces = static_cast<int>(epi.kept.size());
  double sum = 0.0;
  double prev_cdf = 0.0;  // Phi(-inf)
  double prev_pdf = 0.0;  // phi(-inf)
  for (int j = 0; j < pieces; ++j) {
    const double aj = a[epi.kept[j]];
    const double bj = b[epi.kept[j]];
    double cdf = 1.0, pdf = 0.0;
    if (j + 1 < pieces) {
      const double z = epi.breakpoints[j];
      cdf = normal_cdf(z);
      pdf = normal_pdf(z);
    }
    sum += aj * (cdf - prev_cdf) + bj * (prev_pdf - pdf);
    prev_cdf = cdf;
    prev_pdf = pdf;
  }
  return sum;
}

double mokg_discrete(const PosteriorState& state, const Eigen::VectorXd& x, int m,
                     const SimplexWeight& lambda, std::span<const Eigen::VectorXd> grid) {
  if (grid.empty()) throw std::invalid_argument("mokg_discrete: grid must be nonempty");
  FantasyAffine fa = state.fantasy_affine(x, m, lambda.w, grid);
  const double baseline = fa.intercept.maxCoeff();
  return expected_max_affine(std::span<const double>(fa.intercept.data(), fa.intercept.size()),
                             std::span<const double>(fa.slope.data(), fa.slope.size())) -
         baseline;
}

double cmokg(const PosteriorState& state, const Eigen::VectorXd& x, int m,
             const SimplexWeight& lambda, std::span<const Eigen::VectorXd> grid,
             const CostVector& costs) {
  return mokg_discrete(state, x, m, lambda, grid) / costs.c[m];
}

double cmokg_expectation(const PosteriorState& state, const Eigen::VectorXd& x, int m,
                         std::span<const SimplexWeight> lambdas,
                         std::span<const Eigen::VectorXd> grid, const CostVector& costs) {
  if (lambdas.empty()) throw std::invalid_argument("cmokg_expectation: empty weight list");
  double sum = 0.0;
  for (const auto& lambda : lambdas) sum += cmokg(state, x, m, lambda, grid, costs);
  return sum / static_cast<double>(lambdas.size());
}

// --- KgContext -------------------------------------------------------------

KgContext::KgContext(const PosteriorState& state, std::vector<Eigen::VectorXd> grid)
    : state_(state), grid_(std::move(grid)) {
  if (grid_.empty()) throw std::invalid_argument("KgContext: grid must be nonempty");
  const int g = static_cast<int>(grid_.size());
  const int m_count = state_.num_objectives();
  grid_points_.resize(g, state_.input_dim());
  for (int i = 0; i < g; ++i) grid_points_.row(i) = grid_[i].transpose();

  grid_mean_.resize(g, m_count);
  v_.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    const auto& data = state_.objective_data(m);
    const auto& t = state_.transform(m);
    Eigen::VectorXd mean_std =
        Eigen::VectorXd::Constant(g, state_.kernel().constant_mean[m]);
    if (data.locations.rows() > 0) {
      Eigen::MatrixXd k_xg = state_.kernel_matrix_against(m, grid_points_);
      mean_std += k_xg.transpose() * data.alpha;
      v_[m] = data.chol.triangularView<Eigen::Lower>().solve(k_xg);
    }
    grid_mean_.col(m) = (mean_std.array() * t.scale + t.shift).matrix();
  }
}

double KgContext::baseline(const SimplexWeight& lambda) const {
  return (grid_mean_ * lambda.w).maxCoeff();
}

KgContext::Candidate KgContext::prepare_candidate(const Eigen::VectorXd& x) const {
  const int m_count = state_.num_objectives();
  Candidate cand;
  cand.cov.resize(m_count);
  cand.total_sd.resize(m_count);
  const Eigen::ArrayXd d = (grid_points_.rowwise() - x.transpose()).rowwise().norm();
  for (int m = 0; m < m_count; ++m) {
    const auto& data = state_.objective_data(m);
    const auto& t = state_.transform(m);
    Eigen::ArrayXd r = d / state_.kernel().length_scale[m];
    Eigen::ArrayXd s = 2.2360679774997896964 * r;
    Eigen::VectorXd k_gx =
        (state_.kernel().output_scale[m] * (1.0 + s + (5.0 / 3.0) * r.square()) *
         (-s).exp())
            .matrix();

    double var_std = state_.kernel().output_scale[m];
    if (data.locations.rows() > 0) {
      Eigen::VectorXd w =
          data.chol.triangularView<Eigen::Lower>().solve(state_.kernel_vector(m, x));
      k_gx.noalias() -= v_[m].transpose() * w;
      var_std -= w.squaredNorm();
    }
    const double total_var_std =
        var_std + state_.noise().noise_variance[m] + state_.jitter(m);
    cand.cov[m] = k_gx * (t.scale * t.scale);
    cand.total_sd[m] =
        total_var_std > 0.0 ? std::sqrt(total_var_std) * t.scale : 0.0;
  }
  return cand;
}

double KgContext::mokg_from_candidate(const Candidate& cand, int m,
                                      const SimplexWeight& lambda) const {
  const int g = static_cast<int>(grid_.size());
  EnvelopeScratch& s = envelope_scratch();
  s.order.resize(g);
  std::iota(s.order.begin(), s.order.end(), 0);
  const Eigen::VectorXd& cov = cand.cov[m];
  std::sort(s.order.begin(), s.order.end(),
            [&](int l, int r) { return cov[l] < cov[r]; });
  return mokg_with_order(cand, s.order, m, lambda);
}

double KgContext::mokg_with_order(const Candidate& cand, const std::vector<int>& order,
                                  int m, const SimplexWeight& lambda) const {
  const int g = static_cast<int>(grid_.size());
  Eigen::VectorXd a = grid_mean_ * lambda.w;
  const double base = a.maxCoeff();
  if (cand.total_sd[m] <= 0.0 || lambda.w[m] == 0.0) return 0.0;
  const double scale = lambda.w[m] / cand.total_sd[m];

  thread_local std::vector<double> a_sorted, b_sorted;
  a_sorted.resize(g);
  b_sorted.resize(g);
  const Eigen::VectorXd& cov = cand.cov[m];
  for (int i = 0; i < g; ++i) {
    a_sorted[i] = a[order[i]];
    b_sorted[i] = scale * cov[order[i]];
  }
  return expected_max_sorted(a_sorted.data(), b_sorted.data(), g, envelope_scratch()) -
         base;
}

double KgContext::mokg(const Eigen::VectorXd& x, int m, const SimplexWeight& lambda) const {
  return mokg_from_candidate(prepare_candidate(x), m, lambda);
}

double KgContext::mokg_mean(const Eigen::VectorXd& x, int m,
                            std::span<const SimplexWeight> lambdas) const {
  if (lambdas.empty()) throw std::invalid_argument("mokg_mean: empty weight list");
  Candidate cand = prepare_candidate(x);
  return mokg_mean_from_candidate(cand, m, lambdas);
}

double KgContext::mokg_mean_from_candidate(const Candidate& cand, int m,
                                           std::span<const SimplexWeight> lambdas) const {
  const int g = static_cast<int>(grid_.size());
  thread_local std::vector<int> order;
  order.resize(g);
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd& cov = cand.cov[m];
  std::sort(order.begin(), order.end(), [&](int l, int r) { return cov[l] < cov[r]; });
  double sum = 0.0;
  for (const auto& lambda : lambdas) sum += mokg_with_order(cand, order, m, lambda);
  return sum / static_cast<double>(lambdas.size());
}

Eigen::VectorXd KgContext::mokg_mean_batch(const Eigen::MatrixXd& candidates, int m,
                                           std::span<const SimplexWeight> lambdas) const {
  const int count = static_cast<int>(candidates.rows());
  const int g = static_cast<int>(grid_.size());
  const auto& data = state_.objective_data(m);
  const auto& t = state_.transform(m);
  const double raw_sq = t.scale * t.scale;
  const double os = state_.kernel().output_scale[m];
  const double nv = state_.noise().noise_variance[m];

  // Cross-kernels of grid and candidates, batched.
  Eigen::MatrixXd k_gc(g, count);
  {
    Eigen::MatrixXd d2 = grid_points_.rowwise().squaredNorm().replicate(1, count) +
                         candidates.rowwise().squaredNorm().transpose().replicate(g, 1) -
                         2.0 * grid_points_ * candidates.transpose();
    Eigen::ArrayXXd r = d2.array().max(0.0).sqrt() / state_.kernel().length_scale[m];
    Eigen::ArrayXXd sr = 2.2360679774997896964 * r;
    k_gc = (os * (1.0 + sr + (5.0 / 3.0) * r.square()) * (-sr).exp()).matrix();
  }
  Eigen::VectorXd total_var = Eigen::VectorXd::Constant(count, os + nv);
  total_var.array() += state_.jitter(m);
  if (data.locations.rows() > 0) {
    Eigen::MatrixXd k_xc = state_.kernel_matrix_against(m, candidates);  // n x count
    Eigen::MatrixXd w = data.chol.triangularView<Eigen::Lower>().solve(k_xc);
    k_gc.noalias() -= v_[m].transpose() * w;
    total_var -= w.colwise().squaredNorm().transpose();
  }

  Eigen::VectorXd out(count);
  Candidate cand;
  cand.cov.resize(state_.num_objectives());
  cand.total_sd = Eigen::VectorXd::Zero(state_.num_objectives());
  for (int i = 0; i < count; ++i) {
    cand.cov[m] = k_gc.col(i) * raw_sq;
    cand.total_sd[m] = total_var[i] > 0.0 ? std::sqrt(total_var[i]) * t.scale : 0.0;
    out[i] = mokg_mean_from_candidate(cand, m, lambdas);
  }
  return out;
}

double KgContext::joint_mean(const Eigen::VectorXd& x,
                             std::span<const SimplexWeight> lambdas, int fantasy_count,
                             std::uint64_t seed) const {
  if (lambdas.empty()) throw std::invalid_argument("joint_mean: empty weight list");
  if (fantasy_count < 1) throw std::invalid_argument("joint_mean: fantasy_count must be >= 1");
  const int m_count = state_.num_objectives();
  const int g = static_cast<int>(grid_.size());
  Candidate cand = prepare_candidate(x);

  SobolStream stream(m_count, seed);
  Eigen::MatrixXd z(fantasy_count, m_count);
  for (int i = 0; i < fantasy_count; ++i) {
    Eigen::VectorXd u = stream.next();
    for (int m = 0; m < m_count; ++m) {
      z(i, m) = normal_inv_cdf(std::clamp(u[m], 1e-12, 1.0 - 1e-12));
    }
  }

  double total = 0.0;
  Eigen::MatrixXd slopes(g, m_count);
  for (const auto& lambda : lambdas) {
    Eigen::VectorXd a = grid_mean_ * lambda.w;
    const double base = a.maxCoeff();
    for (int m = 0; m < m_count; ++m) {
      slopes.col(m) = cand.total_sd[m] > 0.0
                          ? ((lambda.w[m] / cand.total_sd[m]) * cand.cov[m]).eval()
                          : Eigen::VectorXd::Zero(g).eval();
    }
    Eigen::MatrixXd shifted = slopes * z.transpose();  // g x fantasy_count
    double mean_max = 0.0;
    for (int i = 0; i < fantasy_count; ++i) {
      mean_max += (a + shifted.col(i)).maxCoeff();
    }
    total += mean_max / fantasy_count - base;
  }
  return total / static_cast<double>(lambdas.size());
}

double mokg_joint_benchmark(const PosteriorState& state, const Eigen::VectorXd& x,
                            const SimplexWeight& lambda,
                            std::span<const Eigen::VectorXd> grid, int fantasy_count,
                            std::uint64_t seed) {
  KgContext ctx(state, std::vector<Eigen::VectorXd>(grid.begin(), grid.end()));
  const SimplexWeight one[] = {lambda};
  return ctx.joint_mean(x, one, fantasy_count, seed);
}

McEstimate residual_uncertainty_mc(const PosteriorState& state,
                                   const SimplexWeight& lambda,
                                   std::span<const Eigen::VectorXd> grid,
                                   int sample_count, std::uint64_t seed) {
  if (sample_count < 1) {
    throw std::invalid_argument("residual_uncertainty_mc: sample_count must be >= 1");
  }
  const int g = static_cast<int>(grid.size());
  const int m_count = state.num_objectives();
  MeanCov mc = state.mean_cov(grid);
  Eigen::VectorXd scal_mean = mc.mean * lambda.w;
  const double base = scal_mean.maxCoeff();

  std::vector<Eigen::MatrixXd> factors(m_count);
  for (int m = 0; m < m_count; ++m) {
    Eigen::MatrixXd c = mc.cov[m];
    double jitter = 1e-10 * c.diagonal().maxCoeff() + 1e-30;
    for (int attempt = 0; attempt < 6; ++attempt) {
      Eigen::MatrixXd cj = c;
      cj.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(cj);
      if (llt.info() == Eigen::Success) {
        factors[m] = llt.matrixL();
        break;
      }
      jitter *= 100.0;
    }
    if (factors[m].size() == 0) throw FactorizationError(m);
  }

  RngStream rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  Eigen::VectorXd xi(g);
  for (int s = 0; s < sample_count; ++s) {
    Eigen::VectorXd scal = scal_mean;
    for (int m = 0; m < m_count; ++m) {
      if (lambda.w[m] == 0.0) {
        for (int i = 0; i < g; ++i) rng.normal();  // keep the draw order fixed
        continue;
      }
      for (int i = 0; i < g; ++i) xi[i] = rng.normal();
      scal.noalias() += lambda.w[m] * (factors[m] * xi);
    }
    const double v = scal.maxCoeff();
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / sample_count;
  double var = std::max(0.0, sum_sq / sample_count - mean * mean);
  McEstimate out;
  out.value = mean - base;
  out.std_error = sample_count > 1 ? std::sqrt(var / sample_count) : 0.0;
  return out;
}

}  // namespace cmokg
