#include "cmokg/gp.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace cmokg {

namespace {
constexpr double kSqrt5 = 2.2360679774997896964;
}

void KernelSpec::validate() const {
  const auto m = length_scale.size();
  if (m == 0 || output_scale.size() != m || constant_mean.size() != m) {
    throw std::invalid_argument("KernelSpec: per-objective fields must have equal, nonzero size");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(length_scale[i] > 0.0) || !(output_scale[i] > 0.0)) {
      throw std::invalid_argument("KernelSpec: length_scale and output_scale must be positive");
    }
  }
}

void NoiseModel::validate(int num_objectives) const {
  if (noise_variance.size() != num_objectives ||
      learnable.size() != static_cast<size_t>(num_objectives)) {
    throw std::invalid_argument("NoiseModel: fields must match the objective count");
  }
  for (Eigen::Index i = 0; i < noise_variance.size(); ++i) {
    if (!(noise_variance[i] >= 0.0)) {
      throw std::invalid_argument("NoiseModel: noise_variance must be non-negative");
    }
  }
}

StandardizeResult standardize(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("standardize: at least one value required");
  }
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  double scale = var > 0.0 ? std::sqrt(var) : 1.0;

  StandardizeResult out;
  out.transform = {mean, scale};
  out.values.reserve(values.size());
  for (double v : values) out.values.push_back(out.transform.to_standard(v));
  return out;
}

double matern52_from_distance(double distance, double length_scale,
                              double output_scale) {
  if (!(length_scale > 0.0) || !(output_scale > 0.0)) {
    throw std::invalid_argument("matern52: length_scale and output_scale must be positive");
  }
  const double r = distance / length_scale;
  const double s = kSqrt5 * r;
  return output_scale * (1.0 + s + (5.0 / 3.0) * r * r) * std::exp(-s);
}

double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                double length_scale, double output_scale) {
  return matern52_from_distance((x - x2).norm(), length_scale, output_scale);
}

Eigen::MatrixXd matern52_matrix(const Eigen::MatrixXd& points, double length_scale,
                                double output_scale) {
  const Eigen::Index n = points.rows();
  Eigen::VectorXd sq = points.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                       2.0 * points * points.transpose();
  Eigen::ArrayXXd r = d2.array().max(0.0).sqrt() / length_scale;
  Eigen::ArrayXXd s = kSqrt5 * r;
  return (output_scale * (1.0 + s + (5.0 / 3.0) * r.square()) * (-s).exp()).matrix();
}

FactorizationError::FactorizationError(int m)
    : std::runtime_error("GP factorization failed for objective " + std::to_string(m + 1)),
      objective(m) {}

PosteriorState::PosteriorState(KernelSpec kernel, NoiseModel noise, int input_dim,
                               std::vector<StandardizeTransform> transforms)
    : kernel_(std::move(kernel)), noise_(std::move(noise)), input_dim_(input_dim),
      transforms_(std::move(transforms)) {
  kernel_.validate();
  noise_.validate(kernel_.num_objectives());
  if (input_dim_ <= 0) throw std::invalid_argument("PosteriorState: input_dim must be positive");
  if (transforms_.empty()) {
    transforms_.assign(kernel_.num_objectives(), StandardizeTransform{});
  }
  if (transforms_.size() != static_cast<size_t>(kernel_.num_objectives())) {
    throw std::invalid_argument("PosteriorState: one transform per objective required");
  }
  factorize();
}

void PosteriorState::check_inside_bounds(const ObservationRecord& rec) const {
  if (rec.location.size() != input_dim_) {
    throw std::invalid_argument("observation location has wrong dimension");
  }
  for (Eigen::Index i = 0; i < rec.location.size(); ++i) {
    if (!(rec.location[i] >= 0.0 && rec.location[i] <= 1.0)) {
      throw std::invalid_argument("observation location outside [0,1]^D");
    }
  }
  if (rec.objective < 0 || rec.objective >= num_objectives()) {
    throw std::invalid_argument("observation objective index out of range");
  }
}

PosteriorState PosteriorState::conditioned(std::span<const ObservationRecord> more) const {
  PosteriorState next = *this;
  for (const auto& rec : more) {
    check_inside_bounds(rec);
    next.observations_.push_back(rec);
  }
  next.factorize();
  return next;
}

void PosteriorState::factorize() {
  const int m_count = num_objectives();
  per_objective_.assign(m_count, {});
  for (int m = 0; m < m_count; ++m) {
    std::vector<int> idx;
    for (size_t i = 0; i < observations_.size(); ++i) {
      if (observations_[i].objective == m) idx.push_back(static_cast<int>(i));
    }
    auto& data = per_objective_[m];
    const int n = static_cast<int>(idx.size());
    data.locations.resize(n, input_dim_);
    data.centered.resize(n);
    for (int i = 0; i < n; ++i) {
      const auto& rec = observations_[idx[i]];
      data.locations.row(i) = rec.location.transpose();
      data.centered[i] = transforms_[m].to_standard(rec.value) - kernel_.constant_mean[m];
    }
    if (n == 0) continue;

    Eigen::MatrixXd k = matern52_matrix(data.locations, kernel_.length_scale[m],
                                        kernel_.output_scale[m]);
    k.diagonal().array() += noise_.noise_variance[m] + jitter(m);
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) throw FactorizationError(m);
    data.chol = llt.matrixL();
    data.alpha = llt.solve(data.centered);
  }
}

Eigen::VectorXd PosteriorState::kernel_vector(int m, const Eigen::VectorXd& x) const {
  const auto& data = per_objective_[m];
  const Eigen::Index n = data.locations.rows();
  Eigen::ArrayXd d = (data.locations.rowwise() - x.transpose()).rowwise().norm();
  Eigen::ArrayXd r = d / kernel_.length_scale[m];
  Eigen::ArrayXd s = kSqrt5 * r;
  return (kernel_.output_scale[m] * (1.0 + s + (5.0 / 3.0) * r.square()) * (-s).exp())
      .matrix()
      .head(n);
}

Eigen::MatrixXd PosteriorState::kernel_matrix_against(int m,
                                                      const Eigen::MatrixXd& points) const {
  const auto& data = per_objective_[m];
  const Eigen::Index n = data.locations.rows();
  const Eigen::Index c = points.rows();
  Eigen::MatrixXd d2 = data.locations.rowwise().squaredNorm().replicate(1, c) +
                       points.rowwise().squaredNorm().transpose().replicate(n, 1) -
                       2.0 * data.locations * points.transpose();
  Eigen::ArrayXXd r = d2.array().max(0.0).sqrt() / kernel_.length_scale[m];
  Eigen::ArrayXXd s = kSqrt5 * r;
  return (kernel_.output_scale[m] * (1.0 + s + (5.0 / 3.0) * r.square()) * (-s).exp())
      .matrix();
}

MeanCov PosteriorState::mean_cov(std::span<const Eigen::VectorXd> xs) const {
  const int m_count = num_objectives();
  const int q = static_cast<int>(xs.size());
  MeanCov out;
  out.mean.resize(q, m_count);
  out.cov.assign(m_count, Eigen::MatrixXd());
  Eigen::MatrixXd pts(q, input_dim_);
  for (int i = 0; i < q; ++i) {
    if (xs[i].size() != input_dim_) {
      throw std::invalid_argument("query point has wrong dimension");
    }
    pts.row(i) = xs[i].transpose();
  }
  for (int m = 0; m < m_count; ++m) {
    Eigen::MatrixXd k_qq = matern52_matrix(pts, kernel_.length_scale[m],
                                           kernel_.output_scale[m]);
    const auto& data = per_objective_[m];
    Eigen::VectorXd mean_std = Eigen::VectorXd::Constant(q, kernel_.constant_mean[m]);
    Eigen::MatrixXd cov_std = k_qq;
    if (data.locations.rows() > 0) {
      Eigen::MatrixXd k_xq = kernel_matrix_against(m, pts);  // n x q
      mean_std += k_xq.transpose() * data.alpha;
      Eigen::MatrixXd v =
          data.chol.triangularView<Eigen::Lower>().solve(k_xq);  // n x q
      cov_std -= v.transpose() * v;
    }
    const auto& t = transforms_[m];
    out.mean.col(m) = (mean_std.array() * t.scale + t.shift).matrix();
    out.cov[m] = cov_std * (t.scale * t.scale);
    out.cov[m] = 0.5 * (out.cov[m] + out.cov[m].transpose());  // enforce symmetry
  }
  return out;
}

Eigen::VectorXd PosteriorState::mean_vector(const Eigen::VectorXd& x) const {
  const int m_count = num_objectives();
  Eigen::VectorXd out(m_count);
  for (int m = 0; m < m_count; ++m) out[m] = mean_one(x, m);
  return out;
}

double PosteriorState::mean_one(const Eigen::VectorXd& x, int m) const {
  const auto& data = per_objective_[m];
  double mean_std = kernel_.constant_mean[m];
  if (data.locations.rows() > 0) {
    mean_std += kernel_vector(m, x).dot(data.alpha);
  }
  return transforms_[m].to_raw(mean_std);
}

double PosteriorState::variance_one(const Eigen::VectorXd& x, int m) const {
  const auto& data = per_objective_[m];
  double var_std = kernel_.output_scale[m];
  if (data.locations.rows() > 0) {
    Eigen::VectorXd k = kernel_vector(m, x);
    Eigen::VectorXd w = data.chol.triangularView<Eigen::Lower>().solve(k);
    var_std -= w.squaredNorm();
  }
  return var_std * transforms_[m].scale * transforms_[m].scale;
}

FantasyAffine PosteriorState::fantasy_affine(const Eigen::VectorXd& x, int m,
                                             const Eigen::VectorXd& lambda,
                                             std::span<const Eigen::VectorXd> grid) const {
  if (lambda.size() != num_objectives()) {
    throw std::invalid_argument("fantasy_affine: weight dimension mismatch");
  }
  const int g = static_cast<int>(grid.size());
  MeanCov mc = mean_cov(grid);
  FantasyAffine out;
  out.intercept = mc.mean * lambda;
  out.slope = Eigen::VectorXd::Zero(g);

  const auto& data = per_objective_[m];
  const auto& t = transforms_[m];
  // The hypothesized observation carries the same effective noise the
  // factorization uses, so the affine update matches re-conditioning exactly.
  const double noise_raw = (noise_.noise_variance[m] + jitter(m)) * t.scale * t.scale;
  const double total_var = variance_one(x, m) + noise_raw;
  if (!(total_var > 0.0) || lambda[m] == 0.0) return out;

  // Covariance of objective m between each grid point and the candidate.
  Eigen::VectorXd cov_gx(g);
  Eigen::VectorXd w;
  if (data.locations.rows() > 0) {
    w = data.chol.triangularView<Eigen::Lower>().solve(kernel_vector(m, x));
  }
  for (int i = 0; i < g; ++i) {
    double c = matern52(grid[i], x, kernel_.length_scale[m], kernel_.output_scale[m]);
    if (data.locations.rows() > 0) {
      Eigen::VectorXd wg =
          data.chol.triangularView<Eigen::Lower>().solve(kernel_vector(m, grid[i]));
      c -= wg.dot(w);
    }
    cov_gx[i] = c * t.scale * t.scale;
  }
  out.slope = (lambda[m] / std::sqrt(total_var)) * cov_gx;
  return out;
}

PosteriorState condition(const PosteriorState& prior,
                         std::span<const ObservationRecord> observations) {
  return prior.conditioned(observations);
}

MeanCov posterior_mean_cov(const PosteriorState& state,
                           std::span<const Eigen::VectorXd> xs) {
  return state.mean_cov(xs);
}

}  // namespace cmokg
