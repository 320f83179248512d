#include "cmokg/hyperfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmokg/optimize.hpp"
#include "cmokg/rng.hpp"

namespace cmokg {

namespace {
constexpr double kSqrt5 = 2.2360679774997896964;
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

void GammaPrior::validate() const {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("GammaPrior: shape and rate must be positive");
  }
}

void PriorSet::validate() const {
  if (per_objective.empty()) throw std::invalid_argument("PriorSet: empty");
  for (const auto& p : per_objective) {
    p.length_scale.validate();
    p.output_scale.validate();
    if (p.noise.has_value()) {
      p.noise->validate();
    } else if (p.fixed_noise != 1e-4) {
      throw std::invalid_argument("PriorSet: fixed noise entries must be exactly 1e-4");
    }
  }
}

double gamma_log_pdf(double z, const GammaPrior& prior) {
  prior.validate();
  if (!(z > 0.0)) throw std::domain_error("gamma_log_pdf: z must be positive");
  return prior.shape * std::log(prior.rate) - std::lgamma(prior.shape) +
         (prior.shape - 1.0) * std::log(z) - prior.rate * z;
}

namespace {

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::VectorXd sq = points.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                       2.0 * points * points.transpose();
  return d2.array().max(0.0).sqrt().matrix();
}

struct EvidenceEval {
  double value;         // MAP objective
  double profiled_mean; // mean actually used
};

// Shared core: evidence + priors, optional gradient w.r.t. log parameters.
// `dist` is the precomputed pairwise distance matrix of the locations.
EvidenceEval eval_map(const Eigen::MatrixXd& dist, const Eigen::VectorXd& values,
                      const ObjectivePrior& prior, double ls, double os, double nv,
                      bool learn_noise, double mean, Eigen::Vector3d* grad) {
  const Eigen::Index n = values.size();
  const double jitter = 1e-6 * os;

  Eigen::ArrayXXd r = dist.array() / ls;
  Eigen::ArrayXXd es = (-kSqrt5 * r).exp();
  Eigen::MatrixXd a_mat = (os * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r.square()) * es).matrix();
  a_mat.diagonal().array() += nv + jitter;

  Eigen::LLT<Eigen::MatrixXd> llt(a_mat);
  if (llt.info() != Eigen::Success) throw FactorizationError(-1);

  double used_mean = mean;
  if (std::isnan(mean)) {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd ai_ones = llt.solve(ones);
    used_mean = ai_ones.dot(values) / ai_ones.dot(ones);
  }
  Eigen::VectorXd centered = values.array() - used_mean;
  Eigen::VectorXd alpha = llt.solve(centered);

  double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  double log_lik = -0.5 * (centered.dot(alpha) + logdet + n * kLog2Pi);

  double value = log_lik + gamma_log_pdf(ls, prior.length_scale) +
                 gamma_log_pdf(os, prior.output_scale);
  if (learn_noise) value += gamma_log_pdf(nv, *prior.noise);

  if (grad != nullptr) {
    Eigen::MatrixXd a_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    double tr_ainv = a_inv.trace();
    double alpha_sq = alpha.squaredNorm();

    // d/dlog(ls) of the kernel matrix.
    Eigen::MatrixXd m_ls = (os * (5.0 / 3.0) * r.square() * (1.0 + kSqrt5 * r) * es).matrix();
    double g_ls = 0.5 * (alpha.dot(m_ls * alpha) - (a_inv.array() * m_ls.array()).sum());
    g_ls += (prior.length_scale.shape - 1.0) - prior.length_scale.rate * ls;

    // dA/dlog(os) = A - nv*I, so the quadratic and trace terms collapse.
    double g_os = 0.5 * ((centered.dot(alpha) - nv * alpha_sq) -
                         (static_cast<double>(n) - nv * tr_ainv));
    g_os += (prior.output_scale.shape - 1.0) - prior.output_scale.rate * os;

    double g_nv = 0.0;
    if (learn_noise) {
      g_nv = 0.5 * (nv * alpha_sq - nv * tr_ainv);
      g_nv += (prior.noise->shape - 1.0) - prior.noise->rate * nv;
    }
    *grad = Eigen::Vector3d(g_ls, g_os, g_nv);
  }
  return {value, used_mean};
}

}  // namespace

double log_marginal_likelihood(const Eigen::MatrixXd& locations,
                               const Eigen::VectorXd& values, double length_scale,
                               double output_scale, double noise_variance,
                               double mean) {
  if (values.size() == 0) {
    throw std::invalid_argument("log_marginal_likelihood: at least one observation required");
  }
  const Eigen::Index n = values.size();
  Eigen::MatrixXd k = matern52_matrix(locations, length_scale, output_scale);
  k.diagonal().array() += noise_variance + 1e-6 * output_scale;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw FactorizationError(-1);
  Eigen::VectorXd centered = values.array() - mean;
  double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (centered.dot(llt.solve(centered)) + logdet + n * kLog2Pi);
}

double map_objective(const Eigen::MatrixXd& locations, const Eigen::VectorXd& std_values,
                     const ObjectivePrior& prior, double log_ls, double log_os,
                     double log_nv, bool learn_noise, double mean,
                     Eigen::Vector3d* grad) {
  Eigen::MatrixXd dist = pairwise_distances(locations);
  return eval_map(dist, std_values, prior, std::exp(log_ls), std::exp(log_os),
                  std::exp(log_nv), learn_noise, mean, grad)
      .value;
}

FitResult fit_map(std::span<const ObservationRecord> data, int num_objectives,
                  const PriorSet& priors, const FitConfig& config,
                  const Eigen::VectorXd* frozen_mean_raw,
                  const KernelSpec* warm_kernel, const NoiseModel* warm_noise) {
  priors.validate();
  if (static_cast<int>(priors.per_objective.size()) != num_objectives) {
    throw std::invalid_argument("fit_map: priors must cover every objective");
  }

  FitResult out;
  out.kernel.length_scale.resize(num_objectives);
  out.kernel.output_scale.resize(num_objectives);
  out.kernel.constant_mean.resize(num_objectives);
  out.noise.noise_variance.resize(num_objectives);
  out.noise.learnable.resize(num_objectives);
  out.transforms.resize(num_objectives);
  out.fitted_mean_raw = Eigen::VectorXd::Zero(num_objectives);
  out.log_posterior.resize(num_objectives);

  for (int m = 0; m < num_objectives; ++m) {
    const auto& prior = priors.per_objective[m];
    const bool learn_noise = prior.noise.has_value();

    std::vector<double> raw;
    std::vector<Eigen::VectorXd> locs;
    for (const auto& rec : data) {
      if (rec.objective == m) {
        raw.push_back(rec.value);
        locs.push_back(rec.location);
      }
    }
    if (raw.empty()) {
      throw std::invalid_argument("fit_map: objective " + std::to_string(m + 1) +
                                  " has no observations");
    }
    auto std_res = standardize(raw);
    out.transforms[m] = std_res.transform;
    Eigen::VectorXd values =
        Eigen::Map<const Eigen::VectorXd>(std_res.values.data(), std_res.values.size());
    Eigen::MatrixXd points(locs.size(), locs[0].size());
    for (size_t i = 0; i < locs.size(); ++i) points.row(i) = locs[i].transpose();
    Eigen::MatrixXd dist = pairwise_distances(points);

    const double mean_fixed =
        frozen_mean_raw != nullptr ? out.transforms[m].to_standard((*frozen_mean_raw)[m])
                                   : std::numeric_limits<double>::quiet_NaN();

    const int dims = learn_noise ? 3 : 2;
    Eigen::VectorXd lo(dims), hi(dims);
    lo[0] = config.log_ls_lo;
    hi[0] = config.log_ls_hi;
    lo[1] = config.log_os_lo;
    hi[1] = config.log_os_hi;
    if (learn_noise) {
      lo[2] = config.log_nv_lo;
      hi[2] = config.log_nv_hi;
    }
    const double fixed_log_nv = std::log(prior.fixed_noise);

    auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
      double log_nv = learn_noise ? theta[2] : fixed_log_nv;
      Eigen::Vector3d g3;
      EvidenceEval ev =
          eval_map(dist, values, prior, std::exp(theta[0]), std::exp(theta[1]),
                   std::exp(log_nv), learn_noise, mean_fixed, grad ? &g3 : nullptr);
      if (grad != nullptr) {
        grad->resize(dims);
        (*grad)[0] = -g3[0];
        (*grad)[1] = -g3[1];
        if (learn_noise) (*grad)[2] = -g3[2];
      }
      return -ev.value;
    };

    // Initializations: warm start (or prior means) plus prior samples.
    RngStream rng(config.seed * 1000003u + static_cast<std::uint64_t>(m));
    std::vector<Eigen::VectorXd> inits;
    {
      Eigen::VectorXd w(dims);
      w[0] = std::log(warm_kernel != nullptr ? warm_kernel->length_scale[m]
                                             : prior.length_scale.shape / prior.length_scale.rate);
      w[1] = std::log(warm_kernel != nullptr ? warm_kernel->output_scale[m]
                                             : prior.output_scale.shape / prior.output_scale.rate);
      if (learn_noise) {
        w[2] = std::log(warm_noise != nullptr ? std::max(warm_noise->noise_variance[m], 1e-8)
                                              : prior.noise->shape / prior.noise->rate);
      }
      inits.push_back(w.cwiseMax(lo).cwiseMin(hi));
    }
    for (int k = 1; k < config.restarts; ++k) {
      Eigen::VectorXd w(dims);
      w[0] = std::log(rng.gamma(prior.length_scale.shape, prior.length_scale.rate));
      w[1] = std::log(rng.gamma(prior.output_scale.shape, prior.output_scale.rate));
      if (learn_noise) w[2] = std::log(rng.gamma(prior.noise->shape, prior.noise->rate));
      inits.push_back(w.cwiseMax(lo).cwiseMin(hi));
    }

    double best_init_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_init = inits[0];
    for (const auto& x0 : inits) {
      double v = objective(x0, nullptr);
      if (v < best_init_value) {
        best_init_value = v;
        best_init = x0;
      }
    }

    MinimizeOptions burst;
    burst.max_iterations = config.burst_iterations;
    std::vector<MinimizeResult> stage1;
    stage1.reserve(inits.size());
    for (const auto& x0 : inits) stage1.push_back(bounded_minimize(objective, x0, lo, hi, burst));

    std::vector<int> order(stage1.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return stage1[a].value < stage1[b].value; });

    MinimizeOptions full;
    full.max_iterations = config.max_iterations;
    MinimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    const int continue_count = std::min<int>(config.survivors, static_cast<int>(order.size()));
    for (size_t rank = 0; rank < order.size(); ++rank) {
      const MinimizeResult& s1 = stage1[order[rank]];
      MinimizeResult cand =
          rank < static_cast<size_t>(continue_count)
              ? bounded_minimize(objective, s1.x, lo, hi, full)
              : s1;
      if (cand.value < best.value) best = cand;
    }

    if (!(best.value <= best_init_value)) {
      best.x = best_init;
      best.value = best_init_value;
      out.warning = true;
    }

    const double ls = std::exp(best.x[0]);
    const double os = std::exp(best.x[1]);
    const double nv = learn_noise ? std::exp(best.x[2]) : prior.fixed_noise;
    EvidenceEval final_eval = eval_map(dist, values, prior, ls, os, nv, learn_noise,
                                       mean_fixed, nullptr);

    out.kernel.length_scale[m] = ls;
    out.kernel.output_scale[m] = os;
    out.kernel.constant_mean[m] = final_eval.profiled_mean;
    out.noise.noise_variance[m] = nv;
    out.noise.learnable[m] = learn_noise;
    out.fitted_mean_raw[m] = out.transforms[m].to_raw(final_eval.profiled_mean);
    out.log_posterior[m] = final_eval.value;
  }
  return out;
}

}  // namespace cmokg
