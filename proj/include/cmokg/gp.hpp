#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

namespace cmokg {

/// Hyperparameters of the independent multi-output Matern-5/2 model,
/// one entry per objective. Scale parameters live in the units of the data
/// the model is fitted on (standardized units inside the optimization loop).
struct KernelSpec {
  Eigen::VectorXd length_scale;   // isotropic, input-space units, > 0
  Eigen::VectorXd output_scale;   // variance units, > 0
  Eigen::VectorXd constant_mean;  // objective units

  int num_objectives() const { return static_cast<int>(length_scale.size()); }
  void validate() const;
};

struct NoiseModel {
  Eigen::VectorXd noise_variance;  // sigma_m^2 per objective, >= 0
  std::vector<bool> learnable;     // non-learnable entries never change in fitting

  void validate(int num_objectives) const;
};

/// One sample of a single objective at one location.
struct ObservationRecord {
  Eigen::VectorXd location;  // inside [0,1]^D
  int objective = 0;         // 0-based
  double value = 0.0;
  double cost = 1.0;
};

struct StandardizeTransform {
  double shift = 0.0;
  double scale = 1.0;

  double to_standard(double y) const { return (y - shift) / scale; }
  double to_raw(double s) const { return shift + scale * s; }
};

struct StandardizeResult {
  std::vector<double> values;
  StandardizeTransform transform;
};

/// Shift to zero mean and scale to unit variance (population-sd convention).
/// Singleton or zero-variance samples clamp the scale to 1.
StandardizeResult standardize(std::span<const double> values);

double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                double length_scale, double output_scale);
double matern52_from_distance(double distance, double length_scale,
                              double output_scale);

class FactorizationError : public std::runtime_error {
public:
  explicit FactorizationError(int objective);
  int objective;
};

struct MeanCov {
  Eigen::MatrixXd mean;              // |xs| x M
  std::vector<Eigen::MatrixXd> cov;  // per objective; cross-objective cov is zero
};

/// Coefficients of the posterior-mean update as an affine function of a
/// standard-normal reparameterization of one hypothesized observation.
struct FantasyAffine {
  Eigen::VectorXd intercept;  // current scalarized posterior mean per grid point
  Eigen::VectorXd slope;      // zero when the candidate carries no information
};

/// Immutable multi-output GP posterior. Conditioning returns a new state;
/// all queries are pure and safe to call concurrently.
class PosteriorState {
public:
  PosteriorState(KernelSpec kernel, NoiseModel noise, int input_dim,
                 std::vector<StandardizeTransform> transforms = {});

  PosteriorState conditioned(std::span<const ObservationRecord> more) const;

  int input_dim() const { return input_dim_; }
  int num_objectives() const { return kernel_.num_objectives(); }
  const KernelSpec& kernel() const { return kernel_; }
  const NoiseModel& noise() const { return noise_; }
  const std::vector<ObservationRecord>& observations() const { return observations_; }
  const StandardizeTransform& transform(int m) const { return transforms_[m]; }

  /// Diagonal stabilizer added to each objective's factorized system.
  double jitter(int m) const { return 1e-6 * kernel_.output_scale[m]; }

  /// Posterior mean and per-objective covariance blocks, in raw units.
  MeanCov mean_cov(std::span<const Eigen::VectorXd> xs) const;

  Eigen::VectorXd mean_vector(const Eigen::VectorXd& x) const;  // length M
  double mean_one(const Eigen::VectorXd& x, int m) const;
  double variance_one(const Eigen::VectorXd& x, int m) const;

  FantasyAffine fantasy_affine(const Eigen::VectorXd& x, int m,
                               const Eigen::VectorXd& lambda,
                               std::span<const Eigen::VectorXd> grid) const;

  // --- internals shared with the acquisition machinery ---

  struct ObjectiveData {
    Eigen::MatrixXd locations;  // n x D
    Eigen::VectorXd centered;   // standardized values minus constant mean
    Eigen::MatrixXd chol;       // lower factor of K + Sigma + jitter (standardized)
    Eigen::VectorXd alpha;      // (K + Sigma + jitter)^{-1} centered
  };
  const ObjectiveData& objective_data(int m) const { return per_objective_[m]; }

  /// k(X_m, x) in standardized units, output scale included.
  Eigen::VectorXd kernel_vector(int m, const Eigen::VectorXd& x) const;
  /// k(X_m, C) for a batch of columns.
  Eigen::MatrixXd kernel_matrix_against(int m, const Eigen::MatrixXd& points) const;

private:
  void check_inside_bounds(const ObservationRecord& rec) const;
  void factorize();

  KernelSpec kernel_;
  NoiseModel noise_;
  int input_dim_;
  std::vector<StandardizeTransform> transforms_;
  std::vector<ObservationRecord> observations_;
  std::vector<ObjectiveData> per_objective_;
};

/// Free-function forms of the core operations.
PosteriorState condition(const PosteriorState& prior,
                         std::span<const ObservationRecord> observations);
MeanCov posterior_mean_cov(const PosteriorState& state,
                           std::span<const Eigen::VectorXd> xs);

/// Pairwise Matern-5/2 matrix of a point set (standardized units).
Eigen::MatrixXd matern52_matrix(const Eigen::MatrixXd& points, double length_scale,
                                double output_scale);

}  // namespace cmokg
