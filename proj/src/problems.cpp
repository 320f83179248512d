#include "cmokg/problems.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cmokg/sobol.hpp"

namespace cmokg {

namespace {

std::uint64_t derive_scramble(std::uint64_t seed) {
  std::uint64_t s = seed * 6364136223846793005ULL + 1442695040888963407ULL;
  return s | 1ULL;  // scramble seed 0 would disable scrambling
}

std::uint64_t derive_value_seed(std::uint64_t seed) {
  return seed * 2862933555777941757ULL + 3037000493ULL;
}

}  // namespace

void SyntheticProblem::build_interpolant() {
  const int n = static_cast<int>(locations_.rows());
  const int m_count = num_objectives();
  alpha_.resize(n, m_count);
  for (int m = 0; m < m_count; ++m) {
    Eigen::MatrixXd k = matern52_matrix(locations_, generator_.length_scale[m],
                                        generator_.output_scale[m]);
    k.diagonal().array() += 1e-6 * generator_.output_scale[m];
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) throw FactorizationError(m);
    alpha_.col(m) =
        llt.solve((values_.col(m).array() - generator_.constant_mean[m]).matrix());
  }
}

double SyntheticProblem::true_value(const Eigen::VectorXd& x, int m) const {
  Eigen::ArrayXd d = (locations_.rowwise() - x.transpose()).rowwise().norm();
  Eigen::ArrayXd r = d / generator_.length_scale[m];
  Eigen::ArrayXd s = 2.2360679774997896964 * r;
  Eigen::VectorXd k =
      (generator_.output_scale[m] * (1.0 + s + (5.0 / 3.0) * r.square()) * (-s).exp())
          .matrix();
  return generator_.constant_mean[m] + k.dot(alpha_.col(m));
}

Eigen::VectorXd SyntheticProblem::true_vector(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(num_objectives());
  for (int m = 0; m < num_objectives(); ++m) out[m] = true_value(x, m);
  return out;
}

SyntheticProblem generate_problem(int family, std::uint64_t seed) {
  if (family != 1 && family != 2) {
    throw std::invalid_argument("generate_problem: family must be 1 or 2");
  }
  SyntheticProblem p;
  p.family_ = family;
  p.seed_ = seed;
  if (family == 1) {
    p.generator_.length_scale = Eigen::Vector2d(0.2, 1.8);
    p.generator_.output_scale = Eigen::Vector2d(1.0, 50.0);
    p.generator_.constant_mean = Eigen::Vector2d(0.0, 0.0);
    p.noise_sd_ = Eigen::Vector2d(0.0, 0.0);
  } else {
    p.generator_.length_scale = Eigen::Vector2d(0.4, 0.4);
    p.generator_.output_scale = Eigen::Vector2d(1.0, 1.0);
    p.generator_.constant_mean = Eigen::Vector2d(0.0, 0.0);
    p.noise_sd_ = Eigen::Vector2d(1.0, 0.0);
  }
  p.costs_ = CostVector::of(Eigen::Vector2d(1.0, 10.0));

  const int n = SyntheticProblem::kConditioningPoints;
  SobolStream stream(2, derive_scramble(seed));
  p.locations_.resize(n, 2);
  for (int i = 0; i < n; ++i) p.locations_.row(i) = stream.next().transpose();

  RngStream rng(derive_value_seed(seed));
  p.values_.resize(n, 2);
  for (int m = 0; m < 2; ++m) {
    Eigen::MatrixXd k = matern52_matrix(p.locations_, p.generator_.length_scale[m],
                                        p.generator_.output_scale[m]);
    k.diagonal().array() += 1e-6 * p.generator_.output_scale[m];
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) throw FactorizationError(m);
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi[i] = rng.normal();
    p.values_.col(m) = Eigen::VectorXd::Constant(n, p.generator_.constant_mean[m]) +
                       Eigen::MatrixXd(llt.matrixL()) * xi;
  }
  p.build_interpolant();
  return p;
}

SyntheticProblem make_problem(int family, std::uint64_t seed, KernelSpec generator,
                              Eigen::VectorXd noise_sd, CostVector costs,
                              Eigen::MatrixXd locations, Eigen::MatrixXd values) {
  generator.validate();
  SyntheticProblem p;
  p.family_ = family;
  p.seed_ = seed;
  p.generator_ = std::move(generator);
  p.noise_sd_ = std::move(noise_sd);
  p.costs_ = std::move(costs);
  p.locations_ = std::move(locations);
  p.values_ = std::move(values);
  if (p.locations_.rows() != p.values_.rows() || p.locations_.cols() != 2) {
    throw std::invalid_argument("make_problem: inconsistent location/value shapes");
  }
  p.build_interpolant();
  return p;
}

double evaluate(const SyntheticProblem& problem, const Eigen::VectorXd& x, int m,
                RngStream& noise_rng) {
  if (x.size() != problem.input_dim()) {
    throw std::invalid_argument("evaluate: wrong input dimension");
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
      throw std::invalid_argument("evaluate: location outside [0,1]^2");
    }
  }
  if (m < 0 || m >= problem.num_objectives()) {
    throw std::invalid_argument("evaluate: objective index out of range");
  }
  double y = problem.true_value(x, m);
  if (problem.noise_sd()[m] > 0.0) y += problem.noise_sd()[m] * noise_rng.normal();
  return y;
}

std::string problem_to_string(const SyntheticProblem& problem) {
  nlohmann::ordered_json j;
  j["format"] = "cmokg-problem-v1";
  j["family"] = problem.family();
  j["seed"] = problem.seed();
  j["scramble"] = "digital-shift";
  j["shared_locations"] = true;
  j["length_scale"] = std::vector<double>(problem.generator().length_scale.begin(),
                                          problem.generator().length_scale.end());
  j["output_scale"] = std::vector<double>(problem.generator().output_scale.begin(),
                                          problem.generator().output_scale.end());
  j["constant_mean"] = std::vector<double>(problem.generator().constant_mean.begin(),
                                           problem.generator().constant_mean.end());
  j["noise_sd"] =
      std::vector<double>(problem.noise_sd().begin(), problem.noise_sd().end());
  j["costs"] = std::vector<double>(problem.costs().c.begin(), problem.costs().c.end());
  auto matrix_rows = [](const Eigen::MatrixXd& mtx) {
    std::vector<std::vector<double>> rows;
    rows.reserve(mtx.rows());
    for (Eigen::Index i = 0; i < mtx.rows(); ++i) {
      rows.emplace_back(mtx.row(i).begin(), mtx.row(i).end());
    }
    return rows;
  };
  j["locations"] = matrix_rows(problem.locations());
  j["values"] = matrix_rows(problem.values());
  return j.dump(2) + "\n";
}

SyntheticProblem problem_from_string(const std::string& text) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
  if (!j.contains("format") || j["format"] != "cmokg-problem-v1") {
    throw std::runtime_error("problem file: unsupported format field");
  }
  auto vec = [&](const char* key) {
    std::vector<double> v = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()).eval();
  };
  auto mat = [&](const char* key) {
    auto rows = j.at(key).get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd mtx(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) {
      mtx.row(i) = Eigen::Map<const Eigen::VectorXd>(rows[i].data(), rows[i].size());
    }
    return mtx;
  };
  KernelSpec gen;
  gen.length_scale = vec("length_scale");
  gen.output_scale = vec("output_scale");
  gen.constant_mean = vec("constant_mean");
  return make_problem(j.at("family").get<int>(), j.at("seed").get<std::uint64_t>(),
                      std::move(gen), vec("noise_sd"), CostVector::of(vec("costs")),
                      mat("locations"), mat("values"));
}

void save_problem(const SyntheticProblem& problem, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_problem: cannot open " + path.string());
  out << problem_to_string(problem);
  if (!out) throw std::runtime_error("save_problem: write failed for " + path.string());
}

SyntheticProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_problem: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return problem_from_string(text);
}

}  // namespace cmokg
