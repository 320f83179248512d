#include "cmokg/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cmokg/rng.hpp"

namespace cmokg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// a dominates b: at least as good everywhere, strictly better somewhere.
bool dominates(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  bool strict = false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strict = true;
  }
  return strict;
}

}  // namespace

std::vector<int> non_dominated_filter_2d(std::span<const Eigen::VectorXd> values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (values[a][0] != values[b][0]) return values[a][0] > values[b][0];
    return values[a][1] > values[b][1];
  });
  std::vector<int> keep;
  double best_f2_strict = -kInf;  // best second objective among strictly larger f1
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && values[order[j + 1]][0] == values[order[i]][0]) ++j;
    // Within an equal-f1 group only the max-f2 entries survive (duplicates kept).
    double group_max_f2 = -kInf;
    for (int k = i; k <= j; ++k) group_max_f2 = std::max(group_max_f2, values[order[k]][1]);
    for (int k = i; k <= j; ++k) {
      const double f2 = values[order[k]][1];
      if (f2 == group_max_f2 && f2 > best_f2_strict) keep.push_back(order[k]);
    }
    best_f2_strict = std::max(best_f2_strict, group_max_f2);
    i = j + 1;
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

namespace {

struct Individual {
  Eigen::VectorXd x;
  Eigen::VectorXd f;
  int rank = 0;
  double crowding = 0.0;
};

// Deb's fast non-dominated sort; returns fronts of indices.
std::vector<std::vector<int>> fast_non_dominated_sort(const std::vector<Individual>& pop) {
  const int n = static_cast<int>(pop.size());
  std::vector<std::vector<int>> dominated_by(n);
  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<int>> fronts(1);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(pop[p].f, pop[q].f)) {
        dominated_by[p].push_back(q);
      } else if (dominates(pop[q].f, pop[p].f)) {
        ++domination_count[p];
      }
    }
    if (domination_count[p] == 0) fronts[0].push_back(p);
  }
  int i = 0;
  while (!fronts[i].empty()) {
    std::vector<int> next;
    for (int p : fronts[i]) {
      for (int q : dominated_by[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    ++i;
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_of(const std::vector<Individual>& pop,
                                const std::vector<int>& front) {
  std::vector<Eigen::VectorXd> vals;
  vals.reserve(front.size());
  for (int idx : front) vals.push_back(pop[idx].f);
  return crowding_distance(vals);
}

}  // namespace

std::vector<int> non_dominated_filter(std::span<const Eigen::VectorXd> values) {
  std::vector<int> keep;
  const int n = static_cast<int>(values.size());
  for (int i = 0; i < n; ++i) {
    bool dominated = false;
    for (int j = 0; j < n && !dominated; ++j) {
      if (j != i && dominates(values[j], values[i])) dominated = true;
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

std::vector<double> crowding_distance(std::span<const Eigen::VectorXd> front_values) {
  const int n = static_cast<int>(front_values.size());
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  const int m_count = static_cast<int>(front_values[0].size());
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), kInf);
    return dist;
  }
  std::vector<int> order(n);
  for (int m = 0; m < m_count; ++m) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return front_values[a][m] < front_values[b][m];
    });
    dist[order[0]] = kInf;
    dist[order[n - 1]] = kInf;
    const double range = front_values[order[n - 1]][m] - front_values[order[0]][m];
    if (range <= 0.0) continue;
    for (int k = 1; k < n - 1; ++k) {
      if (dist[order[k]] == kInf) continue;
      dist[order[k]] +=
          (front_values[order[k + 1]][m] - front_values[order[k - 1]][m]) / range;
    }
  }
  return dist;
}

ParetoArchive nsga2_maximize(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                             int input_dim, const Nsga2Config& config, int target_points) {
  if (config.population < 4 || config.population % 2 != 0) {
    throw std::invalid_argument("nsga2_maximize: population must be even and >= 4");
  }
  if (target_points < 1) throw std::invalid_argument("nsga2_maximize: target_points >= 1");
  const int pop_size = config.population;
  const double mut_prob =
      config.mutation_prob < 0.0 ? 1.0 / input_dim : config.mutation_prob;

  RngStream rng(config.seed);

  auto evaluate = [&](Individual& ind) { ind.f = f(ind.x); };

  std::vector<Individual> pop(pop_size);
  for (auto& ind : pop) {
    ind.x.resize(input_dim);
    for (int d = 0; d < input_dim; ++d) ind.x[d] = rng.uniform();
    evaluate(ind);
  }

  std::vector<Eigen::VectorXd> archive_points, archive_values;
  auto merge_into_archive = [&](const std::vector<Individual>& candidates) {
    for (const auto& ind : candidates) {
      archive_points.push_back(ind.x);
      archive_values.push_back(ind.f);
    }
    std::vector<int> keep = archive_values.front().size() == 2
                                ? non_dominated_filter_2d(archive_values)
                                : non_dominated_filter(archive_values);
    std::vector<Eigen::VectorXd> np, nv;
    np.reserve(keep.size());
    nv.reserve(keep.size());
    for (int idx : keep) {
      np.push_back(std::move(archive_points[idx]));
      nv.push_back(std::move(archive_values[idx]));
    }
    archive_points = std::move(np);
    archive_values = std::move(nv);
    if (static_cast<int>(archive_points.size()) > target_points) {
      std::vector<double> crowd = crowding_distance(archive_values);
      std::vector<int> order(archive_points.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return crowd[a] > crowd[b]; });
      order.resize(target_points);
      std::sort(order.begin(), order.end());
      std::vector<Eigen::VectorXd> tp, tv;
      for (int idx : order) {
        tp.push_back(std::move(archive_points[idx]));
        tv.push_back(std::move(archive_values[idx]));
      }
      archive_points = std::move(tp);
      archive_values = std::move(tv);
    }
  };

  auto assign_rank_crowding = [&](std::vector<Individual>& population) {
    auto fronts = fast_non_dominated_sort(population);
    for (size_t r = 0; r < fronts.size(); ++r) {
      auto crowd = crowding_of(population, fronts[r]);
      for (size_t k = 0; k < fronts[r].size(); ++k) {
        population[fronts[r][k]].rank = static_cast<int>(r);
        population[fronts[r][k]].crowding = crowd[k];
      }
    }
    return fronts;
  };

  assign_rank_crowding(pop);
  merge_into_archive(pop);

  auto tournament = [&](const std::vector<Individual>& population) -> const Individual& {
    const int a = static_cast<int>(rng.below(pop_size));
    const int b = static_cast<int>(rng.below(pop_size));
    const Individual& ia = population[a];
    const Individual& ib = population[b];
    if (ia.rank != ib.rank) return ia.rank < ib.rank ? ia : ib;
    if (ia.crowding != ib.crowding) return ia.crowding > ib.crowding ? ia : ib;
    return a <= b ? ia : ib;
  };

  // Bounded simulated binary crossover on one coordinate pair.
  auto sbx_pair = [&](double y1, double y2, double& c1, double& c2) {
    const double lo = 0.0, hi = 1.0;
    if (std::abs(y1 - y2) < 1e-14) {
      c1 = y1;
      c2 = y2;
      return;
    }
    if (y1 > y2) std::swap(y1, y2);
    const double u = rng.uniform_open();
    const double exponent = 1.0 / (config.crossover_eta + 1.0);
    auto child = [&](double bound_beta) {
      const double alpha = 2.0 - std::pow(bound_beta, -(config.crossover_eta + 1.0));
      return (u <= 1.0 / alpha) ? std::pow(u * alpha, exponent)
                                : std::pow(1.0 / (2.0 - u * alpha), exponent);
    };
    const double betaq1 = child(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
    const double betaq2 = child(1.0 + 2.0 * (hi - y2) / (y2 - y1));
    c1 = std::clamp(0.5 * ((y1 + y2) - betaq1 * (y2 - y1)), lo, hi);
    c2 = std::clamp(0.5 * ((y1 + y2) + betaq2 * (y2 - y1)), lo, hi);
    if (rng.uniform() < 0.5) std::swap(c1, c2);
  };

  auto mutate = [&](Eigen::VectorXd& x) {
    for (int d = 0; d < input_dim; ++d) {
      if (rng.uniform() >= mut_prob) continue;
      const double y = x[d];
      const double u = rng.uniform_open();
      const double exponent = 1.0 / (config.mutation_eta + 1.0);
      double deltaq;
      if (u < 0.5) {
        const double d1 = y;
        deltaq = std::pow(2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, config.mutation_eta + 1.0),
                          exponent) -
                 1.0;
      } else {
        const double d2 = 1.0 - y;
        deltaq = 1.0 - std::pow(2.0 * (1.0 - u) +
                                    2.0 * (u - 0.5) * std::pow(1.0 - d2, config.mutation_eta + 1.0),
                                exponent);
      }
      x[d] = std::clamp(y + deltaq, 0.0, 1.0);
    }
  };

  for (int gen = 0; gen < config.generations; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(pop_size);
    while (static_cast<int>(offspring.size()) < pop_size) {
      const Individual& p1 = tournament(pop);
      const Individual& p2 = tournament(pop);
      Individual c1, c2;
      c1.x = p1.x;
      c2.x = p2.x;
      if (rng.uniform() < config.crossover_prob) {
        for (int d = 0; d < input_dim; ++d) {
          if (rng.uniform() < 0.5) sbx_pair(p1.x[d], p2.x[d], c1.x[d], c2.x[d]);
        }
      }
      mutate(c1.x);
      mutate(c2.x);
      evaluate(c1);
      evaluate(c2);
      offspring.push_back(std::move(c1));
      if (static_cast<int>(offspring.size()) < pop_size) offspring.push_back(std::move(c2));
    }

    std::vector<Individual> combined = pop;
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    auto fronts = assign_rank_crowding(combined);

    std::vector<Individual> next;
    next.reserve(pop_size);
    for (const auto& front : fronts) {
      if (static_cast<int>(next.size() + front.size()) <= pop_size) {
        for (int idx : front) next.push_back(combined[idx]);
      } else {
        std::vector<int> order(front.begin(), front.end());
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return combined[a].crowding > combined[b].crowding;
        });
        for (int idx : order) {
          if (static_cast<int>(next.size()) >= pop_size) break;
          next.push_back(combined[idx]);
        }
      }
      if (static_cast<int>(next.size()) >= pop_size) break;
    }
    pop = std::move(next);
    assign_rank_crowding(pop);
    merge_into_archive(pop);
  }

  ParetoArchive out;
  out.points = std::move(archive_points);
  out.values = std::move(archive_values);
  return out;
}

}  // namespace cmokg
