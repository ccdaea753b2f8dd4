#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace auvpilot {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct Bounds {
  Eigen::VectorXd low;
  Eigen::VectorXd high;

  Eigen::Index dim() const { return low.size(); }

  void validate() const {
    if (low.size() != high.size() || low.size() == 0) {
      throw std::invalid_argument("Bounds: dimension mismatch");
    }
    for (Eigen::Index i = 0; i < low.size(); ++i) {
      if (!(low[i] < high[i])) throw std::invalid_argument("Bounds: low must be below high");
    }
  }

  Eigen::VectorXd clamp(Eigen::VectorXd x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], low[i], high[i]);
    return x;
  }

  bool contains(const Eigen::VectorXd& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < low[i] || x[i] > high[i]) return false;
    }
    return true;
  }
};

struct OptimizerConfig {
  int mu = 5;               ///< parents kept per generation
  int lambda = 25;          ///< offspring per generation
  int generations = 60;
  double sigma_init = 0.25;  ///< initial mutation scale, relative to box width
  double sigma_min = 1e-5;
  double sigma_max = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;           ///< worker threads for offspring evaluation
  double stop_below = -1.0;  ///< early stop once best <= this (disabled when negative)
  int simplex_max_iter = 300;
  double simplex_tol = 1e-12;
};

struct OptResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> history;  ///< best value after each generation / accepted step
  long evaluations = 0;
};

/// Evaluates fn(0..n-1) on up to `threads` workers, preserving index order
/// of results. The objective must be safe to call concurrently.
inline std::vector<double> parallel_map(int n, int threads, const std::function<double(int)>& fn) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n);
  std::atomic<int> next{0};
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        out[static_cast<std::size_t>(i)] = fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

/// (mu + lambda) evolution strategy with Gaussian mutation and a 1/5
/// success-rule step-size schedule. Mutations are drawn serially from one
/// seeded generator, so results do not depend on the worker count; only
/// objective evaluations run in parallel. Offspring are clamped to the box.
inline OptResult evolve(const OptimizerConfig& cfg, const ObjectiveFn& objective,
                        const Bounds& bounds, const Eigen::VectorXd& start) {
  bounds.validate();
  if (start.size() != bounds.dim()) throw std::invalid_argument("evolve: start dimension");
  if (cfg.mu < 1 || cfg.lambda < 1) throw std::invalid_argument("evolve: mu/lambda");

  const Eigen::VectorXd width = bounds.high - bounds.low;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_parent(0, cfg.mu - 1);

  struct Individual {
    Eigen::VectorXd x;
    double value;
  };

  OptResult result;
  std::vector<Individual> parents;
  parents.reserve(static_cast<std::size_t>(cfg.mu));
  {
    std::vector<Eigen::VectorXd> init;
    init.push_back(bounds.clamp(start));
    for (int i = 1; i < cfg.mu; ++i) {
      Eigen::VectorXd x = start;
      for (Eigen::Index d = 0; d < x.size(); ++d) {
        x[d] += cfg.sigma_init * width[d] * gauss(rng);
      }
      init.push_back(bounds.clamp(x));
    }
    const auto values = parallel_map(cfg.mu, cfg.threads,
                                     [&](int i) { return objective(init[static_cast<std::size_t>(i)]); });
    result.evaluations += cfg.mu;
    for (int i = 0; i < cfg.mu; ++i) {
      parents.push_back({init[static_cast<std::size_t>(i)], values[static_cast<std::size_t>(i)]});
    }
  }
  auto by_value = [](const Individual& a, const Individual& b) { return a.value < b.value; };
  std::stable_sort(parents.begin(), parents.end(), by_value);

  double sigma = cfg.sigma_init;
  result.x = parents.front().x;
  result.value = parents.front().value;
  result.history.push_back(result.value);

  for (int gen = 0; gen < cfg.generations; ++gen) {
    if (cfg.stop_below >= 0.0 && result.value <= cfg.stop_below) break;

    std::vector<Individual> offspring(static_cast<std::size_t>(cfg.lambda));
    std::vector<int> parent_of(static_cast<std::size_t>(cfg.lambda));
    for (int i = 0; i < cfg.lambda; ++i) {
      const int pi = pick_parent(rng);
      Eigen::VectorXd x = parents[static_cast<std::size_t>(pi)].x;
      for (Eigen::Index d = 0; d < x.size(); ++d) x[d] += sigma * width[d] * gauss(rng);
      offspring[static_cast<std::size_t>(i)].x = bounds.clamp(x);
      parent_of[static_cast<std::size_t>(i)] = pi;
    }
    const auto values = parallel_map(cfg.lambda, cfg.threads, [&](int i) {
      return objective(offspring[static_cast<std::size_t>(i)].x);
    });
    result.evaluations += cfg.lambda;

    int successes = 0;
    for (int i = 0; i < cfg.lambda; ++i) {
      offspring[static_cast<std::size_t>(i)].value = values[static_cast<std::size_t>(i)];
      if (values[static_cast<std::size_t>(i)] <
          parents[static_cast<std::size_t>(parent_of[static_cast<std::size_t>(i)])].value) {
        ++successes;
      }
    }

    std::vector<Individual> pool = parents;
    pool.insert(pool.end(), offspring.begin(), offspring.end());
    std::stable_sort(pool.begin(), pool.end(), by_value);
    pool.resize(static_cast<std::size_t>(cfg.mu));
    parents = std::move(pool);

    const double ratio = static_cast<double>(successes) / static_cast<double>(cfg.lambda);
    if (ratio > 0.2) sigma *= 1.22;
    else if (ratio < 0.2) sigma /= 1.22;
    sigma = std::clamp(sigma, cfg.sigma_min, cfg.sigma_max);

    if (parents.front().value < result.value) {
      result.value = parents.front().value;
      result.x = parents.front().x;
    }
    result.history.push_back(result.value);
  }
  return result;
}

/// Nelder-Mead simplex descent with a box-boundary penalty; the returned
/// point is always feasible. Evaluations are sequential by nature.
inline OptResult nelder_mead(const ObjectiveFn& objective, const Bounds& bounds,
                             const Eigen::VectorXd& start, int max_iter = 300,
                             double tol = 1e-12) {
  bounds.validate();
  const Eigen::Index n = bounds.dim();
  if (start.size() != n) throw std::invalid_argument("nelder_mead: start dimension");

  long evals = 0;
  const auto penalized = [&](const Eigen::VectorXd& x) {
    ++evals;
    if (bounds.contains(x)) return objective(x);
    double excess = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      excess += std::max(0.0, bounds.low[i] - x[i]) + std::max(0.0, x[i] - bounds.high[i]);
    }
    return 1e12 * (1.0 + excess);
  };

  struct Vertex {
    Eigen::VectorXd x;
    double value;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(static_cast<std::size_t>(n) + 1);
  const Eigen::VectorXd x0 = bounds.clamp(start);
  simplex.push_back({x0, penalized(x0)});
  for (Eigen::Index d = 0; d < n; ++d) {
    Eigen::VectorXd x = x0;
    const double step = 0.05 * (bounds.high[d] - bounds.low[d]);
    x[d] = (x[d] + step <= bounds.high[d]) ? x[d] + step : x[d] - step;
    simplex.push_back({x, penalized(x)});
  }
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.value < b.value; };
  std::stable_sort(simplex.begin(), simplex.end(), by_value);

  OptResult result;
  result.history.push_back(simplex.front().value);

  for (int iter = 0; iter < max_iter; ++iter) {
    const double spread = simplex.back().value - simplex.front().value;
    if (spread <= tol * (std::abs(simplex.front().value) + tol)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i].x;
    centroid /= static_cast<double>(n);

    const Vertex& worst = simplex.back();
    const Eigen::VectorXd xr = centroid + (centroid - worst.x);
    const double fr = penalized(xr);

    if (fr < simplex.front().value) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst.x);
      const double fe = penalized(xe);
      simplex.back() = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < simplex[simplex.size() - 2].value) {
      simplex.back() = {xr, fr};
    } else {
      const bool outside = fr < worst.value;
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                         : Eigen::VectorXd(centroid - 0.5 * (centroid - worst.x));
      const double fc = penalized(xc);
      if (fc < std::min(fr, worst.value)) {
        simplex.back() = {xc, fc};
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i].x = simplex.front().x + 0.5 * (simplex[i].x - simplex.front().x);
          simplex[i].value = penalized(simplex[i].x);
        }
      }
    }
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    result.history.push_back(simplex.front().value);
  }

  result.x = bounds.clamp(simplex.front().x);
  result.value = simplex.front().value;
  result.evaluations = evals;
  return result;
}

/// Evolution-strategy search followed by simplex refinement from the best
/// point found; the staged-identification and gain-tuning drivers share it.
inline OptResult minimize(const OptimizerConfig& cfg, const ObjectiveFn& objective,
                          const Bounds& bounds, const Eigen::VectorXd& start) {
  OptResult es = evolve(cfg, objective, bounds, start);
  if (cfg.stop_below >= 0.0 && es.value <= cfg.stop_below) return es;
  OptResult nm = nelder_mead(objective, bounds, es.x, cfg.simplex_max_iter, cfg.simplex_tol);
  nm.evaluations += es.evaluations;
  if (nm.value <= es.value) {
    nm.history.insert(nm.history.begin(), es.history.begin(), es.history.end());
    return nm;
  }
  es.history.insert(es.history.end(), nm.history.begin(), nm.history.end());
  es.evaluations = nm.evaluations;
  return es;
}

}  // namespace auvpilot
