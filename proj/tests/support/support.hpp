#pragma once

// Test fixtures and brute-force reference implementations. Nothing here calls
// into the solver code paths it is used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "rmab/belief_space.hpp"
#include "rmab/model.hpp"
#include "rmab/state_set.hpp"

namespace rmab::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Two-state symmetric chain with noisy observations, reward only in state 2
// when it is observed as state 2.
inline ArmSpec two_state_spec(ObservationMode mode = ObservationMode::ObservationOnly) {
  ArmSpec s;
  s.P = mat({{0.8, 0.2}, {0.2, 0.8}});
  s.E = mat({{0.8, 0.2}, {0.2, 0.8}});
  s.R = mat({{0.0, 0.0}, {0.0, 1.0}});
  s.mode = mode;
  return s;
}

inline Belief two_state_initial() { return Belief({0.6, 0.4}); }

inline double uniform(std::mt19937_64& gen) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(gen);
}

inline Matrix random_stochastic(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                                double zero_chance = 0.0) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = uniform(gen) < zero_chance ? 0.0 : uniform(gen) + 1e-3;
    }
    if (m.row(i).sum() == 0.0) m(i, i % m.cols()) = 1.0;
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

inline ArmSpec random_spec(std::mt19937_64& gen, std::size_t m, ObservationMode mode,
                           double zero_chance = 0.0) {
  ArmSpec s;
  s.mode = mode;
  s.P = random_stochastic(gen, m, m, zero_chance);
  s.E = random_stochastic(gen, m, m, zero_chance);
  s.R = Matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < s.R.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.R.cols(); ++j) s.R(i, j) = 3.0 * uniform(gen);
  }
  if (mode == ObservationMode::GeneralFeedback) {
    s.rho = random_stochastic(gen, m, m + 1, zero_chance);
  }
  return s;
}

inline Belief random_belief(std::mt19937_64& gen, std::size_t m) {
  std::vector<double> w(m);
  double sum = 0.0;
  for (auto& v : w) sum += (v = uniform(gen) + 1e-3);
  for (auto& v : w) v /= sum;
  return Belief(std::move(w));
}

// A synthetic finite kernel: deterministic passive targets, dense random
// active rows, rewards uniform on [0, 3).
inline TransitionKernels random_kernels(std::mt19937_64& gen, std::size_t n,
                                        double beta = 0.95) {
  TransitionKernels k;
  k.beta = beta;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const Matrix p1 = random_stochastic(gen, n, n, 0.3);
  for (std::size_t i = 0; i < n; ++i) {
    k.passive.push_back(pick(gen));
    std::vector<KernelEntry> row;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v > 0.0) row.push_back({j, v});
    }
    k.active.push_back(std::move(row));
    k.rewards.push_back(3.0 * uniform(gen));
    k.successors.emplace_back();
  }
  return k;
}

inline StateSet random_set(std::mt19937_64& gen, std::size_t n) {
  StateSet s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (uniform(gen) < 0.5) s.insert(i);
  }
  return s;
}

// Dense reference: v = (I - beta P_pi)^{-1} c, c_i = payoff_i on active states.
inline Eigen::VectorXd dense_value(const TransitionKernels& k, const StateSet& active,
                                   const std::vector<double>& payoff) {
  const auto n = static_cast<Eigen::Index>(k.size());
  const Matrix p0 = k.dense_passive();
  const Matrix p1 = k.dense_active();
  Matrix p(n, n);
  Eigen::VectorXd c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool on = active.contains(static_cast<std::size_t>(i));
    p.row(i) = on ? p1.row(i) : p0.row(i);
    c(i) = on ? payoff[static_cast<std::size_t>(i)] : 0.0;
  }
  return (Matrix::Identity(n, n) - k.beta * p).fullPivLu().solve(c);
}

// Subsidy value of the stationary policy that is active exactly on `active`:
// active states earn their reward, passive ones earn lambda.
inline Eigen::VectorXd dense_subsidy_value(const TransitionKernels& k,
                                           const StateSet& active, double lambda) {
  const auto n = static_cast<Eigen::Index>(k.size());
  const Matrix p0 = k.dense_passive();
  const Matrix p1 = k.dense_active();
  Matrix p(n, n);
  Eigen::VectorXd c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool on = active.contains(static_cast<std::size_t>(i));
    p.row(i) = on ? p1.row(i) : p0.row(i);
    c(i) = on ? k.rewards[static_cast<std::size_t>(i)] : lambda;
  }
  return (Matrix::Identity(n, n) - k.beta * p).fullPivLu().solve(c);
}

// Optimal subsidy values by enumerating all 2^S stationary policies.
inline std::vector<double> brute_force_values(const TransitionKernels& k, double lambda) {
  const std::size_t n = k.size();
  std::vector<double> best(n, -1e300);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    StateSet active(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) active.insert(i);
    }
    const auto v = dense_subsidy_value(k, active, lambda);
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::max(best[i], v(static_cast<Eigen::Index>(i)));
    }
  }
  return best;
}

struct MonteCarloOccupancy {
  std::vector<double> x1, x0, x1_se, x0_se;
  double reward = 0.0, reward_se = 0.0;
  double time = 0.0, time_se = 0.0;  // total discounted active time
};

// Trajectory simulation of the priority policy: per-trajectory discounted
// visit counts, averaged with their standard errors.
inline MonteCarloOccupancy simulate_occupancy(const TransitionKernels& k,
                                              const StateSet& priority, std::size_t initial,
                                              std::size_t trajectories, std::size_t horizon,
                                              std::uint64_t seed) {
  const std::size_t n = k.size();
  MonteCarloOccupancy out;
  std::vector<double> s1(n), s0(n), q1(n), q0(n), c1(n), c0(n);
  double sr = 0.0, qr = 0.0, st = 0.0, qt = 0.0;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t tr = 0; tr < trajectories; ++tr) {
    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c0.begin(), c0.end(), 0.0);
    double reward = 0.0, time = 0.0;
    std::size_t s = initial;
    double d = 1.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      if (priority.contains(s)) {
        c1[s] += d;
        time += d;
        reward += d * k.rewards[s];
        const double x = u(gen);
        double cum = 0.0;
        std::size_t next = k.active[s].back().col;
        for (const auto& e : k.active[s]) {
          cum += e.value;
          if (x < cum) {
            next = e.col;
            break;
          }
        }
        s = next;
      } else {
        c0[s] += d;
        s = k.passive[s];
      }
      d *= k.beta;
    }
    for (std::size_t i = 0; i < n; ++i) {
      s1[i] += c1[i];
      q1[i] += c1[i] * c1[i];
      s0[i] += c0[i];
      q0[i] += c0[i] * c0[i];
    }
    sr += reward;
    qr += reward * reward;
    st += time;
    qt += time * time;
  }
  const auto m = static_cast<double>(trajectories);
  auto se = [m](double sum, double sq) {
    const double mean = sum / m;
    return std::sqrt(std::max(sq / m - mean * mean, 0.0) / (m - 1.0));
  };
  for (std::size_t i = 0; i < n; ++i) {
    out.x1.push_back(s1[i] / m);
    out.x0.push_back(s0[i] / m);
    out.x1_se.push_back(se(s1[i], q1[i]));
    out.x0_se.push_back(se(s0[i], q0[i]));
  }
  out.reward = sr / m;
  out.reward_se = se(sr, qr);
  out.time = st / m;
  out.time_se = se(st, qt);
  return out;
}

// Exact belief tree to depth T (all operators, zero-probability branches
// skipped), deduplicated afterwards by exact equality.
inline std::vector<Belief> brute_force_tree(const ArmModel& model, const Belief& root,
                                            int steps) {
  std::vector<Belief> all{root};
  std::vector<Belief> frontier{root};
  for (int t = 0; t < steps; ++t) {
    std::vector<Belief> next;
    for (const auto& b : frontier) {
      next.push_back(passive_update(b, model));
      const auto q = feedback_probabilities(b, model);
      for (std::size_t l = 0; l < q.size(); ++l) {
        if (q[l] > kZeroProbability) next.push_back(active_update(b, model, l));
      }
    }
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return all;
}

}  // namespace rmab::testing
