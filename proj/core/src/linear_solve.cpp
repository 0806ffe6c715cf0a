#include "rmab/linear_solve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rmab {

namespace {

constexpr double kIterativeResidual = 1e-12;
constexpr std::size_t kMaxIterations = 1'000'000;

bool use_dense(std::size_t n, SolveMethod method) {
  switch (method) {
    case SolveMethod::Dense: return true;
    case SolveMethod::Iterative: return false;
    case SolveMethod::Automatic: break;
  }
  return n <= kDenseSolveLimit;
}

void require_universe(const TransitionKernels& k, const StateSet& s) {
  if (s.universe() != k.size()) {
    throw DimensionMismatch("state set universe does not match the kernels");
  }
}

}  // namespace

Matrix policy_system(const TransitionKernels& k, const StateSet& active) {
  require_universe(k, active);
  const auto n = static_cast<Eigen::Index>(k.size());
  Matrix a = Matrix::Identity(n, n);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (active.contains(i)) {
      for (const auto& e : k.active[i]) {
        a(r, static_cast<Eigen::Index>(e.col)) -= k.beta * e.value;
      }
    } else {
      a(r, static_cast<Eigen::Index>(k.passive[i])) -= k.beta;
    }
  }
  return a;
}

std::vector<double> evaluate_priority(const TransitionKernels& k, const StateSet& active,
                                      std::span<const double> payoff,
                                      SolveMethod method) {
  require_universe(k, active);
  if (payoff.size() != k.size()) throw DimensionMismatch("payoff size mismatch");
  const std::size_t n = k.size();

  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (active.contains(i)) c[i] = payoff[i];
  }

  if (use_dense(n, method)) {
    const Eigen::Map<const Eigen::VectorXd> rhs(c.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd v = policy_system(k, active).partialPivLu().solve(rhs);
    return {v.data(), v.data() + v.size()};
  }

  std::vector<double> v(n, 0.0);
  std::vector<double> next(n);
  double change = 0.0;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      if (active.contains(i)) {
        for (const auto& e : k.active[i]) sum += e.value * v[e.col];
      } else {
        sum = v[k.passive[i]];
      }
      next[i] = c[i] + k.beta * sum;
      change = std::max(change, std::abs(next[i] - v[i]));
    }
    v.swap(next);
    if (change <= kIterativeResidual) return v;
  }
  throw SolverError("policy evaluation did not converge, residual " +
                        std::to_string(change),
                    change);
}

std::vector<double> discounted_occupancy(const TransitionKernels& k,
                                         const StateSet& active, std::size_t initial,
                                         SolveMethod method) {
  require_universe(k, active);
  const std::size_t n = k.size();
  if (initial >= n) throw DimensionMismatch("initial state out of range");

  if (use_dense(n, method)) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    rhs(static_cast<Eigen::Index>(initial)) = 1.0;
    const Eigen::VectorXd x =
        policy_system(k, active).transpose().partialPivLu().solve(rhs);
    return {x.data(), x.data() + x.size()};
  }

  // x <- e_initial + beta * P_pi^T x
  std::vector<double> x(n, 0.0);
  std::vector<double> next(n);
  double change = 0.0;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    next[initial] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double flow = k.beta * x[i];
      if (active.contains(i)) {
        for (const auto& e : k.active[i]) next[e.col] += flow * e.value;
      } else {
        next[k.passive[i]] += flow;
      }
    }
    change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - x[i]));
    x.swap(next);
    if (change <= kIterativeResidual) return x;
  }
  throw SolverError("occupancy solve did not converge, residual " +
                        std::to_string(change),
                    change);
}

}  // namespace rmab
