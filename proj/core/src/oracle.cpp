#include "rmab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "rmab/linear_solve.hpp"
#include "text_io.hpp"

namespace rmab {

namespace {

double active_continuation(const TransitionKernels& k, std::size_t i,
                           const std::vector<double>& v) {
  double sum = 0.0;
  for (const auto& e : k.active[i]) sum += e.value * v[e.col];
  return sum;
}

}  // namespace

ValueIterationResult value_iteration(const TransitionKernels& k, double lambda,
                                     double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("value iteration tolerance must be positive");
  const std::size_t n = k.size();
  const double stop = k.beta > 0.0 ? tol * (1.0 - k.beta) / (2.0 * k.beta)
                                   : std::numeric_limits<double>::infinity();

  ValueIterationResult result;
  std::vector<double> v(n, 0.0);
  std::vector<double> next(n);
  while (true) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double passive = lambda + k.beta * v[k.passive[i]];
      const double active = k.rewards[i] + k.beta * active_continuation(k, i, v);
      next[i] = std::max(passive, active);
      change = std::max(change, std::abs(next[i] - v[i]));
    }
    v.swap(next);
    ++result.iterations;
    if (change <= stop) break;
  }

  result.policy.lambda = lambda;
  result.policy.passive = StateSet::empty(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double passive = lambda + k.beta * v[k.passive[i]];
    const double active = k.rewards[i] + k.beta * active_continuation(k, i, v);
    if (passive >= active - kPassiveTieMargin) result.policy.passive.insert(i);
  }
  result.values = std::move(v);
  return result;
}

StateSet passive_set(const TransitionKernels& k, double lambda, double tol) {
  return value_iteration(k, lambda, tol).policy.passive;
}

namespace {

std::pair<double, double> reward_range(const TransitionKernels& k) {
  const auto [lo, hi] = std::minmax_element(k.rewards.begin(), k.rewards.end());
  return {*lo, *hi};
}

}  // namespace

double whittle_bisection(const TransitionKernels& k, std::size_t state, double tol) {
  if (state >= k.size()) throw DimensionMismatch("state out of range");
  const auto [rmin, rmax] = reward_range(k);
  double lo = rmin - 1.0;
  double hi = rmax + 1.0;
  auto passive_at = [&](double lambda) {
    return passive_set(k, lambda).contains(state);
  };
  if (passive_at(lo) || !passive_at(hi)) {
    throw BracketFailure("state " + std::to_string(state) +
                         " is not active at the lower bracket and passive at the upper");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (passive_at(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PolicyEvalResult policy_evaluate(const TransitionKernels& k, const StateSet& priority,
                                 std::size_t initial) {
  const auto x = discounted_occupancy(k, priority, initial);
  PolicyEvalResult r;
  r.x1.assign(k.size(), 0.0);
  r.x0.assign(k.size(), 0.0);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double xi = std::max(x[i], 0.0);
    if (priority.contains(i)) {
      r.x1[i] = xi;
      r.total_active_time += xi;
      r.total_active_reward += k.rewards[i] * xi;
    } else {
      r.x0[i] = xi;
    }
  }
  return r;
}

DecompositionResidual check_decomposition(const TransitionKernels& k,
                                          const ActiveSet& omega, const StateSet& policy,
                                          std::size_t initial) {
  const auto eval = policy_evaluate(k, policy, initial);
  const auto a = marginal_work_all(k, omega);
  const auto w = marginal_reward_all(k, omega);
  const auto complement = omega.complement();
  const double t_complement = occupancy_active(k, complement)[initial];
  const double r_complement = reward_active(k, complement)[initial];

  double lhs_t = eval.total_active_time;
  double rhs_t = t_complement;
  double lhs_r = eval.total_active_reward;
  double rhs_r = r_complement;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (omega.contains(i)) {
      rhs_t += a[i] * eval.x1[i];
      rhs_r += w[i] * eval.x1[i];
    } else {
      lhs_t += a[i] * eval.x0[i];
      lhs_r += w[i] * eval.x0[i];
    }
  }
  return {std::abs(lhs_t - rhs_t), std::abs(lhs_r - rhs_r)};
}

double check_ag_chain(const TransitionKernels& k, const IndexTable& table) {
  const std::size_t n = k.size();
  if (table.size() != n) throw DimensionMismatch("index table does not match kernels");
  StateSet omega = StateSet::full(n);
  auto a = marginal_work_all(k, omega);
  auto w = marginal_reward_all(k, omega);
  double worst = 0.0;
  for (const std::size_t i : table.order) {
    StateSet reduced = omega;
    reduced.erase(i);
    const auto a_next = marginal_work_all(k, reduced);
    const auto w_next = marginal_reward_all(k, reduced);
    const double index = w[i] / a[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double residual = (a[j] - a_next[j]) * index - (w[j] - w_next[j]);
      worst = std::max(worst, std::abs(residual));
    }
    omega = std::move(reduced);
    a = a_next;
    w = w_next;
  }
  return worst;
}

double check_ag_cross_identity(const TransitionKernels& k, const IndexTable& table) {
  const std::size_t n = k.size();
  if (table.size() != n) throw DimensionMismatch("index table does not match kernels");
  StateSet omega = StateSet::full(n);
  double worst = 0.0;
  for (const std::size_t i : table.order) {
    const double a = marginal_work(k, omega, i);
    const double w = marginal_reward(k, omega, i);
    worst = std::max(worst, std::abs(table.gamma[i] - w / a));
    omega.erase(i);
  }
  return worst;
}

bool check_indexability_monotone(const TransitionKernels& k,
                                 std::span<const double> grid) {
  if (grid.empty()) return true;
  StateSet previous;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto current = passive_set(k, grid[g]);
    if (g == 0 && !current.empty()) return false;
    if (g > 0 && !previous.is_subset_of(current)) return false;
    previous = std::move(current);
  }
  return previous.size() == k.size();
}

std::vector<double> subsidy_grid(const TransitionKernels& k, std::size_t points) {
  if (points < 2) throw std::invalid_argument("subsidy grid needs at least two points");
  const auto [rmin, rmax] = reward_range(k);
  const double lo = rmin - 1.0;
  const double hi = rmax + 1.0;
  std::vector<double> grid(points);
  for (std::size_t g = 0; g < points; ++g) {
    grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(points - 1);
  }
  return grid;
}

void write_verification_report(std::ostream& out, std::span<const CheckResult> checks) {
  out << "check,value,threshold,status\n";
  for (const auto& c : checks) {
    out << c.name << ',' << detail::format_double(c.value) << ','
        << detail::format_double(c.threshold) << ',' << (c.passed ? "pass" : "FAIL")
        << '\n';
  }
}

}  // namespace rmab
