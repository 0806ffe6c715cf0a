#include "rmab/pcl.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "rmab/linear_solve.hpp"
#include "text_io.hpp"

namespace rmab {

std::vector<double> occupancy_active(const TransitionKernels& k, const ActiveSet& omega) {
  const std::vector<double> ones(k.size(), 1.0);
  auto t = evaluate_priority(k, omega, ones);
  // Rounding can push exact zeros slightly negative.
  for (double& v : t) v = std::max(v, 0.0);
  return t;
}

std::vector<double> reward_active(const TransitionKernels& k, const ActiveSet& omega) {
  return evaluate_priority(k, omega, k.rewards);
}

namespace {

// beta * sum_j (p1_ij - p0_ij) v_j
double activation_gain(const TransitionKernels& k, std::size_t i,
                       const std::vector<double>& v) {
  double sum = 0.0;
  for (const auto& e : k.active[i]) sum += e.value * v[e.col];
  return k.beta * (sum - v[k.passive[i]]);
}

}  // namespace

std::vector<double> marginal_work_all(const TransitionKernels& k, const ActiveSet& omega) {
  const auto t = occupancy_active(k, omega.complement());
  std::vector<double> a(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) a[i] = 1.0 + activation_gain(k, i, t);
  return a;
}

std::vector<double> marginal_reward_all(const TransitionKernels& k,
                                        const ActiveSet& omega) {
  const auto r = reward_active(k, omega.complement());
  std::vector<double> w(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) w[i] = k.rewards[i] + activation_gain(k, i, r);
  return w;
}

double marginal_work(const TransitionKernels& k, const ActiveSet& omega,
                     std::size_t state) {
  if (state >= k.size()) throw DimensionMismatch("state out of range");
  const auto t = occupancy_active(k, omega.complement());
  return 1.0 + activation_gain(k, state, t);
}

double marginal_reward(const TransitionKernels& k, const ActiveSet& omega,
                       std::size_t state) {
  if (state >= k.size()) throw DimensionMismatch("state out of range");
  const auto r = reward_active(k, omega.complement());
  return k.rewards[state] + activation_gain(k, state, r);
}

DivisionByNearZero::DivisionByNearZero(std::size_t step, std::size_t state, double work)
    : std::runtime_error("marginal work of state " + std::to_string(state) +
                         " is " + detail::format_double(work) + " at step " +
                         std::to_string(step)),
      step_(step),
      state_(state) {}

std::vector<std::size_t> IndexTable::ranks() const {
  std::vector<std::size_t> r(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) r[order[pos]] = pos + 1;
  return r;
}

namespace {

// Tracks T^{C} for a growing active set C, where C is the complement of the
// adaptive-greedy working set.
class ComplementOccupancy {
 public:
  explicit ComplementOccupancy(const TransitionKernels& k)
      : k_(k), active_(StateSet::empty(k.size())), dense_(k.size() <= kDenseSolveLimit) {
    const auto n = static_cast<Eigen::Index>(k.size());
    if (dense_) {
      inverse_ = policy_system(k, active_).partialPivLu().inverse();
      indicator_ = Eigen::VectorXd::Zero(n);
      raw_ = Eigen::VectorXd::Zero(n);
    }
    occupancy_.assign(k.size(), 0.0);
  }

  void activate(std::size_t s) {
    active_.insert(s);
    if (!dense_) {
      occupancy_ = occupancy_active(k_, active_);
      return;
    }
    // Row s of I - beta P changes by delta = beta (p0_s - p1_s).
    // Sherman-Morrison: Q'^{-1} = Q^{-1} - (Q^{-1} e_s)(delta Q^{-1}) / (1 + delta Q^{-1} e_s).
    const auto si = static_cast<Eigen::Index>(s);
    const Eigen::VectorXd column = inverse_.col(si);
    Eigen::RowVectorXd row = inverse_.row(static_cast<Eigen::Index>(k_.passive[s]));
    for (const auto& e : k_.active[s]) {
      row.noalias() -= e.value * inverse_.row(static_cast<Eigen::Index>(e.col));
    }
    row *= k_.beta;
    const double denom = 1.0 + row(si);
    inverse_.noalias() -= column * (row / denom);

    // T' = Q'^{-1} 1_{C + s} = T + column - column (row . 1_{C + s}) / denom.
    indicator_(si) = 1.0;
    const double scale = 1.0 - row.dot(indicator_) / denom;
    raw_ += scale * column;
    for (Eigen::Index i = 0; i < raw_.size(); ++i) {
      occupancy_[static_cast<std::size_t>(i)] = std::max(raw_(i), 0.0);
    }
  }

  const std::vector<double>& occupancy() const { return occupancy_; }

 private:
  const TransitionKernels& k_;
  StateSet active_;
  bool dense_;
  Matrix inverse_;
  Eigen::VectorXd indicator_;
  Eigen::VectorXd raw_;
  std::vector<double> occupancy_;
};

std::size_t argmax_over(const std::vector<double>& gamma, const StateSet& set) {
  std::size_t best = gamma.size();
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (!set.contains(i)) continue;
    if (best == gamma.size() || gamma[i] > gamma[best]) best = i;
  }
  return best;
}

}  // namespace

IndexTable adaptive_greedy(const TransitionKernels& k, const AgOptions& options) {
  const std::size_t n = k.size();
  if (n == 0) throw std::invalid_argument("adaptive_greedy on an empty space");

  IndexTable table;
  table.gamma.assign(n, 0.0);
  table.order.reserve(n);

  StateSet remaining = StateSet::full(n);
  std::vector<double> work(n, 1.0);  // A^{Omega_1} = 1
  std::vector<double> gamma(k.rewards.begin(), k.rewards.end());
  ComplementOccupancy complement(k);

  auto verify_step = [&](std::size_t step, std::size_t state) {
    if (!options.verify) return;
    const double a = marginal_work(k, remaining, state);
    const double w = marginal_reward(k, remaining, state);
    const double residual = std::abs(gamma[state] - w / a);
    if (!(residual <= options.cross_tolerance * std::max(1.0, std::abs(w / a)))) {
      throw VerificationFailure("step " + std::to_string(step) + ", state " +
                                std::to_string(state) + ": recurrence index " +
                                detail::format_double(gamma[state]) + " vs W/A " +
                                detail::format_double(w / a));
    }
  };

  std::size_t current = argmax_over(gamma, remaining);
  verify_step(1, current);
  table.order.push_back(current);
  table.gamma[current] = gamma[current];

  for (std::size_t step = 2; step <= n; ++step) {
    const double gamma_prev = gamma[current];
    remaining.erase(current);
    complement.activate(current);
    const auto& t = complement.occupancy();

    for (std::size_t i = 0; i < n; ++i) {
      if (!remaining.contains(i)) continue;
      const double a_new = 1.0 + activation_gain(k, i, t);
      if (std::abs(a_new) < kMinMarginalWork) throw DivisionByNearZero(step, i, a_new);
      gamma[i] += (work[i] / a_new - 1.0) * (gamma[i] - gamma_prev);
      work[i] = a_new;
    }

    current = argmax_over(gamma, remaining);
    verify_step(step, current);
    table.order.push_back(current);
    table.gamma[current] = gamma[current];
    if (options.stop_on_fail && gamma[current] > gamma_prev + kMonotoneTolerance) {
      table.fail = true;
      return table;
    }
  }

  for (std::size_t pos = 1; pos < n; ++pos) {
    if (table.gamma[table.order[pos]] >
        table.gamma[table.order[pos - 1]] + kMonotoneTolerance) {
      table.fail = true;
      break;
    }
  }
  return table;
}

void write_index_table(std::ostream& out, const IndexTable& table) {
  const auto ranks = table.ranks();
  out << "fail," << (table.fail ? 1 : 0) << '\n';
  out << "state_index,gamma,rank\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << i << ',' << detail::format_double(table.gamma[i]) << ',' << ranks[i] << '\n';
  }
}

IndexTable read_index_table(std::istream& in) {
  detail::LineReader reader(in);
  IndexTable table;
  auto header = reader.next_csv();
  if (header.size() != 2 || header[0] != "fail") {
    throw std::runtime_error("index table must start with a fail line");
  }
  table.fail = detail::parse_count(header[1]) != 0;
  header = reader.next_csv();
  if (header != std::vector<std::string>{"state_index", "gamma", "rank"}) {
    throw std::runtime_error("missing index table column header");
  }
  std::vector<std::pair<std::size_t, std::size_t>> rank_of;
  std::string line;
  while (reader.next(line)) {
    const auto f = detail::split_csv(line);
    if (f.size() != 3 || detail::parse_count(f[0]) != table.gamma.size()) {
      throw std::runtime_error("malformed index line " + std::to_string(reader.line()));
    }
    table.gamma.push_back(detail::parse_double(f[1]));
    rank_of.emplace_back(detail::parse_count(f[2]), table.gamma.size() - 1);
  }
  std::sort(rank_of.begin(), rank_of.end());
  for (std::size_t pos = 0; pos < rank_of.size(); ++pos) {
    if (rank_of[pos].first != pos + 1) throw std::runtime_error("ranks are not a permutation");
    table.order.push_back(rank_of[pos].second);
  }
  return table;
}

}  // namespace rmab
