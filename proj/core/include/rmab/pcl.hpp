#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmab/belief_space.hpp"
#include "rmab/state_set.hpp"

namespace rmab {

// Omega in T^Omega, R^Omega, A^Omega, W^Omega: the states where the arm is
// active under the Omega-priority policy.
using ActiveSet = StateSet;

/// T^Omega: expected total discounted active time of the Omega-priority
/// policy from every state. Entries lie in [0, 1/(1-beta)].
std::vector<double> occupancy_active(const TransitionKernels& kernels,
                                     const ActiveSet& omega);

/// R^Omega: expected total discounted active reward of the Omega-priority
/// policy from every state.
std::vector<double> reward_active(const TransitionKernels& kernels,
                                  const ActiveSet& omega);

/// Marginal work A_i^Omega = 1 + beta * sum_j (p1_ij - p0_ij) T_j^{Omega^c}.
double marginal_work(const TransitionKernels& kernels, const ActiveSet& omega,
                     std::size_t state);
/// Marginal reward W_i^Omega = R_i + beta * sum_j (p1_ij - p0_ij) R_j^{Omega^c}.
double marginal_reward(const TransitionKernels& kernels, const ActiveSet& omega,
                       std::size_t state);

// Whole-vector variants sharing one solve.
std::vector<double> marginal_work_all(const TransitionKernels& kernels,
                                      const ActiveSet& omega);
std::vector<double> marginal_reward_all(const TransitionKernels& kernels,
                                        const ActiveSet& omega);

class DivisionByNearZero : public std::runtime_error {
 public:
  DivisionByNearZero(std::size_t step, std::size_t state, double work);
  std::size_t step() const { return step_; }
  std::size_t state() const { return state_; }

 private:
  std::size_t step_;
  std::size_t state_;
};

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output of the adaptive-greedy algorithm.
struct IndexTable {
  std::vector<double> gamma;        // index per state
  std::vector<std::size_t> order;   // extraction order, highest index first
  bool fail = false;                // extracted indices not nonincreasing

  std::size_t size() const { return gamma.size(); }
  // 1-based position of each state in `order`.
  std::vector<std::size_t> ranks() const;
};

inline constexpr double kMonotoneTolerance = 1e-12;
inline constexpr double kMinMarginalWork = 1e-12;

struct AgOptions {
  // Recompute W/A for every extracted state with independent dense solves and
  // throw VerificationFailure when it differs from the recurrence by more than
  // cross_tolerance (relative once |W/A| exceeds one).
  bool verify = false;
  double cross_tolerance = 1e-9;
  // Return as soon as the extracted indices stop being nonincreasing. The
  // table is then partial: only states in `order` carry an index.
  bool stop_on_fail = false;
};

/// Adaptive-greedy index computation over the approximate space.
///
/// Starts from Omega_1 = all states with gamma = R / A = R, repeatedly
/// extracts the argmax (lowest index on ties), moves it into the active set of
/// the complement policy and updates the remaining indices by
///   gamma_i <- gamma_i + (A_i^{old} / A_i^{new} - 1) (gamma_i - gamma_prev)
/// where gamma_prev is the index of the state just extracted. The marginal work
/// vector is maintained through rank-one updates of (I - beta P)^{-1}, so a
/// full run costs O(S^3) for S states.
///
/// Throws DivisionByNearZero when some |A_i| < 1e-12.
IndexTable adaptive_greedy(const TransitionKernels& kernels, const AgOptions& options = {});

/// "fail,<0|1>" header line, then "state_index,gamma,rank" rows.
void write_index_table(std::ostream& out, const IndexTable& table);
IndexTable read_index_table(std::istream& in);

}  // namespace rmab
