#pragma once

// Independent ground truth for the index engine: subsidy value iteration,
// bisection on the passive-set predicate, and exact occupancy measures for
// checking the conservation identities.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmab/belief_space.hpp"
#include "rmab/pcl.hpp"
#include "rmab/state_set.hpp"

namespace rmab {

inline constexpr double kValueIterationTolerance = 1e-10;
inline constexpr double kBisectionTolerance = 1e-8;
inline constexpr double kIdentityTolerance = 1e-8;
// Passive is preferred unless activity is better by more than this margin.
inline constexpr double kPassiveTieMargin = 1e-10;

struct SubsidyPolicy {
  double lambda = 0.0;
  StateSet passive;  // states where the passive action is optimal
};

struct ValueIterationResult {
  std::vector<double> values;
  SubsidyPolicy policy;
  std::size_t iterations = 0;
};

/// Iterates V <- max(lambda + beta p0 V, R + beta p1 V) from V = 0 until the
/// sup-norm change is at most tol (1 - beta) / (2 beta).
ValueIterationResult value_iteration(const TransitionKernels& kernels, double lambda,
                                     double tol = kValueIterationTolerance);

StateSet passive_set(const TransitionKernels& kernels, double lambda,
                     double tol = kValueIterationTolerance);

class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest subsidy keeping `state` passive, bisected on
/// [min R - 1, max R + 1] to within tol.
double whittle_bisection(const TransitionKernels& kernels, std::size_t state,
                         double tol = kBisectionTolerance);

struct PolicyEvalResult {
  std::vector<double> x1;   // active occupancy measure per state
  std::vector<double> x0;   // passive occupancy measure per state
  double total_active_time = 0.0;
  double total_active_reward = 0.0;
};

/// Occupancy measures of the priority policy (active iff in `priority`)
/// started in `initial`.
PolicyEvalResult policy_evaluate(const TransitionKernels& kernels,
                                 const StateSet& priority, std::size_t initial);

struct DecompositionResidual {
  double work = 0.0;    // |T^pi + sum_{Omega^c} A x0 - T^{Omega^c} - sum_Omega A x1|
  double reward = 0.0;  // same with R and W
};

DecompositionResidual check_decomposition(const TransitionKernels& kernels,
                                          const ActiveSet& omega,
                                          const StateSet& policy, std::size_t initial);

/// Largest residual of
///   (A_j^{O} - A_j^{O \ {i}}) W_i^{O} / A_i^{O} = W_j^{O} - W_j^{O \ {i}}
/// over every step O = Omega_k, i = pi_k of the table's extraction chain and
/// every state j. Marginal quantities are recomputed with dense solves.
double check_ag_chain(const TransitionKernels& kernels, const IndexTable& table);

/// Largest |gamma_{pi_k} - W/A| over the chain, recomputed independently.
double check_ag_cross_identity(const TransitionKernels& kernels, const IndexTable& table);

/// True iff passive_set(lambda) is nested nondecreasing along the ascending
/// grid, empty at the first point and full at the last.
bool check_indexability_monotone(const TransitionKernels& kernels,
                                 std::span<const double> grid);

/// Evenly spaced grid over [min R - 1, max R + 1].
std::vector<double> subsidy_grid(const TransitionKernels& kernels, std::size_t points);

/// One named numerical check for the verification report.
struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

void write_verification_report(std::ostream& out, std::span<const CheckResult> checks);

}  // namespace rmab
