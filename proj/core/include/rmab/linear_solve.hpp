#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rmab/belief_space.hpp"
#include "rmab/state_set.hpp"

namespace rmab {

// Above this many states the policy systems are solved by fixed-point
// iteration instead of a dense LU factorization.
inline constexpr std::size_t kDenseSolveLimit = 2000;

enum class SolveMethod { Automatic, Dense, Iterative };

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Row i of the policy matrix is p1_i when i is in `active`, else p0_i.
/// Returns I - beta * P_pi.
Matrix policy_system(const TransitionKernels& kernels, const StateSet& active);

/// Solves v_i = c_i + beta * sum_j (P_pi)_ij v_j where c_i = payoff_i for
/// active states and 0 otherwise.
std::vector<double> evaluate_priority(const TransitionKernels& kernels,
                                      const StateSet& active,
                                      std::span<const double> payoff,
                                      SolveMethod method = SolveMethod::Automatic);

/// Discounted state-visit measure x_j = E[sum_t beta^t 1(state_t = j)] of the
/// priority policy started in `initial`, i.e. x^T (I - beta P_pi) = e_initial^T.
std::vector<double> discounted_occupancy(const TransitionKernels& kernels,
                                         const StateSet& active, std::size_t initial,
                                         SolveMethod method = SolveMethod::Automatic);

}  // namespace rmab
