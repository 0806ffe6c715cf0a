#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rmab/model.hpp"

namespace rmab {

/// Number of nodes of the full T-step belief tree with L feedback letters,
/// counting repeats: ((L+1)^(T+1) - 1) / L. Throws std::overflow_error when
/// the count does not fit in 64 bits.
std::uint64_t exact_tree_count(std::uint64_t letters, std::uint64_t steps);

/// epsilon-pruned T-step belief space. states[0] is the initial belief and the
/// order is the deterministic insertion order of enumerate_approx.
struct ApproxSpace {
  std::vector<Belief> states;
  double epsilon = 0.0;
  int steps = 0;
  // level_sizes[t] = number of states accepted at levels 0..t.
  std::vector<std::size_t> level_sizes;

  std::size_t size() const { return states.size(); }
  std::size_t dimension() const { return states.empty() ? 0 : states.front().size(); }
  static constexpr std::size_t origin = 0;
};

/// Breadth-first enumeration. Each state accepted at level t-1 is expanded at
/// level t with the operators B_0 (passive), B_1, ..., B_L in that order;
/// zero-probability branches are skipped. A candidate is kept iff its Euclidean
/// distance to every state accepted so far, same-level ones included, is
/// strictly greater than epsilon.
ApproxSpace enumerate_approx(const ArmModel& model, const Belief& initial, int steps,
                             double epsilon);

/// Index of the stored state nearest to `belief` (lowest index on ties).
std::size_t project(std::span<const double> belief, const ApproxSpace& space);
inline std::size_t project(const Belief& belief, const ApproxSpace& space) {
  return project(belief.entries(), space);
}

struct KernelEntry {
  std::size_t col;
  double value;

  friend bool operator==(const KernelEntry&, const KernelEntry&) = default;
};

inline constexpr std::ptrdiff_t kImpossibleOutcome = -1;

/// Finite active/passive transition structure over an ApproxSpace.
///
/// The passive kernel is deterministic, so only the target state of each row
/// is stored. The active kernel keeps sparse rows sorted by column. The
/// successor table records, for every state and feedback letter, the projected
/// target of the Bayes update (or kImpossibleOutcome); the simulator walks it
/// instead of re-projecting.
struct TransitionKernels {
  std::vector<std::size_t> passive;
  std::vector<std::vector<KernelEntry>> active;
  std::vector<double> rewards;
  std::vector<std::vector<std::ptrdiff_t>> successors;
  double beta = 0.95;

  std::size_t size() const { return rewards.size(); }
  double p0(std::size_t i, std::size_t j) const { return passive[i] == j ? 1.0 : 0.0; }
  double p1(std::size_t i, std::size_t j) const;
  Matrix dense_passive() const;
  Matrix dense_active() const;
};

TransitionKernels build_kernels(const ApproxSpace& space, const ArmModel& model,
                                double beta);

// Line-oriented text formats. Doubles are written with 17 significant digits
// so a reload reproduces the values bit for bit.
void write_space(std::ostream& out, const ApproxSpace& space);
ApproxSpace read_space(std::istream& in);
void write_kernels(std::ostream& out, const TransitionKernels& kernels);
TransitionKernels read_kernels(std::istream& in);

}  // namespace rmab
