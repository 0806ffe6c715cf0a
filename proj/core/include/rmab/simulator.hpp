#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "rmab/belief_space.hpp"
#include "rmab/model.hpp"
#include "rmab/pcl.hpp"

namespace rmab {

enum class PolicyKind { Whittle, Myopic, Random };

std::string_view to_string(PolicyKind policy);
PolicyKind parse_policy(std::string_view text);

/// Everything the simulator needs for one arm. Arms built from the same
/// config block share the immutable pieces.
struct ArmSetup {
  std::shared_ptr<const ArmModel> model;
  Belief initial;
  std::shared_ptr<const ApproxSpace> space;
  std::shared_ptr<const TransitionKernels> kernels;
  std::shared_ptr<const IndexTable> index;
};

struct SystemConfig {
  std::vector<ArmSetup> arms;
  std::size_t activations = 1;  // K
  std::size_t horizon = 200;
  std::size_t episodes = 10000;
  double beta = 0.95;
  std::uint64_t master_seed = 0;
  // Keep exact Bayes beliefs and interpolate the index between the two
  // nearest stored states instead of snapping to the nearest one.
  bool interpolate = false;
  std::size_t threads = 1;
};

// Throws std::invalid_argument on a malformed configuration.
void validate_system(const SystemConfig& config);

/// Indices of the k largest scores, ties broken by lowest index, returned in
/// selection order.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

std::vector<std::size_t> myopic_action(std::span<const Belief> beliefs,
                                       std::span<const ArmModel* const> models,
                                       std::size_t k);

std::vector<std::size_t> whittle_action(std::span<const Belief> beliefs,
                                        std::span<const ApproxSpace* const> spaces,
                                        std::span<const IndexTable* const> tables,
                                        std::size_t k);

struct EpisodeTrace {
  // Filled only when details are requested. Indexed [slot][arm] except
  // `chosen`, which holds the ascending active arm set per slot.
  std::vector<std::vector<std::size_t>> chosen;
  std::vector<std::vector<std::size_t>> true_states;
  std::vector<std::vector<double>> arm_rewards;

  std::vector<double> slot_rewards;
  double total_reward = 0.0;
  double discounted_reward = 0.0;  // sum_t beta^(t-1) r(t)
};

/// Simulates one episode. All randomness comes from a counter-based stream
/// keyed by (master_seed, episode, arm, slot, purpose), so every policy sees
/// the same state, observation and transition draws for a given arm and slot.
EpisodeTrace simulate_episode(const SystemConfig& config, PolicyKind policy,
                              std::uint64_t episode, bool details = true);

struct PolicyMetrics {
  PolicyKind policy = PolicyKind::Whittle;
  double mean_per_slot = 0.0;
  double std_per_slot = 0.0;       // across episodes
  double mean_discounted = 0.0;
  std::vector<double> curve;       // mean reward per slot
  std::vector<double> episode_totals;
};

struct Metrics {
  std::size_t horizon = 0;
  std::size_t episodes = 0;
  std::vector<PolicyMetrics> policies;

  // (mean_a - mean_b) / mean_b * 100
  double gain_percent(std::size_t a, std::size_t b) const;
  const PolicyMetrics* find(PolicyKind policy) const;
};

Metrics run_monte_carlo(const SystemConfig& config, std::span<const PolicyKind> policies,
                        std::size_t episodes);

// CSV outputs.
void write_episodes_csv(std::ostream& out, const Metrics& metrics);
void write_curve_csv(std::ostream& out, const Metrics& metrics);

struct SummaryRow {
  std::size_t arm_states = 0;
  std::size_t arms = 0;
  double myopic_mean = 0.0;
  double whittle_mean = 0.0;
  double gain_percent = 0.0;
};

SummaryRow summarize(const SystemConfig& config, const Metrics& metrics);
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

}  // namespace rmab
