#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rmab {

using Matrix = Eigen::MatrixXd;

// Row index is the true state i; column index is the observed or next state j.
// P = {p_ij}, E = {eps_ij}, R = {r_ij}, rho = {rho_il}.

enum class ObservationMode {
  GeneralFeedback,
  ObservationOnly,
  RewardOnly,
  ObservationAndReward,
};

std::string_view to_string(ObservationMode mode);
// Accepts the snake_case spelling used in config files ("observation_only").
ObservationMode parse_observation_mode(std::string_view text);

inline constexpr double kStochasticTolerance = 1e-12;
inline constexpr double kRewardMergeTolerance = 1e-9;
inline constexpr double kZeroProbability = 1e-15;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by active_update when the requested feedback cannot occur under the
// given belief.
class ZeroProbabilityOutcome : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A point in the probability simplex over the M physical states of an arm.
///
/// Construction clamps entries in (-1e-12, 0) to zero and renormalizes, so a
/// stored belief always sums to one within rounding. Inputs with larger
/// negative entries, or whose sum is off by more than 1e-9, are rejected.
class Belief {
 public:
  Belief() = default;
  explicit Belief(std::vector<double> entries);

  static Belief unit(std::size_t states, std::size_t index);
  static Belief uniform(std::size_t states);

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  std::span<const double> entries() const { return entries_; }

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  std::vector<double> entries_;
};

double distance(std::span<const double> a, std::span<const double> b);
inline double distance(const Belief& a, const Belief& b) {
  return distance(a.entries(), b.entries());
}

/// Unvalidated arm description as read from a config or produced by the
/// generator. ArmModel is the validated form.
struct ArmSpec {
  Matrix P;
  Matrix E;
  Matrix R;
  std::optional<Matrix> rho;
  ObservationMode mode = ObservationMode::ObservationOnly;

  friend bool operator==(const ArmSpec&, const ArmSpec&) = default;
};

struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

ValidationReport validate_model(const ArmSpec& spec);

class ModelError : public std::invalid_argument {
 public:
  explicit ModelError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// One letter of the feedback alphabet. Which payload fields are set depends
/// on the observation mode: GeneralFeedback sets neither, ObservationOnly sets
/// observed, RewardOnly sets reward, ObservationAndReward sets both.
struct FeedbackLetter {
  std::optional<std::size_t> observed;
  std::optional<double> reward;
};

/// Feedback outcomes are identified by their 0-based position in
/// ArmModel::alphabet(); they select the Bayes branch operator B_{id+1}.
using FeedbackOutcome = std::size_t;

// rho_ir = sum_j 1(r_ij == r) eps_ij, columns ordered by ascending reward value.
Matrix reward_feedback_matrix(const Matrix& E, const Matrix& R);

class ArmModel {
 public:
  // Throws ModelError listing every violated invariant.
  explicit ArmModel(ArmSpec spec);

  std::size_t states() const { return static_cast<std::size_t>(spec_.P.rows()); }
  std::size_t feedback_count() const { return alphabet_.size(); }
  ObservationMode mode() const { return spec_.mode; }

  const ArmSpec& spec() const { return spec_; }
  const Matrix& P() const { return spec_.P; }
  const Matrix& E() const { return spec_.E; }
  const Matrix& R() const { return spec_.R; }

  // M x L matrix whose (i, l) entry multiplied by omega_i gives the posterior
  // weight w_i(l) of the mode's Bayes update.
  const Matrix& feedback_weights() const { return weights_; }
  const std::vector<FeedbackLetter>& alphabet() const { return alphabet_; }

  // Expected one-step active reward conditioned on the true state,
  // sum_j eps_ij r_ij.
  std::span<const double> state_rewards() const { return state_rewards_; }

  // max |r_ij|, the constant C bounding every expected reward.
  double reward_bound() const { return reward_bound_; }

  // Feedback id produced when true state `state` emits observation `observed`
  // with reward r_{state, observed}. Not meaningful for GeneralFeedback, where
  // the feedback is drawn from rho independently of the observation.
  FeedbackOutcome outcome_for(std::size_t state, std::size_t observed) const;

 private:
  ArmSpec spec_;
  Matrix weights_;
  std::vector<FeedbackLetter> alphabet_;
  std::vector<double> state_rewards_;
  std::vector<std::size_t> outcome_table_;  // M*M, row-major (state, observed)
  double reward_bound_ = 0.0;
};

Belief passive_update(const Belief& belief, const ArmModel& model);

std::vector<double> feedback_probabilities(const Belief& belief,
                                           const ArmModel& model);

Belief active_update(const Belief& belief, const ArmModel& model,
                     FeedbackOutcome outcome);

double expected_active_reward(const Belief& belief, const ArmModel& model);

}  // namespace rmab
