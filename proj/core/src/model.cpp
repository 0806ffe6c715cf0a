#include "rmab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace rmab {

namespace {

// Group reward cells into letters: two values share a letter iff they lie within
// kRewardMergeTolerance of the smallest value of the group.
struct RewardGroups {
  std::vector<double> values;       // representative per group, ascending
  std::vector<std::size_t> cell;    // group id per cell, row-major
};

RewardGroups group_rewards(const Matrix& R) {
  const auto rows = static_cast<std::size_t>(R.rows());
  const auto cols = static_cast<std::size_t>(R.cols());
  std::vector<std::pair<double, std::size_t>> cells;
  cells.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      cells.emplace_back(R(i, j), i * cols + j);
    }
  }
  std::sort(cells.begin(), cells.end());

  RewardGroups groups;
  groups.cell.assign(rows * cols, 0);
  for (const auto& [value, index] : cells) {
    if (groups.values.empty() ||
        value - groups.values.back() > kRewardMergeTolerance) {
      groups.values.push_back(value);
    }
    groups.cell[index] = groups.values.size() - 1;
  }
  return groups;
}

std::string format_number(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

void check_stochastic(const Matrix& m, std::string_view name,
                      std::vector<std::string>& issues) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    bool finite = true;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) {
        finite = false;
        issues.push_back(std::string(name) + "(" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ") is not finite");
        continue;
      }
      if (v < 0.0) {
        issues.push_back(std::string(name) + "(" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ") = " + format_number(v) +
                         " is negative");
      }
      sum += v;
    }
    if (finite && std::abs(sum - 1.0) > kStochasticTolerance) {
      issues.push_back("row " + std::to_string(i + 1) + " of " +
                       std::string(name) + " sums to " + format_number(sum));
    }
  }
}

}  // namespace

std::string_view to_string(ObservationMode mode) {
  switch (mode) {
    case ObservationMode::GeneralFeedback: return "general_feedback";
    case ObservationMode::ObservationOnly: return "observation_only";
    case ObservationMode::RewardOnly: return "reward_only";
    case ObservationMode::ObservationAndReward: return "observation_and_reward";
  }
  return "unknown";
}

ObservationMode parse_observation_mode(std::string_view text) {
  for (auto mode : {ObservationMode::GeneralFeedback,
                    ObservationMode::ObservationOnly, ObservationMode::RewardOnly,
                    ObservationMode::ObservationAndReward}) {
    if (text == to_string(mode)) return mode;
  }
  throw std::invalid_argument("unknown observation mode '" + std::string(text) +
                              "'");
}

Belief::Belief(std::vector<double> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("belief has no entries");
  bool clamped = false;
  for (double& v : entries_) {
    if (!std::isfinite(v) || v <= -kStochasticTolerance) {
      throw std::invalid_argument("belief entry " + format_number(v) +
                                  " is outside the simplex");
    }
    if (v < 0.0) {
      v = 0.0;
      clamped = true;
    }
  }
  const double sum = std::accumulate(entries_.begin(), entries_.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("belief entries sum to " + format_number(sum));
  }
  // A vector that already sums to one up to rounding is stored untouched, so
  // reloading a serialized belief reproduces it bit for bit.
  if (clamped || std::abs(sum - 1.0) > 1e-14) {
    for (double& v : entries_) v /= sum;
  }
}

Belief Belief::unit(std::size_t states, std::size_t index) {
  std::vector<double> v(states, 0.0);
  v.at(index) = 1.0;
  return Belief(std::move(v));
}

Belief Belief::uniform(std::size_t states) {
  return Belief(std::vector<double>(states, 1.0 / static_cast<double>(states)));
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("distance between beliefs of different size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += issue;
  }
  return out;
}

ValidationReport validate_model(const ArmSpec& spec) {
  ValidationReport report;
  auto& issues = report.issues;

  const auto m = spec.P.rows();
  if (m < 1 || spec.P.cols() != m) {
    issues.push_back("P must be a non-empty square matrix");
    return report;
  }
  if (spec.E.rows() != m || spec.E.cols() != m) {
    issues.push_back("E must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  if (spec.R.rows() != m || spec.R.cols() != m) {
    issues.push_back("R must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  if (!issues.empty()) return report;

  check_stochastic(spec.P, "P", issues);
  check_stochastic(spec.E, "E", issues);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!std::isfinite(spec.R(i, j))) {
        issues.push_back("R(" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ") is not finite");
      }
    }
  }

  if (spec.mode == ObservationMode::GeneralFeedback) {
    if (!spec.rho) {
      issues.push_back("general_feedback mode requires a rho matrix");
    } else if (spec.rho->rows() != m || spec.rho->cols() < 1) {
      issues.push_back("rho must have " + std::to_string(m) +
                       " rows and at least one column");
    } else {
      check_stochastic(*spec.rho, "rho", issues);
    }
  } else if (spec.rho) {
    issues.push_back("rho is only allowed in general_feedback mode");
  }
  return report;
}

ModelError::ModelError(ValidationReport report)
    : std::invalid_argument("invalid arm model: " + report.to_string()),
      report_(std::move(report)) {}

Matrix reward_feedback_matrix(const Matrix& E, const Matrix& R) {
  const auto groups = group_rewards(R);
  const auto m = static_cast<std::size_t>(E.rows());
  Matrix rho = Matrix::Zero(E.rows(), static_cast<Eigen::Index>(groups.values.size()));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto g = static_cast<Eigen::Index>(groups.cell[i * m + j]);
      rho(static_cast<Eigen::Index>(i), g) += E(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(j));
    }
  }
  return rho;
}

ArmModel::ArmModel(ArmSpec spec) : spec_(std::move(spec)) {
  auto report = validate_model(spec_);
  if (!report.ok()) throw ModelError(std::move(report));

  const std::size_t m = states();
  const auto mi = static_cast<Eigen::Index>(m);
  outcome_table_.assign(m * m, std::numeric_limits<std::size_t>::max());

  switch (spec_.mode) {
    case ObservationMode::GeneralFeedback: {
      weights_ = *spec_.rho;
      alphabet_.resize(static_cast<std::size_t>(weights_.cols()));
      break;
    }
    case ObservationMode::ObservationOnly: {
      weights_ = spec_.E;
      for (std::size_t j = 0; j < m; ++j) alphabet_.push_back({j, std::nullopt});
      for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t j = 0; j < m; ++j) outcome_table_[s * m + j] = j;
      }
      break;
    }
    case ObservationMode::RewardOnly: {
      const auto groups = group_rewards(spec_.R);
      weights_ = reward_feedback_matrix(spec_.E, spec_.R);
      for (double r : groups.values) alphabet_.push_back({std::nullopt, r});
      outcome_table_ = groups.cell;
      break;
    }
    case ObservationMode::ObservationAndReward: {
      const auto groups = group_rewards(spec_.R);
      // Letters ordered by observed state, then by reward value.
      std::vector<std::vector<std::size_t>> letter_of(m);
      std::vector<std::pair<std::size_t, std::size_t>> letters;  // (j, group)
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::size_t> present;
        for (std::size_t i = 0; i < m; ++i) present.push_back(groups.cell[i * m + j]);
        std::sort(present.begin(), present.end());
        present.erase(std::unique(present.begin(), present.end()), present.end());
        letter_of[j].assign(groups.values.size(), 0);
        for (std::size_t g : present) {
          letter_of[j][g] = letters.size();
          letters.emplace_back(j, g);
          alphabet_.push_back({j, groups.values[g]});
        }
      }
      weights_ = Matrix::Zero(mi, static_cast<Eigen::Index>(letters.size()));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t l = letter_of[j][groups.cell[i * m + j]];
          weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) =
              spec_.E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          outcome_table_[i * m + j] = l;
        }
      }
      break;
    }
  }

  state_rewards_.assign(m, 0.0);
  for (Eigen::Index i = 0; i < mi; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < mi; ++j) sum += spec_.E(i, j) * spec_.R(i, j);
    state_rewards_[static_cast<std::size_t>(i)] = sum;
  }
  reward_bound_ = spec_.R.cwiseAbs().maxCoeff();
}

FeedbackOutcome ArmModel::outcome_for(std::size_t state, std::size_t observed) const {
  const std::size_t m = states();
  if (state >= m || observed >= m) throw DimensionMismatch("state out of range");
  return outcome_table_[state * m + observed];
}

namespace {

void require_dimension(const Belief& belief, const ArmModel& model) {
  if (belief.size() != model.states()) {
    throw DimensionMismatch("belief has " + std::to_string(belief.size()) +
                            " entries but the model has " +
                            std::to_string(model.states()) + " states");
  }
}

}  // namespace

Belief passive_update(const Belief& belief, const ArmModel& model) {
  require_dimension(belief, model);
  const std::size_t m = model.states();
  const Matrix& P = model.P();
  std::vector<double> next(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = belief[i];
    for (std::size_t k = 0; k < m; ++k) {
      next[k] += w * P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  }
  return Belief(std::move(next));
}

std::vector<double> feedback_probabilities(const Belief& belief,
                                           const ArmModel& model) {
  require_dimension(belief, model);
  const Matrix& W = model.feedback_weights();
  const std::size_t m = model.states();
  std::vector<double> q(model.feedback_count(), 0.0);
  for (std::size_t l = 0; l < q.size(); ++l) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum += W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) * belief[i];
    }
    q[l] = sum;
  }
  return q;
}

Belief active_update(const Belief& belief, const ArmModel& model,
                     FeedbackOutcome outcome) {
  require_dimension(belief, model);
  if (outcome >= model.feedback_count()) {
    throw DimensionMismatch("feedback id " + std::to_string(outcome) +
                            " outside alphabet of size " +
                            std::to_string(model.feedback_count()));
  }
  const std::size_t m = model.states();
  const Matrix& W = model.feedback_weights();
  const Matrix& P = model.P();
  const auto l = static_cast<Eigen::Index>(outcome);

  std::vector<double> weight(m);
  double denominator = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    weight[i] = W(static_cast<Eigen::Index>(i), l) * belief[i];
    denominator += weight[i];
  }
  if (denominator <= kZeroProbability) {
    throw ZeroProbabilityOutcome("feedback " + std::to_string(outcome) +
                                 " has probability " + format_number(denominator) +
                                 " under the current belief");
  }

  std::vector<double> next(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum += P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * weight[i];
    }
    next[k] = sum / denominator;
  }
  return Belief(std::move(next));
}

double expected_active_reward(const Belief& belief, const ArmModel& model) {
  require_dimension(belief, model);
  const auto r = model.state_rewards();
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += belief[i] * r[i];
  return sum;
}

}  // namespace rmab
