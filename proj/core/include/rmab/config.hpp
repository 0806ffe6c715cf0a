#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmab/model.hpp"
#include "rmab/simulator.hpp"

namespace rmab {

struct ArmConfig {
  ArmSpec spec;
  Belief initial;
  std::size_t count = 1;  // identical copies of this arm

  friend bool operator==(const ArmConfig&, const ArmConfig&) = default;
};

struct ExperimentConfig {
  double beta = 0.95;
  int steps = 6;
  double epsilon = 1e-3;
  std::size_t activations = 1;
  std::size_t horizon = 200;
  std::size_t episodes = 10000;
  std::uint64_t master_seed = 0;
  std::vector<PolicyKind> policies{PolicyKind::Whittle, PolicyKind::Myopic};
  std::vector<ArmConfig> arms;

  std::size_t arm_count() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config text, one directive per line, '#' starts a comment:
//
//   beta 0.95
//   T_steps 6
//   epsilon 0.001
//   K 1
//   horizon 200
//   episodes 10000
//   master_seed 42
//   policies whittle,myopic
//
//   arm
//     mode observation_only
//     count 1
//     initial_belief 0.6 0.4
//     P
//       0.8 0.2
//       0.2 0.8
//     E
//       ...
//     R
//       ...
//   end
//
// A general_feedback arm adds a `rho` block. Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::filesystem::path& path);
void validate_config(const ExperimentConfig& config);
void write_config(std::ostream& out, const ExperimentConfig& config);

}  // namespace rmab
