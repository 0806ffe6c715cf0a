#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "rmab/belief_space.hpp"
#include "rmab/config.hpp"
#include "rmab/model.hpp"
#include "rmab/pcl.hpp"
#include "rmab/simulator.hpp"

namespace rmab {

/// Model -> approximate space -> kernels -> index table for one arm.
struct ArmPipeline {
  std::shared_ptr<const ArmModel> model;
  std::shared_ptr<const ApproxSpace> space;
  std::shared_ptr<const TransitionKernels> kernels;
  std::shared_ptr<const IndexTable> index;
};

ArmPipeline build_arm_pipeline(const ArmSpec& spec, const Belief& initial, int steps,
                               double epsilon, double beta,
                               const AgOptions& options = {});

/// Runs the pipeline once per arm block; copies of a block share it.
SystemConfig build_system(const ExperimentConfig& config, std::size_t threads = 1);

struct GeneratorOptions {
  ObservationMode mode = ObservationMode::ObservationOnly;
  int steps = 6;
  double epsilon = 1e-3;
  double beta = 0.95;
  double reward_max = 3.0;
  std::size_t max_retries = 100;
  // Reject draws whose approximate space exceeds this many states (0: no cap).
  std::size_t max_states = 0;
  bool perfect_observation = false;  // force E = identity
};

class GenerationExhausted : public std::runtime_error {
 public:
  explicit GenerationExhausted(std::size_t attempts);
  std::size_t attempts() const { return attempts_; }

 private:
  std::size_t attempts_;
};

struct GeneratedArm {
  ArmSpec spec;
  Belief initial;
  std::size_t attempts = 0;
  ArmPipeline pipeline;
};

/// Draws stochastic rows of P and E from a flat distribution followed by
/// normalization, rewards uniform on [0, reward_max] and a flat initial belief,
/// then runs the full pipeline. The draw is returned iff the adaptive-greedy
/// table has fail = false; otherwise it redraws, at most max_retries times.
GeneratedArm generate_instance(std::size_t states, std::uint64_t seed,
                               const GeneratorOptions& options = {});

/// An experiment config with `arms` independently generated arms. When
/// `pipelines` is non-null the per-arm pipeline products are returned too.
ExperimentConfig generate_experiment(std::size_t states, std::size_t arms,
                                     std::uint64_t seed, const GeneratorOptions& options,
                                     std::vector<ArmPipeline>* pipelines = nullptr);

/// SystemConfig over already-built pipelines (one arm each).
SystemConfig system_from_pipelines(const ExperimentConfig& config,
                                   const std::vector<ArmPipeline>& pipelines,
                                   std::size_t threads = 1);

}  // namespace rmab
