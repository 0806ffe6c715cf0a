#include "rmab/pipeline.hpp"

#include <random>
#include <string>

namespace rmab {

ArmPipeline build_arm_pipeline(const ArmSpec& spec, const Belief& initial, int steps,
                               double epsilon, double beta, const AgOptions& options) {
  ArmPipeline p;
  auto model = std::make_shared<const ArmModel>(spec);
  auto space = std::make_shared<const ApproxSpace>(
      enumerate_approx(*model, initial, steps, epsilon));
  auto kernels = std::make_shared<const TransitionKernels>(
      build_kernels(*space, *model, beta));
  p.index = std::make_shared<const IndexTable>(adaptive_greedy(*kernels, options));
  p.model = std::move(model);
  p.space = std::move(space);
  p.kernels = std::move(kernels);
  return p;
}

namespace {

SystemConfig base_system(const ExperimentConfig& config, std::size_t threads) {
  SystemConfig system;
  system.activations = config.activations;
  system.horizon = config.horizon;
  system.episodes = config.episodes;
  system.beta = config.beta;
  system.master_seed = config.master_seed;
  system.threads = threads;
  return system;
}

}  // namespace

SystemConfig build_system(const ExperimentConfig& config, std::size_t threads) {
  validate_config(config);
  SystemConfig system = base_system(config, threads);
  for (const auto& arm : config.arms) {
    const auto p = build_arm_pipeline(arm.spec, arm.initial, config.steps, config.epsilon,
                                      config.beta);
    for (std::size_t c = 0; c < arm.count; ++c) {
      system.arms.push_back({p.model, arm.initial, p.space, p.kernels, p.index});
    }
  }
  validate_system(system);
  return system;
}

SystemConfig system_from_pipelines(const ExperimentConfig& config,
                                   const std::vector<ArmPipeline>& pipelines,
                                   std::size_t threads) {
  if (pipelines.size() != config.arms.size()) {
    throw std::invalid_argument("one pipeline per arm block expected");
  }
  SystemConfig system = base_system(config, threads);
  for (std::size_t a = 0; a < config.arms.size(); ++a) {
    const auto& p = pipelines[a];
    for (std::size_t c = 0; c < config.arms[a].count; ++c) {
      system.arms.push_back({p.model, config.arms[a].initial, p.space, p.kernels, p.index});
    }
  }
  validate_system(system);
  return system;
}

GenerationExhausted::GenerationExhausted(std::size_t attempts)
    : std::runtime_error("no PCL-indexable instance after " + std::to_string(attempts) +
                         " attempts"),
      attempts_(attempts) {}

namespace {

// Explicit 53-bit conversion keeps draws identical across standard libraries.
double flat(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

Matrix stochastic_rows(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = flat(gen);
      sum += m(i, j);
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) /= sum;
  }
  return m;
}

}  // namespace

GeneratedArm generate_instance(std::size_t states, std::uint64_t seed,
                               const GeneratorOptions& options) {
  if (states < 2) throw std::invalid_argument("generated arms need at least 2 states");
  std::mt19937_64 gen(seed);
  const auto m = static_cast<Eigen::Index>(states);

  for (std::size_t attempt = 1; attempt <= options.max_retries + 1; ++attempt) {
    ArmSpec spec;
    spec.mode = options.mode;
    spec.P = stochastic_rows(gen, states, states);
    spec.E = options.perfect_observation ? Matrix(Matrix::Identity(m, m))
                                         : stochastic_rows(gen, states, states);
    spec.R = Matrix(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) spec.R(i, j) = options.reward_max * flat(gen);
    }
    if (options.mode == ObservationMode::GeneralFeedback) {
      spec.rho = stochastic_rows(gen, states, states);
    }
    std::vector<double> w(states);
    double sum = 0.0;
    for (auto& v : w) sum += (v = flat(gen));
    for (auto& v : w) v /= sum;
    Belief initial(std::move(w));

    // Size check before the O(S^3) index computation.
    auto model = std::make_shared<const ArmModel>(spec);
    auto space = std::make_shared<const ApproxSpace>(
        enumerate_approx(*model, initial, options.steps, options.epsilon));
    if (options.max_states != 0 && space->size() > options.max_states) continue;
    auto kernels = std::make_shared<const TransitionKernels>(
        build_kernels(*space, *model, options.beta));
    std::shared_ptr<const IndexTable> table;
    AgOptions ag;
    ag.stop_on_fail = true;  // a failing draw is discarded anyway
    try {
      table = std::make_shared<const IndexTable>(adaptive_greedy(*kernels, ag));
    } catch (const DivisionByNearZero&) {
      continue;
    }
    if (table->fail) continue;

    GeneratedArm out{std::move(spec), std::move(initial), attempt, {}};
    out.pipeline = {std::move(model), std::move(space), std::move(kernels), std::move(table)};
    return out;
  }
  throw GenerationExhausted(options.max_retries + 1);
}

ExperimentConfig generate_experiment(std::size_t states, std::size_t arms,
                                     std::uint64_t seed, const GeneratorOptions& options,
                                     std::vector<ArmPipeline>* pipelines) {
  ExperimentConfig config;
  config.beta = options.beta;
  config.steps = options.steps;
  config.epsilon = options.epsilon;
  config.master_seed = seed;
  std::mt19937_64 seeds(seed);
  for (std::size_t n = 0; n < arms; ++n) {
    auto arm = generate_instance(states, seeds(), options);
    config.arms.push_back({std::move(arm.spec), std::move(arm.initial), 1});
    if (pipelines) pipelines->push_back(std::move(arm.pipeline));
  }
  return config;
}

}  // namespace rmab
