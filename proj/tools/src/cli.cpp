#include "rmab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rmab/config.hpp"
#include "rmab/oracle.hpp"
#include "rmab/pipeline.hpp"

namespace rmab::cli {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string policies;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> horizon;
  bool interpolate = false;
  std::size_t threads = 1;
  // generate
  std::size_t states = 3;
  std::size_t arms = 1;
  std::size_t retries = 100;
  std::size_t max_states = 0;
  bool perfect_observation = false;
  // oracle-verify
  std::size_t samples = 20;
  std::size_t bisection_limit = 300;
};

std::ofstream open_output(const Options& o, const char* name) {
  fs::create_directories(o.out);
  const auto path = fs::path(o.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

ExperimentConfig load(const Options& o) {
  auto c = parse_config_file(o.config);
  if (o.seed) c.master_seed = *o.seed;
  if (o.episodes) c.episodes = *o.episodes;
  if (o.horizon) c.horizon = *o.horizon;
  if (!o.policies.empty()) {
    c.policies.clear();
    std::stringstream ss(o.policies);
    std::string item;
    while (std::getline(ss, item, ',')) c.policies.push_back(parse_policy(item));
  }
  validate_config(c);
  return c;
}

// With several arm blocks, files are split into sections headed by "arm,<n>".
void section(std::ostream& f, const ExperimentConfig& c, std::size_t block) {
  if (c.arms.size() > 1) f << "arm," << block + 1 << '\n';
}

int cmd_enumerate(const Options& o, std::ostream& out) {
  const auto c = load(o);
  auto f = open_output(o, "space.txt");
  for (std::size_t b = 0; b < c.arms.size(); ++b) {
    const ArmModel model(c.arms[b].spec);
    const auto space = enumerate_approx(model, c.arms[b].initial, c.steps, c.epsilon);
    out << "arm " << b + 1 << ": letters " << model.feedback_count() << ", levels";
    for (auto s : space.level_sizes) out << ' ' << s;
    out << ", approximate size " << space.size() << ", exact tree count ";
    try {
      out << exact_tree_count(model.feedback_count(), static_cast<std::uint64_t>(c.steps));
    } catch (const std::overflow_error&) {
      out << "overflow";
    }
    out << '\n';
    section(f, c, b);
    write_space(f, space);
  }
  return kExitOk;
}

int cmd_index(const Options& o, std::ostream& out, std::ostream& err) {
  const auto c = load(o);
  auto fs_ = open_output(o, "space.txt");
  auto fk = open_output(o, "kernels.txt");
  auto fi = open_output(o, "index.csv");
  for (std::size_t b = 0; b < c.arms.size(); ++b) {
    const auto p = build_arm_pipeline(c.arms[b].spec, c.arms[b].initial, c.steps,
                                      c.epsilon, c.beta);
    section(fs_, c, b);
    write_space(fs_, *p.space);
    section(fk, c, b);
    write_kernels(fk, *p.kernels);
    section(fi, c, b);
    write_index_table(fi, *p.index);
    out << "arm " << b + 1 << ": " << p.space->size() << " states, fail "
        << (p.index->fail ? 1 : 0) << '\n';
    if (p.index->fail) {
      err << "warning: arm " << b + 1
          << " is not PCL-indexable; its indices are heuristic\n";
    }
  }
  return kExitOk;
}

SystemConfig system_for(const ExperimentConfig& c, const Options& o) {
  auto system = build_system(c, o.threads);
  system.interpolate = o.interpolate;
  return system;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto c = load(o);
  if (c.policies.size() != 1 && !o.policies.empty()) {
    throw std::invalid_argument("simulate runs exactly one policy; use compare for several");
  }
  const PolicyKind policy = c.policies.front();
  const auto system = system_for(c, o);
  const auto metrics = run_monte_carlo(system, std::span(&policy, 1), c.episodes);
  auto fe = open_output(o, "episodes.csv");
  write_episodes_csv(fe, metrics);
  auto fc = open_output(o, "curve.csv");
  write_curve_csv(fc, metrics);
  const auto& m = metrics.policies.front();
  out << to_string(policy) << ": mean per slot " << fmt(m.mean_per_slot) << ", std "
      << fmt(m.std_per_slot) << '\n';
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto c = load(o);
  const auto system = system_for(c, o);
  const auto metrics = run_monte_carlo(system, c.policies, c.episodes);
  auto fe = open_output(o, "episodes.csv");
  write_episodes_csv(fe, metrics);
  auto fc = open_output(o, "curve.csv");
  write_curve_csv(fc, metrics);
  for (const auto& m : metrics.policies) {
    out << to_string(m.policy) << ": mean per slot " << fmt(m.mean_per_slot) << ", std "
        << fmt(m.std_per_slot) << '\n';
  }
  if (metrics.find(PolicyKind::Whittle) && metrics.find(PolicyKind::Myopic)) {
    const SummaryRow row = summarize(system, metrics);
    auto fs_ = open_output(o, "summary.csv");
    write_summary_csv(fs_, std::span(&row, 1));
    out << "gain " << fmt(row.gain_percent) << "%\n";
  }
  return kExitOk;
}

std::vector<CheckResult> verify_arm(const ArmPipeline& p, std::size_t block,
                                    std::uint64_t seed, const Options& o) {
  const auto& k = *p.kernels;
  const auto& table = *p.index;
  const std::size_t n = k.size();
  const std::string tag = "arm" + std::to_string(block + 1) + ".";
  std::vector<CheckResult> checks;
  auto add = [&](const std::string& name, double value, double threshold) {
    checks.push_back({tag + name, value, threshold, value <= threshold});
  };

  checks.push_back({tag + "pcl_indexable", table.fail ? 1.0 : 0.0, 0.0, !table.fail});
  add("ag_chain_identity", check_ag_chain(k, table), kIdentityTolerance);
  add("ag_cross_identity", check_ag_cross_identity(k, table), kIdentityTolerance);

  std::mt19937_64 gen(seed + block);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  double work = 0.0, reward = 0.0, time = 0.0;
  const double horizon = 1.0 / (1.0 - k.beta);
  for (std::size_t s = 0; s < o.samples; ++s) {
    StateSet omega(n), policy(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (coin(gen)) omega.insert(i);
      if (coin(gen)) policy.insert(i);
    }
    const std::size_t initial = pick(gen);
    const auto r = check_decomposition(k, omega, policy, initial);
    work = std::max(work, r.work);
    reward = std::max(reward, r.reward);
    const auto e = policy_evaluate(k, policy, initial);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += e.x1[i] + e.x0[i];
    time = std::max(time, std::abs(total - horizon));
  }
  add("decomposition_work", work, kIdentityTolerance);
  add("decomposition_reward", reward, kIdentityTolerance);
  add("time_conservation", time, 1e-10);

  if (!table.fail && n <= o.bisection_limit) {
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gap = std::max(gap, std::abs(table.gamma[i] - whittle_bisection(k, i)));
    }
    add("ag_vs_bisection", gap, 1e-6);
    const auto grid = subsidy_grid(k, 200);
    const bool nested = check_indexability_monotone(k, grid);
    checks.push_back({tag + "passive_set_nesting", nested ? 0.0 : 1.0, 0.0, nested});
  }
  return checks;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const auto c = load(o);
  std::vector<CheckResult> checks;
  for (std::size_t b = 0; b < c.arms.size(); ++b) {
    const auto p = build_arm_pipeline(c.arms[b].spec, c.arms[b].initial, c.steps,
                                      c.epsilon, c.beta);
    auto arm = verify_arm(p, b, c.master_seed, o);
    checks.insert(checks.end(), arm.begin(), arm.end());
  }
  auto f = open_output(o, "verify.txt");
  write_verification_report(f, checks);
  write_verification_report(out, checks);
  const bool ok = std::all_of(checks.begin(), checks.end(),
                              [](const CheckResult& r) { return r.passed; });
  return ok ? kExitOk : kExitVerification;
}

int cmd_generate(const Options& o, std::ostream& out) {
  GeneratorOptions g;
  g.max_retries = o.retries;
  g.max_states = o.max_states;
  g.perfect_observation = o.perfect_observation;
  const std::uint64_t seed = o.seed.value_or(0);
  std::vector<ArmPipeline> pipelines;
  auto c = generate_experiment(o.states, o.arms, seed, g, &pipelines);
  if (o.episodes) c.episodes = *o.episodes;
  if (o.horizon) c.horizon = *o.horizon;
  auto f = open_output(o, "config.txt");
  write_config(f, c);
  for (std::size_t a = 0; a < pipelines.size(); ++a) {
    out << "arm " << a + 1 << ": " << pipelines[a].space->size() << " states\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Whittle index computation and simulation for partially observed restless bandits",
               "rmab"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config, "experiment config file");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "overrides master_seed");
  };
  auto simulation = [&](CLI::App* sub) {
    sub->add_option("--policies", o.policies, "comma-separated: whittle,myopic,random");
    sub->add_option("--episodes", o.episodes);
    sub->add_option("--horizon", o.horizon);
    sub->add_flag("--interpolate", o.interpolate, "interpolate index between neighbours");
    sub->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
  };

  auto* enumerate = app.add_subcommand("enumerate", "approximate belief space statistics");
  common(enumerate, true);
  auto* index = app.add_subcommand("index", "space, kernels and index table");
  common(index, true);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of one policy");
  common(simulate, true);
  simulation(simulate);
  auto* compare = app.add_subcommand("compare", "paired comparison of policies");
  common(compare, true);
  simulation(compare);
  auto* verify = app.add_subcommand("oracle-verify", "identity and cross-oracle checks");
  common(verify, true);
  verify->add_option("--samples", o.samples, "random decomposition triples per arm");
  verify->add_option("--bisection-limit", o.bisection_limit,
                     "skip bisection checks above this many states");
  auto* generate = app.add_subcommand("generate", "random PCL-indexable instance");
  common(generate, false);
  generate->add_option("--states", o.states, "physical states per arm")
      ->check(CLI::Range(2, 1000));
  generate->add_option("--arms", o.arms)->check(CLI::PositiveNumber);
  generate->add_option("--retries", o.retries, "redraw bound");
  generate->add_option("--max-states", o.max_states, "reject larger spaces (0: no cap)");
  generate->add_flag("--perfect-observation", o.perfect_observation, "E = identity");
  generate->add_option("--episodes", o.episodes);
  generate->add_option("--horizon", o.horizon);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (*enumerate) return cmd_enumerate(o, out);
    if (*index) return cmd_index(o, out, err);
    if (*simulate) return cmd_simulate(o, out);
    if (*compare) return cmd_compare(o, out);
    if (*verify) {
      const int code = cmd_verify(o, out);
      if (code != kExitOk) err << "verification failed\n";
      return code;
    }
    if (*generate) return cmd_generate(o, out);
  } catch (const GenerationExhausted& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace rmab::cli
