#include "rmab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "text_io.hpp"

namespace rmab {

std::string_view to_string(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::Whittle: return "whittle";
    case PolicyKind::Myopic: return "myopic";
    case PolicyKind::Random: return "random";
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view text) {
  for (auto p : {PolicyKind::Whittle, PolicyKind::Myopic, PolicyKind::Random}) {
    if (text == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown policy '" + std::string(text) + "'");
}

void validate_system(const SystemConfig& c) {
  if (c.arms.empty()) throw std::invalid_argument("system has no arms");
  if (c.activations < 1 || c.activations > c.arms.size()) {
    throw std::invalid_argument("K must satisfy 1 <= K <= number of arms");
  }
  if (c.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (!(c.beta >= 0.0 && c.beta < 1.0)) {
    throw std::invalid_argument("discount factor must lie in [0, 1)");
  }
  for (std::size_t n = 0; n < c.arms.size(); ++n) {
    const auto& a = c.arms[n];
    if (!a.model || !a.space || !a.kernels || !a.index) {
      throw std::invalid_argument("arm " + std::to_string(n) + " is incomplete");
    }
    if (a.space->size() != a.kernels->size() || a.index->size() != a.space->size()) {
      throw std::invalid_argument("arm " + std::to_string(n) +
                                  " has inconsistent space, kernels and index sizes");
    }
    if (a.initial.size() != a.model->states()) {
      throw std::invalid_argument("arm " + std::to_string(n) +
                                  " initial belief has the wrong dimension");
    }
  }
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

std::vector<std::size_t> myopic_action(std::span<const Belief> beliefs,
                                       std::span<const ArmModel* const> models,
                                       std::size_t k) {
  if (beliefs.size() != models.size()) throw DimensionMismatch("one model per arm");
  std::vector<double> scores(beliefs.size());
  for (std::size_t n = 0; n < beliefs.size(); ++n) {
    scores[n] = expected_active_reward(beliefs[n], *models[n]);
  }
  return top_k(scores, k);
}

std::vector<std::size_t> whittle_action(std::span<const Belief> beliefs,
                                        std::span<const ApproxSpace* const> spaces,
                                        std::span<const IndexTable* const> tables,
                                        std::size_t k) {
  if (beliefs.size() != spaces.size() || beliefs.size() != tables.size()) {
    throw DimensionMismatch("one space and one index table per arm");
  }
  std::vector<double> scores(beliefs.size());
  for (std::size_t n = 0; n < beliefs.size(); ++n) {
    scores[n] = tables[n]->gamma.at(project(beliefs[n], *spaces[n]));
  }
  return top_k(scores, k);
}

namespace {

enum class Stream : std::uint64_t { Initial = 1, Observation, Feedback, Transition, Policy };

constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t episode, std::uint64_t arm,
                 std::uint64_t slot, Stream stream) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ episode);
  h = mix(h ^ arm);
  h = mix(h ^ slot);
  h = mix(h ^ static_cast<std::uint64_t>(stream));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

template <typename Row>
std::size_t sample_row(const Row& row, std::size_t size, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < size; ++j) {
    const double p = row(static_cast<Eigen::Index>(j));
    if (p <= 0.0) continue;
    last_positive = j;
    cumulative += p;
    if (u < cumulative) return j;
  }
  return last_positive;
}

double interpolated_index(const Belief& belief, const ApproxSpace& space,
                          const IndexTable& table) {
  std::size_t first = 0;
  std::size_t second = 0;
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = d1;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double d = distance(belief, space.states[i]);
    if (d < d1) {
      second = first;
      d2 = d1;
      first = i;
      d1 = d;
    } else if (d < d2) {
      second = i;
      d2 = d;
    }
  }
  if (d1 == 0.0 || !std::isfinite(d2)) return table.gamma[first];
  const double w1 = 1.0 / d1;
  const double w2 = 1.0 / d2;
  return (w1 * table.gamma[first] + w2 * table.gamma[second]) / (w1 + w2);
}

}  // namespace

EpisodeTrace simulate_episode(const SystemConfig& c, PolicyKind policy,
                              std::uint64_t episode, bool details) {
  const std::size_t arms = c.arms.size();
  EpisodeTrace trace;
  trace.slot_rewards.assign(c.horizon, 0.0);
  if (details) {
    trace.chosen.reserve(c.horizon);
    trace.true_states.reserve(c.horizon);
    trace.arm_rewards.reserve(c.horizon);
  }

  std::vector<std::size_t> true_state(arms);
  std::vector<std::size_t> tracked(arms, ApproxSpace::origin);
  std::vector<Belief> exact;
  for (std::size_t n = 0; n < arms; ++n) {
    const auto& initial = c.arms[n].initial;
    const double u = uniform01(c.master_seed, episode, n, 0, Stream::Initial);
    double cumulative = 0.0;
    std::size_t s = 0;
    for (std::size_t i = 0; i < initial.size(); ++i) {
      if (initial[i] <= 0.0) continue;
      s = i;
      cumulative += initial[i];
      if (u < cumulative) break;
    }
    true_state[n] = s;
    if (c.interpolate) exact.push_back(initial);
  }

  std::vector<double> scores(arms);
  std::vector<char> active(arms);
  double discount = 1.0;
  for (std::size_t t = 0; t < c.horizon; ++t) {
    for (std::size_t n = 0; n < arms; ++n) {
      const auto& arm = c.arms[n];
      switch (policy) {
        case PolicyKind::Whittle:
          scores[n] = c.interpolate ? interpolated_index(exact[n], *arm.space, *arm.index)
                                    : arm.index->gamma[tracked[n]];
          break;
        case PolicyKind::Myopic:
          scores[n] = c.interpolate ? expected_active_reward(exact[n], *arm.model)
                                    : arm.kernels->rewards[tracked[n]];
          break;
        case PolicyKind::Random:
          scores[n] = uniform01(c.master_seed, episode, n, t, Stream::Policy);
          break;
      }
    }
    std::fill(active.begin(), active.end(), 0);
    for (auto n : top_k(scores, c.activations)) active[n] = 1;

    if (details) {
      std::vector<std::size_t> chosen;
      for (std::size_t n = 0; n < arms; ++n) {
        if (active[n]) chosen.push_back(n);
      }
      trace.chosen.push_back(std::move(chosen));
      trace.true_states.push_back(true_state);
      trace.arm_rewards.emplace_back(arms, 0.0);
    }

    double slot_reward = 0.0;
    for (std::size_t n = 0; n < arms; ++n) {
      const auto& arm = c.arms[n];
      const auto& model = *arm.model;
      const std::size_t m = model.states();
      const std::size_t s = true_state[n];
      const auto si = static_cast<Eigen::Index>(s);

      if (active[n]) {
        const double u_obs = uniform01(c.master_seed, episode, n, t, Stream::Observation);
        const std::size_t observed = sample_row(model.E().row(si), m, u_obs);
        const double reward = model.R()(si, static_cast<Eigen::Index>(observed));
        FeedbackOutcome outcome = 0;
        if (model.mode() == ObservationMode::GeneralFeedback) {
          const auto& rho = *model.spec().rho;
          const double u_fb = uniform01(c.master_seed, episode, n, t, Stream::Feedback);
          outcome = sample_row(rho.row(si), static_cast<std::size_t>(rho.cols()), u_fb);
        } else {
          outcome = model.outcome_for(s, observed);
        }

        if (c.interpolate) {
          exact[n] = active_update(exact[n], model, outcome);
        } else {
          const auto next = arm.kernels->successors[tracked[n]][outcome];
          if (next == kImpossibleOutcome) {
            throw std::logic_error("sampled feedback has zero probability under the "
                                   "tracked belief of arm " + std::to_string(n));
          }
          tracked[n] = static_cast<std::size_t>(next);
        }
        slot_reward += reward;
        if (details) trace.arm_rewards.back()[n] = reward;
      } else if (c.interpolate) {
        exact[n] = passive_update(exact[n], model);
      } else {
        tracked[n] = arm.kernels->passive[tracked[n]];
      }

      const double u_tr = uniform01(c.master_seed, episode, n, t, Stream::Transition);
      true_state[n] = sample_row(model.P().row(si), m, u_tr);
    }

    trace.slot_rewards[t] = slot_reward;
    trace.total_reward += slot_reward;
    trace.discounted_reward += discount * slot_reward;
    discount *= c.beta;
  }
  return trace;
}

double Metrics::gain_percent(std::size_t a, std::size_t b) const {
  const double base = policies.at(b).mean_per_slot;
  return (policies.at(a).mean_per_slot - base) / base * 100.0;
}

const PolicyMetrics* Metrics::find(PolicyKind policy) const {
  for (const auto& p : policies) {
    if (p.policy == policy) return &p;
  }
  return nullptr;
}

Metrics run_monte_carlo(const SystemConfig& c, std::span<const PolicyKind> policies,
                        std::size_t episodes) {
  validate_system(c);
  if (episodes < 1) throw std::invalid_argument("episodes must be at least 1");

  Metrics metrics;
  metrics.horizon = c.horizon;
  metrics.episodes = episodes;
  const std::size_t workers = std::max<std::size_t>(1, std::min(c.threads, episodes));

  for (const PolicyKind policy : policies) {
    // Per-episode results land in fixed slots and are reduced in episode
    // order afterwards, so the thread count never changes the output.
    std::vector<std::vector<double>> slot_rewards(episodes);
    std::vector<double> discounted(episodes);
    auto work = [&](std::size_t worker) {
      for (std::size_t e = worker; e < episodes; e += workers) {
        auto trace = simulate_episode(c, policy, e, false);
        slot_rewards[e] = std::move(trace.slot_rewards);
        discounted[e] = trace.discounted_reward;
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    PolicyMetrics pm;
    pm.policy = policy;
    pm.curve.assign(c.horizon, 0.0);
    pm.episode_totals.resize(episodes);
    std::vector<double> per_slot(episodes);
    for (std::size_t e = 0; e < episodes; ++e) {
      double total = 0.0;
      for (std::size_t t = 0; t < c.horizon; ++t) {
        total += slot_rewards[e][t];
        pm.curve[t] += slot_rewards[e][t];
      }
      pm.episode_totals[e] = total;
      per_slot[e] = total / static_cast<double>(c.horizon);
      pm.mean_discounted += discounted[e];
    }
    const auto count = static_cast<double>(episodes);
    for (double& v : pm.curve) v /= count;
    pm.mean_discounted /= count;
    pm.mean_per_slot = std::accumulate(per_slot.begin(), per_slot.end(), 0.0) / count;
    if (episodes > 1) {
      double ss = 0.0;
      for (double v : per_slot) ss += (v - pm.mean_per_slot) * (v - pm.mean_per_slot);
      pm.std_per_slot = std::sqrt(ss / (count - 1.0));
    }
    metrics.policies.push_back(std::move(pm));
  }
  return metrics;
}

void write_episodes_csv(std::ostream& out, const Metrics& m) {
  out << "policy,episode,total_reward,mean_per_slot\n";
  for (const auto& p : m.policies) {
    for (std::size_t e = 0; e < p.episode_totals.size(); ++e) {
      out << to_string(p.policy) << ',' << e << ','
          << detail::format_double(p.episode_totals[e]) << ','
          << detail::format_double(p.episode_totals[e] / static_cast<double>(m.horizon))
          << '\n';
    }
  }
}

void write_curve_csv(std::ostream& out, const Metrics& m) {
  out << "slot,policy,mean_reward\n";
  for (std::size_t t = 0; t < m.horizon; ++t) {
    for (const auto& p : m.policies) {
      out << t + 1 << ',' << to_string(p.policy) << ',' << detail::format_double(p.curve[t])
          << '\n';
    }
  }
}

SummaryRow summarize(const SystemConfig& c, const Metrics& m) {
  const auto* whittle = m.find(PolicyKind::Whittle);
  const auto* myopic = m.find(PolicyKind::Myopic);
  if (!whittle || !myopic) {
    throw std::invalid_argument("summary needs both whittle and myopic results");
  }
  SummaryRow row;
  for (const auto& a : c.arms) row.arm_states = std::max(row.arm_states, a.model->states());
  row.arms = c.arms.size();
  row.myopic_mean = myopic->mean_per_slot;
  row.whittle_mean = whittle->mean_per_slot;
  row.gain_percent = (row.whittle_mean - row.myopic_mean) / row.myopic_mean * 100.0;
  return row;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "arm_states,arms,myopic_mean,whittle_mean,gain_percent\n";
  for (const auto& r : rows) {
    out << r.arm_states << ',' << r.arms << ',' << detail::format_double(r.myopic_mean)
        << ',' << detail::format_double(r.whittle_mean) << ','
        << detail::format_double(r.gain_percent) << '\n';
  }
}

}  // namespace rmab
