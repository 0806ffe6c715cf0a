#include "rmab/belief_space.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "text_io.hpp"

namespace rmab {

std::uint64_t exact_tree_count(std::uint64_t letters, std::uint64_t steps) {
  if (letters < 1) throw std::invalid_argument("feedback alphabet must be non-empty");
  // sum_{t=0}^{T} (L+1)^t, which equals ((L+1)^(T+1) - 1) / L without the
  // intermediate overflow of the closed form.
  std::uint64_t total = 0;
  std::uint64_t level = 1;
  for (std::uint64_t t = 0; t <= steps; ++t) {
    if (__builtin_add_overflow(total, level, &total)) {
      throw std::overflow_error("belief tree count exceeds 64 bits");
    }
    if (t < steps && __builtin_mul_overflow(level, letters + 1, &level)) {
      throw std::overflow_error("belief tree count exceeds 64 bits");
    }
  }
  return total;
}

namespace {

bool far_from_all(const Belief& candidate, const std::vector<Belief>& states,
                  double epsilon) {
  for (const auto& s : states) {
    if (distance(candidate, s) <= epsilon) return false;
  }
  return true;
}

}  // namespace

ApproxSpace enumerate_approx(const ArmModel& model, const Belief& initial, int steps,
                             double epsilon) {
  if (initial.size() != model.states()) {
    throw DimensionMismatch("initial belief does not match the model");
  }
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");

  ApproxSpace space;
  space.epsilon = epsilon;
  space.steps = steps;
  space.states.push_back(initial);
  space.level_sizes.push_back(1);

  std::size_t frontier_begin = 0;
  std::size_t frontier_end = 1;
  for (int t = 1; t <= steps; ++t) {
    for (std::size_t s = frontier_begin; s < frontier_end; ++s) {
      // Copy: push_back below may reallocate.
      const Belief current = space.states[s];
      const auto q = feedback_probabilities(current, model);

      Belief candidate = passive_update(current, model);
      if (far_from_all(candidate, space.states, epsilon)) {
        space.states.push_back(std::move(candidate));
      }
      for (FeedbackOutcome l = 0; l < q.size(); ++l) {
        if (q[l] <= kZeroProbability) continue;
        candidate = active_update(current, model, l);
        if (far_from_all(candidate, space.states, epsilon)) {
          space.states.push_back(std::move(candidate));
        }
      }
    }
    frontier_begin = frontier_end;
    frontier_end = space.states.size();
    space.level_sizes.push_back(space.states.size());
  }
  return space;
}

std::size_t project(std::span<const double> belief, const ApproxSpace& space) {
  if (space.states.empty()) throw std::invalid_argument("projection onto empty space");
  if (belief.size() != space.dimension()) {
    throw DimensionMismatch("belief dimension does not match the space");
  }
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < space.states.size(); ++i) {
    const double d = distance(belief, space.states[i].entries());
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

double TransitionKernels::p1(std::size_t i, std::size_t j) const {
  for (const auto& e : active[i]) {
    if (e.col == j) return e.value;
  }
  return 0.0;
}

Matrix TransitionKernels::dense_passive() const {
  const auto n = static_cast<Eigen::Index>(size());
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < size(); ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(passive[i])) = 1.0;
  }
  return m;
}

Matrix TransitionKernels::dense_active() const {
  const auto n = static_cast<Eigen::Index>(size());
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const auto& e : active[i]) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.col)) = e.value;
    }
  }
  return m;
}

TransitionKernels build_kernels(const ApproxSpace& space, const ArmModel& model,
                                double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::invalid_argument("discount factor must lie in [0, 1)");
  }
  if (space.dimension() != model.states()) {
    throw DimensionMismatch("space dimension does not match the model");
  }
  const std::size_t n = space.size();
  const std::size_t letters = model.feedback_count();

  TransitionKernels k;
  k.beta = beta;
  k.passive.resize(n);
  k.active.resize(n);
  k.rewards.resize(n);
  k.successors.assign(n, std::vector<std::ptrdiff_t>(letters, kImpossibleOutcome));

  for (std::size_t i = 0; i < n; ++i) {
    const Belief& state = space.states[i];
    k.passive[i] = project(passive_update(state, model), space);
    k.rewards[i] = expected_active_reward(state, model);

    const auto q = feedback_probabilities(state, model);
    auto& row = k.active[i];
    for (FeedbackOutcome l = 0; l < letters; ++l) {
      if (q[l] <= kZeroProbability) continue;
      const std::size_t target = project(active_update(state, model, l), space);
      k.successors[i][l] = static_cast<std::ptrdiff_t>(target);
      auto it = std::find_if(row.begin(), row.end(),
                             [&](const KernelEntry& e) { return e.col == target; });
      if (it == row.end()) {
        row.push_back({target, q[l]});
      } else {
        it->value += q[l];
      }
    }
    std::sort(row.begin(), row.end(),
              [](const KernelEntry& a, const KernelEntry& b) { return a.col < b.col; });
  }
  return k;
}

void write_space(std::ostream& out, const ApproxSpace& space) {
  out << "# rmab approx-space\n";
  out << "dimension " << space.dimension() << '\n';
  out << "epsilon " << detail::format_double(space.epsilon) << '\n';
  out << "steps " << space.steps << '\n';
  out << "levels";
  for (auto s : space.level_sizes) out << ' ' << s;
  out << '\n';
  out << "states " << space.size() << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << i;
    for (double v : space.states[i].entries()) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

ApproxSpace read_space(std::istream& in) {
  detail::LineReader reader(in);
  ApproxSpace space;
  const auto dim = reader.expect_count("dimension");
  space.epsilon = reader.expect_double("epsilon");
  space.steps = static_cast<int>(reader.expect_count("steps"));
  for (const auto& token : reader.expect_tokens("levels")) {
    space.level_sizes.push_back(detail::parse_count(token));
  }
  const auto count = reader.expect_count("states");
  space.states.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto fields = reader.next_csv();
    if (fields.size() != dim + 1 || detail::parse_count(fields[0]) != i) {
      throw std::runtime_error("malformed state line " + std::to_string(reader.line()));
    }
    std::vector<double> entries;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      entries.push_back(detail::parse_double(fields[j]));
    }
    space.states.emplace_back(std::move(entries));
  }
  return space;
}

void write_kernels(std::ostream& out, const TransitionKernels& k) {
  const std::size_t letters = k.successors.empty() ? 0 : k.successors.front().size();
  out << "# rmab transition-kernels\n";
  out << "states " << k.size() << '\n';
  out << "letters " << letters << '\n';
  out << "beta " << detail::format_double(k.beta) << '\n';
  out << "rewards\n";
  for (std::size_t i = 0; i < k.size(); ++i) {
    out << i << ',' << detail::format_double(k.rewards[i]) << '\n';
  }
  out << "passive\n";
  for (std::size_t i = 0; i < k.size(); ++i) out << i << ',' << k.passive[i] << ",1\n";
  std::size_t nnz = 0;
  for (const auto& row : k.active) nnz += row.size();
  out << "active " << nnz << '\n';
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (const auto& e : k.active[i]) {
      out << i << ',' << e.col << ',' << detail::format_double(e.value) << '\n';
    }
  }
  out << "successors\n";
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t l = 0; l < letters; ++l) {
      out << i << ',' << l << ',' << k.successors[i][l] << '\n';
    }
  }
}

TransitionKernels read_kernels(std::istream& in) {
  detail::LineReader reader(in);
  TransitionKernels k;
  const auto n = reader.expect_count("states");
  const auto letters = reader.expect_count("letters");
  k.beta = reader.expect_double("beta");
  k.rewards.resize(n);
  k.passive.resize(n);
  k.active.resize(n);
  k.successors.assign(n, std::vector<std::ptrdiff_t>(letters, kImpossibleOutcome));

  auto bad = [&] {
    return std::runtime_error("malformed kernel line " + std::to_string(reader.line()));
  };

  reader.expect_tokens("rewards");
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = reader.next_csv();
    if (f.size() != 2 || detail::parse_count(f[0]) != i) throw bad();
    k.rewards[i] = detail::parse_double(f[1]);
  }
  reader.expect_tokens("passive");
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = reader.next_csv();
    if (f.size() != 3 || detail::parse_count(f[0]) != i) throw bad();
    k.passive[i] = detail::parse_count(f[1]);
    if (k.passive[i] >= n || detail::parse_double(f[2]) != 1.0) throw bad();
  }
  const auto nnz = reader.expect_count("active");
  for (std::size_t e = 0; e < nnz; ++e) {
    const auto f = reader.next_csv();
    if (f.size() != 3) throw bad();
    const auto row = detail::parse_count(f[0]);
    const auto col = detail::parse_count(f[1]);
    if (row >= n || col >= n) throw bad();
    k.active[row].push_back({col, detail::parse_double(f[2])});
  }
  reader.expect_tokens("successors");
  for (std::size_t e = 0; e < n * letters; ++e) {
    const auto f = reader.next_csv();
    if (f.size() != 3) throw bad();
    const auto row = detail::parse_count(f[0]);
    const auto l = detail::parse_count(f[1]);
    if (row >= n || l >= letters) throw bad();
    long long target = 0;
    const auto& t = f[2];
    if (std::from_chars(t.data(), t.data() + t.size(), target).ec != std::errc{}) {
      throw bad();
    }
    k.successors[row][l] = static_cast<std::ptrdiff_t>(target);
  }
  return k;
}

}  // namespace rmab
