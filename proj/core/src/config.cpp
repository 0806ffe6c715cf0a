#include "rmab/config.hpp"

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "text_io.hpp"

namespace rmab {

std::size_t ExperimentConfig::arm_count() const {
  std::size_t n = 0;
  for (const auto& a : arms) n += a.count;
  return n;
}

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto tokens = detail::split_whitespace(raw);
    if (!tokens.empty()) lines.push_back({number, std::move(tokens)});
  }
  return lines;
}

[[noreturn]] void fail(const Line& line, const std::string& message) {
  throw ConfigError("line " + std::to_string(line.number) + ": " + message);
}

double number(const Line& line, const std::string& token) {
  double v = 0.0;
  if (!detail::try_parse_double(token, v)) fail(line, "expected a number, got '" + token + "'");
  return v;
}

std::size_t count(const Line& line, const std::string& token) {
  try {
    return detail::parse_count(token);
  } catch (const std::runtime_error&) {
    fail(line, "expected a non-negative integer, got '" + token + "'");
  }
}

const std::string& single(const Line& line) {
  if (line.tokens.size() != 2) fail(line, "'" + line.tokens[0] + "' takes exactly one value");
  return line.tokens[1];
}

bool starts_numeric(const Line& line) {
  double v = 0.0;
  return detail::try_parse_double(line.tokens.front(), v);
}

class Parser {
 public:
  explicit Parser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  ExperimentConfig run() {
    ExperimentConfig config;
    while (pos_ < lines_.size()) {
      const Line& line = lines_[pos_++];
      const auto& key = line.tokens[0];
      if (key == "beta") {
        config.beta = number(line, single(line));
      } else if (key == "T_steps") {
        config.steps = static_cast<int>(count(line, single(line)));
      } else if (key == "epsilon") {
        config.epsilon = number(line, single(line));
      } else if (key == "K") {
        config.activations = count(line, single(line));
      } else if (key == "horizon") {
        config.horizon = count(line, single(line));
      } else if (key == "episodes") {
        config.episodes = count(line, single(line));
      } else if (key == "master_seed") {
        config.master_seed = count(line, single(line));
      } else if (key == "policies") {
        config.policies.clear();
        for (const auto& item : detail::split_csv(single(line))) {
          try {
            config.policies.push_back(parse_policy(item));
          } catch (const std::invalid_argument& e) {
            fail(line, e.what());
          }
        }
      } else if (key == "arm") {
        if (line.tokens.size() != 1) fail(line, "'arm' takes no value");
        config.arms.push_back(parse_arm(config.arms.size() + 1, line));
      } else {
        fail(line, "unknown key '" + key + "'");
      }
    }
    return config;
  }

 private:
  Matrix parse_matrix(const Line& header) {
    if (header.tokens.size() != 1) fail(header, "matrix keyword takes no value");
    std::vector<std::vector<double>> rows;
    while (pos_ < lines_.size() && starts_numeric(lines_[pos_])) {
      const Line& row = lines_[pos_++];
      std::vector<double> values;
      for (const auto& t : row.tokens) values.push_back(number(row, t));
      if (!rows.empty() && values.size() != rows.front().size()) {
        fail(row, "ragged matrix row");
      }
      rows.push_back(std::move(values));
    }
    if (rows.empty()) fail(header, "matrix '" + header.tokens[0] + "' has no rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    return m;
  }

  ArmConfig parse_arm(std::size_t ordinal, const Line& start) {
    const std::string where = "arm " + std::to_string(ordinal);
    std::optional<Matrix> p, e, r, rho;
    std::optional<std::size_t> declared_states;
    std::optional<std::vector<double>> initial;
    std::optional<ObservationMode> mode;
    const Line* initial_line = nullptr;
    ArmConfig arm;

    while (true) {
      if (pos_ >= lines_.size()) fail(start, where + ": missing 'end'");
      const Line& line = lines_[pos_++];
      const auto& key = line.tokens[0];
      if (key == "end") break;
      if (key == "M") {
        declared_states = count(line, single(line));
      } else if (key == "mode") {
        try {
          mode = parse_observation_mode(single(line));
        } catch (const std::invalid_argument& ex) {
          fail(line, ex.what());
        }
      } else if (key == "count") {
        arm.count = count(line, single(line));
      } else if (key == "initial_belief") {
        std::vector<double> values;
        for (std::size_t i = 1; i < line.tokens.size(); ++i) {
          values.push_back(number(line, line.tokens[i]));
        }
        initial = std::move(values);
        initial_line = &line;
      } else if (key == "P") {
        p = parse_matrix(line);
      } else if (key == "E") {
        e = parse_matrix(line);
      } else if (key == "R") {
        r = parse_matrix(line);
      } else if (key == "rho") {
        rho = parse_matrix(line);
      } else {
        fail(line, where + ": unknown key '" + key + "'");
      }
    }

    if (!p) throw ConfigError(where + ": missing P matrix");
    if (!e) throw ConfigError(where + ": missing E matrix");
    if (!r) throw ConfigError(where + ": missing R matrix");
    if (!mode) throw ConfigError(where + ": missing mode");
    if (!initial) throw ConfigError(where + ": missing initial_belief");
    if (declared_states && *declared_states != static_cast<std::size_t>(p->rows())) {
      throw ConfigError(where + ": M = " + std::to_string(*declared_states) +
                        " but P has " + std::to_string(p->rows()) + " rows");
    }

    arm.spec = ArmSpec{std::move(*p), std::move(*e), std::move(*r), std::move(rho), *mode};
    try {
      arm.initial = Belief(std::move(*initial));
    } catch (const std::invalid_argument& ex) {
      fail(*initial_line, where + ": " + ex.what());
    }
    return arm;
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
  out << "  " << name << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << "   ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ' ' << detail::format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(c.beta >= 0.0 && c.beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
  if (c.steps < 1) throw ConfigError("T_steps must be at least 1");
  if (c.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (c.episodes < 1) throw ConfigError("episodes must be at least 1");
  if (c.policies.empty()) throw ConfigError("policies must not be empty");
  if (c.arms.empty()) throw ConfigError("config declares no arms");
  if (c.activations < 1 || c.activations > c.arm_count()) {
    throw ConfigError("K must satisfy 1 <= K <= number of arms");
  }
  for (std::size_t n = 0; n < c.arms.size(); ++n) {
    const auto& arm = c.arms[n];
    const std::string where = "arm " + std::to_string(n + 1);
    if (arm.count < 1) throw ConfigError(where + ": count must be at least 1");
    const auto report = validate_model(arm.spec);
    if (!report.ok()) throw ConfigError(where + ": " + report.to_string());
    if (arm.initial.size() != static_cast<std::size_t>(arm.spec.P.rows())) {
      throw ConfigError(where + ": initial_belief has " +
                        std::to_string(arm.initial.size()) + " entries, expected " +
                        std::to_string(arm.spec.P.rows()));
    }
  }
}

ExperimentConfig parse_config(std::istream& in) {
  auto config = Parser(tokenize(in)).run();
  validate_config(config);
  return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  out << "beta " << detail::format_double(c.beta) << '\n';
  out << "T_steps " << c.steps << '\n';
  out << "epsilon " << detail::format_double(c.epsilon) << '\n';
  out << "K " << c.activations << '\n';
  out << "horizon " << c.horizon << '\n';
  out << "episodes " << c.episodes << '\n';
  out << "master_seed " << c.master_seed << '\n';
  out << "policies ";
  for (std::size_t i = 0; i < c.policies.size(); ++i) {
    out << (i ? "," : "") << to_string(c.policies[i]);
  }
  out << '\n';
  for (const auto& arm : c.arms) {
    out << "\narm\n";
    out << "  M " << arm.spec.P.rows() << '\n';
    out << "  mode " << to_string(arm.spec.mode) << '\n';
    out << "  count " << arm.count << '\n';
    out << "  initial_belief";
    for (double v : arm.initial.entries()) out << ' ' << detail::format_double(v);
    out << '\n';
    write_matrix(out, "P", arm.spec.P);
    write_matrix(out, "E", arm.spec.E);
    write_matrix(out, "R", arm.spec.R);
    if (arm.spec.rho) write_matrix(out, "rho", *arm.spec.rho);
    out << "end\n";
  }
}

}  // namespace rmab
