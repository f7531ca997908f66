#pragma once

// Experiment configuration: a JSON document with nested sections.
//
//   {
//     "schema_version": 1,
//     "name": "paper-tracking-alg2",
//     "problem": {"kind": "paper_tracking"},
//     "feasible_set": {"bounds": [[-10, 10]]},
//     "topology": {"generator": "paper4", "omega": 0.22, "B": 1, "lambda_override": 0.98625},
//     "algorithm": {"kind": "projection_free", "line_search": "fixed_alpha0", "alpha0": 0.002},
//     "horizon": 1000,
//     "rho": [0.9875],
//     "classical_regret": false,
//     "seeds": [1],
//     "bounds": true,
//     "thresholds": {"consensus": 0.001, "tracking": 0.001, "weighted_tracking": 0.01}
//   }
//
// See README.md for every field.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dffr/algorithms.hpp"
#include "dffr/error.hpp"
#include "dffr/geometry.hpp"
#include "dffr/network.hpp"
#include "dffr/objectives.hpp"

namespace dffr::harness {

using json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

struct ProblemSpec {
  std::string kind = "paper_tracking";  // paper_tracking | quadratic | custom
  std::vector<double> scales;           // quadratic
  double amplitude = 60.0;              // quadratic target A / t^p
  double power = 2.0;
  int dim = 1;
  std::string custom_name;  // custom
  int agents = 0;           // custom
  std::map<std::string, double> params;

  bool operator==(const ProblemSpec&) const = default;
};

struct TopologySpec {
  std::string generator;  // paper4 | ring | complete; empty when a matrix is given
  double omega = 0.22;    // paper4
  int agents = 0;         // ring / complete
  double edge = 0.0;      // ring / complete; 0 picks a default
  std::vector<std::vector<double>> matrix;
  std::string matrix_file;
  int B = 1;
  std::optional<double> lambda_override;

  bool operator==(const TopologySpec&) const = default;
};

struct Thresholds {
  double consensus = 1e-3;
  double tracking = 1e-3;
  double weighted_tracking = 1e-2;

  bool operator==(const Thresholds&) const = default;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name;
  /// Set for scripted traces ("power_of_three_spikes"); problem/topology/algorithm are then unused.
  std::string synthetic;
  ProblemSpec problem;
  std::vector<std::pair<double, double>> bounds{{-10.0, 10.0}};
  TopologySpec topology;
  algorithms::AlgorithmConfig algorithm;
  int horizon = 1000;
  std::vector<double> rho{0.9875};
  bool classical_regret = false;
  std::vector<std::uint64_t> seeds{1};
  bool evaluate_bounds = false;
  Thresholds thresholds;
  std::vector<std::vector<double>> initial;
  std::string output_dir;

  bool operator==(const ExperimentConfig&) const = default;
};

// -- number formatting -----------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Parses "A/t^p" (also "A/t" and "A").
inline std::optional<std::pair<double, double>> parse_target_path(const std::string& expr) {
  std::string s;
  for (char c : expr)
    if (c != ' ') s.push_back(c);
  const auto slash = s.find("/t");
  if (slash == std::string::npos) {
    auto a = parse_double(s);
    if (!a) return std::nullopt;
    return std::make_pair(*a, 0.0);
  }
  auto a = parse_double(std::string_view(s).substr(0, slash));
  if (!a) return std::nullopt;
  std::string_view rest = std::string_view(s).substr(slash + 2);
  if (rest.empty()) return std::make_pair(*a, 1.0);
  if (rest.front() != '^') return std::nullopt;
  auto p = parse_double(rest.substr(1));
  if (!p) return std::nullopt;
  return std::make_pair(*a, *p);
}

inline std::string format_target_path(double amplitude, double power) {
  return format_double(amplitude) + "/t^" + format_double(power);
}

// -- serialization -------------------------------------------------------------------------

inline std::string to_string(algorithms::LineSearch ls) {
  return ls == algorithms::LineSearch::Exact1D ? "exact_1d" : "fixed_alpha0";
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["horizon"] = c.horizon;
  j["rho"] = c.rho;
  j["classical_regret"] = c.classical_regret;
  j["seeds"] = c.seeds;
  j["bounds"] = c.evaluate_bounds;
  j["thresholds"] = {{"consensus", c.thresholds.consensus},
                     {"tracking", c.thresholds.tracking},
                     {"weighted_tracking", c.thresholds.weighted_tracking}};
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
  if (!c.synthetic.empty()) {
    j["synthetic"] = {{"kind", c.synthetic}};
    return j;
  }

  json p{{"kind", c.problem.kind}};
  if (c.problem.kind == "quadratic") {
    p["scales"] = c.problem.scales;
    p["target"] = format_target_path(c.problem.amplitude, c.problem.power);
    p["dim"] = c.problem.dim;
  } else if (c.problem.kind == "custom") {
    p["name"] = c.problem.custom_name;
    p["agents"] = c.problem.agents;
    p["dim"] = c.problem.dim;
    p["params"] = c.problem.params;
  }
  j["problem"] = p;

  json b = json::array();
  for (const auto& [lo, hi] : c.bounds) b.push_back({lo, hi});
  j["feasible_set"] = {{"bounds", b}};

  json t;
  if (!c.topology.generator.empty()) {
    t["generator"] = c.topology.generator;
    if (c.topology.generator == "paper4") {
      t["omega"] = c.topology.omega;
    } else {
      t["agents"] = c.topology.agents;
      if (c.topology.edge > 0.0) t["edge"] = c.topology.edge;
    }
  } else if (!c.topology.matrix_file.empty()) {
    t["matrix_file"] = c.topology.matrix_file;
  } else {
    t["matrix"] = c.topology.matrix;
  }
  t["B"] = c.topology.B;
  if (c.topology.lambda_override) t["lambda_override"] = *c.topology.lambda_override;
  j["topology"] = t;

  json a;
  switch (c.algorithm.kind) {
    case AlgorithmKind::GradientFree:
      a["kind"] = "gradient_free";
      a["step"] = {{"scale", c.algorithm.schedule.scale}, {"power", c.algorithm.schedule.power}};
      a["delta"] = c.algorithm.delta;
      break;
    case AlgorithmKind::ProjectionFree:
      a["kind"] = "projection_free";
      a["line_search"] = to_string(c.algorithm.line_search);
      a["alpha0"] = c.algorithm.alpha0;
      a["clamp_to_x"] = c.algorithm.clamp_to_x;
      break;
    case AlgorithmKind::ProjectedGD:
      a["kind"] = "projected_gd";
      a["step"] = {{"scale", c.algorithm.schedule.scale}, {"power", c.algorithm.schedule.power}};
      break;
    case AlgorithmKind::Scripted:
      a["kind"] = "scripted";
      break;
  }
  j["algorithm"] = a;
  if (!c.initial.empty()) j["initial"] = c.initial;
  return j;
}

namespace detail {

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, "field '" + path + "': " + what);
}

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) field_error(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) field_error(path, "expected an integer");
  return j.get<int>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) field_error(path, "expected true or false");
  return j.get<bool>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) field_error(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline std::vector<std::vector<double>> rows(const json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(numbers(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

template <class T>
T optional_field(const json& j, const std::string& key, const std::string& path, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  const std::string p = path.empty() ? key : path + "." + key;
  if constexpr (std::is_same_v<T, double>) return number(*it, p);
  else if constexpr (std::is_same_v<T, int>) return integer(*it, p);
  else if constexpr (std::is_same_v<T, bool>) return boolean(*it, p);
  else return string(*it, p);
}

inline algorithms::StepSchedule schedule(const json& a, const algorithms::StepSchedule& fallback) {
  auto it = a.find("step");
  if (it == a.end()) return fallback;
  if (!it->is_object()) field_error("algorithm.step", "expected an object");
  return {optional_field(*it, "scale", "algorithm.step", fallback.scale),
          optional_field(*it, "power", "algorithm.step", fallback.power)};
}

}  // namespace detail

/// Structural parse of a config document. Cross-field constraints are
/// checked by validate_config().
inline ExperimentConfig from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) field_error("<root>", "expected an object");
  ExperimentConfig c;
  c.schema_version = optional_field(j, "schema_version", "", kConfigSchemaVersion);
  if (c.schema_version != kConfigSchemaVersion)
    throw Error(ErrorCode::SchemaVersionMismatch, "config schema_version " + std::to_string(c.schema_version));
  c.name = optional_field<std::string>(j, "name", "", "");
  c.horizon = integer(require(j, "horizon", ""), "horizon");
  if (j.contains("rho")) c.rho = numbers(j["rho"], "rho");
  c.classical_regret = optional_field(j, "classical_regret", "", false);
  c.evaluate_bounds = optional_field(j, "bounds", "", false);
  c.output_dir = optional_field<std::string>(j, "output_dir", "", "");
  if (auto it = j.find("thresholds"); it != j.end()) {
    c.thresholds.consensus = optional_field(*it, "consensus", "thresholds", c.thresholds.consensus);
    c.thresholds.tracking = optional_field(*it, "tracking", "thresholds", c.thresholds.tracking);
    c.thresholds.weighted_tracking =
        optional_field(*it, "weighted_tracking", "thresholds", c.thresholds.weighted_tracking);
  }
  bool seeds_given = false;
  if (auto it = j.find("seeds"); it != j.end()) {
    if (!it->is_array()) field_error("seeds", "expected an array of non-negative integers");
    c.seeds.clear();
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& s = (*it)[k];
      if (!s.is_number_unsigned()) field_error("seeds[" + std::to_string(k) + "]", "expected a non-negative integer");
      c.seeds.push_back(s.get<std::uint64_t>());
    }
    seeds_given = true;
  }

  if (auto it = j.find("synthetic"); it != j.end()) {
    c.synthetic = string(require(*it, "kind", "synthetic"), "synthetic.kind");
    c.algorithm.kind = AlgorithmKind::Scripted;
    return c;
  }

  const json& p = require(j, "problem", "");
  c.problem.kind = string(require(p, "kind", "problem"), "problem.kind");
  if (c.problem.kind == "quadratic") {
    c.problem.scales = numbers(require(p, "scales", "problem"), "problem.scales");
    const json& tgt = require(p, "target", "problem");
    if (tgt.is_string()) {
      auto parsed = parse_target_path(tgt.get<std::string>());
      if (!parsed) field_error("problem.target", "expected an expression of the form A/t^p");
      c.problem.amplitude = parsed->first;
      c.problem.power = parsed->second;
    } else {
      c.problem.amplitude = number(require(tgt, "amplitude", "problem.target"), "problem.target.amplitude");
      c.problem.power = number(require(tgt, "power", "problem.target"), "problem.target.power");
    }
    c.problem.dim = optional_field(p, "dim", "problem", 1);
  } else if (c.problem.kind == "custom") {
    c.problem.custom_name = string(require(p, "name", "problem"), "problem.name");
    c.problem.agents = integer(require(p, "agents", "problem"), "problem.agents");
    c.problem.dim = optional_field(p, "dim", "problem", 1);
    if (auto it = p.find("params"); it != p.end()) {
      if (!it->is_object()) field_error("problem.params", "expected an object of numbers");
      for (auto kv = it->begin(); kv != it->end(); ++kv)
        c.problem.params[kv.key()] = number(kv.value(), "problem.params." + kv.key());
    }
  } else if (c.problem.kind != "paper_tracking") {
    field_error("problem.kind", "unknown kind '" + c.problem.kind + "'");
  }

  const json& fs = require(j, "feasible_set", "");
  c.bounds.clear();
  for (const auto& row : rows(require(fs, "bounds", "feasible_set"), "feasible_set.bounds")) {
    if (row.size() != 2) field_error("feasible_set.bounds", "each entry must be [lower, upper]");
    c.bounds.emplace_back(row[0], row[1]);
  }

  const json& t = require(j, "topology", "");
  c.topology.B = optional_field(t, "B", "topology", 1);
  if (auto it = t.find("lambda_override"); it != t.end())
    c.topology.lambda_override = number(*it, "topology.lambda_override");
  if (t.contains("generator")) {
    c.topology.generator = string(t["generator"], "topology.generator");
    if (c.topology.generator == "paper4") {
      c.topology.omega = optional_field(t, "omega", "topology", 0.22);
    } else if (c.topology.generator == "ring" || c.topology.generator == "complete") {
      c.topology.agents = integer(require(t, "agents", "topology"), "topology.agents");
      c.topology.edge = optional_field(t, "edge", "topology", 0.0);
    } else {
      field_error("topology.generator", "unknown generator '" + c.topology.generator + "'");
    }
  } else if (t.contains("matrix_file")) {
    c.topology.matrix_file = string(t["matrix_file"], "topology.matrix_file");
  } else if (t.contains("matrix")) {
    c.topology.matrix = rows(t["matrix"], "topology.matrix");
  } else {
    field_error("topology", "needs one of generator, matrix, matrix_file");
  }

  const json& a = require(j, "algorithm", "");
  const std::string kind = string(require(a, "kind", "algorithm"), "algorithm.kind");
  if (kind == "gradient_free") {
    c.algorithm.kind = AlgorithmKind::GradientFree;
    c.algorithm.schedule = schedule(a, {2.0, 0.5});
    c.algorithm.delta = optional_field(a, "delta", "algorithm", 0.01);
  } else if (kind == "projection_free") {
    c.algorithm.kind = AlgorithmKind::ProjectionFree;
    const std::string ls = optional_field<std::string>(a, "line_search", "algorithm", "exact_1d");
    if (ls == "exact_1d") c.algorithm.line_search = algorithms::LineSearch::Exact1D;
    else if (ls == "fixed_alpha0") c.algorithm.line_search = algorithms::LineSearch::FixedAlpha0;
    else field_error("algorithm.line_search", "expected exact_1d or fixed_alpha0");
    c.algorithm.alpha0 = optional_field(a, "alpha0", "algorithm", 0.002);
    c.algorithm.clamp_to_x = optional_field(a, "clamp_to_x", "algorithm", false);
  } else if (kind == "projected_gd") {
    c.algorithm.kind = AlgorithmKind::ProjectedGD;
    c.algorithm.schedule = schedule(a, {2.0, 0.5});
  } else {
    field_error("algorithm.kind", "unknown kind '" + kind + "'");
  }
  if (!seeds_given && c.algorithm.kind == AlgorithmKind::GradientFree) {
    c.seeds.clear();
    for (std::uint64_t s = 1; s <= 20; ++s) c.seeds.push_back(s);
  }
  if (auto it = j.find("initial"); it != j.end()) c.initial = rows(*it, "initial");
  return c;
}

// -- runtime objects -----------------------------------------------------------------------

inline geometry::BoxSet make_set(const ExperimentConfig& c) {
  Vector lo(static_cast<Eigen::Index>(c.bounds.size())), hi(static_cast<Eigen::Index>(c.bounds.size()));
  for (std::size_t k = 0; k < c.bounds.size(); ++k) {
    lo[static_cast<Eigen::Index>(k)] = c.bounds[k].first;
    hi[static_cast<Eigen::Index>(k)] = c.bounds[k].second;
  }
  return geometry::BoxSet(lo, hi);
}

inline std::vector<std::vector<double>> read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read matrix file " + path);
  std::vector<std::vector<double>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      auto v = parse_double(cell);
      if (!v) throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      row.push_back(*v);
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline Matrix make_matrix(const TopologySpec& t) {
  if (t.generator == "paper4") return network::paper4_matrix(t.omega);
  if (t.generator == "ring") return network::ring_matrix(t.agents, t.edge > 0.0 ? t.edge : 1.0 / 3.0);
  if (t.generator == "complete") return network::complete_matrix(t.agents, t.edge > 0.0 ? t.edge : 1.0 / t.agents);
  const auto rows = t.matrix_file.empty() ? t.matrix : read_matrix_csv(t.matrix_file);
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw Error(ErrorCode::ParseError, "topology matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j) w(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return w;
}

inline int problem_agents(const ProblemSpec& p) {
  if (p.kind == "paper_tracking") return 4;
  if (p.kind == "quadratic") return static_cast<int>(p.scales.size());
  return p.agents;
}

inline int problem_dim(const ProblemSpec& p) { return p.kind == "paper_tracking" ? 1 : p.dim; }

/// Streams are built one round longer than the horizon so the optimum path
/// length at the final round is defined.
inline std::shared_ptr<objectives::ObjectiveStream> make_stream(const ExperimentConfig& c) {
  const int horizon = c.horizon + 1;
  const auto& p = c.problem;
  if (p.kind == "paper_tracking") return objectives::paper_tracking_stream(horizon);
  if (p.kind == "quadratic")
    return std::make_shared<objectives::QuadraticTrackingStream>(p.scales, p.amplitude, p.power, p.dim, horizon);
  return objectives::make_custom_stream(p.custom_name, p.params, p.agents, p.dim, horizon);
}

/// Everything a run needs, built from a validated config.
struct Instance {
  std::shared_ptr<objectives::ObjectiveStream> stream;
  geometry::BoxSet set;
  network::WeightMatrix wm;
  network::MixingConstants mc;
  objectives::StreamConstants constants;
};

namespace detail {

[[noreturn]] inline void violation(const std::string& clause) { throw Error(ErrorCode::ConstraintViolation, clause); }

}  // namespace detail

/// Builds the runtime objects and checks every cross-field constraint.
/// Scripted configs only get the scalar checks.
inline std::optional<Instance> validate_config(const ExperimentConfig& c) {
  using detail::violation;
  if (c.horizon < 1) violation("horizon must be >= 1");
  if (c.seeds.empty()) violation("seeds must not be empty");
  for (double r : c.rho)
    if (!(r > 0.0 && r < 1.0)) violation("every rho must lie in (0, 1)");
  if (!(c.thresholds.consensus > 0.0 && c.thresholds.tracking > 0.0 && c.thresholds.weighted_tracking > 0.0))
    violation("thresholds must be positive");
  if (!c.synthetic.empty()) {
    if (c.synthetic != "power_of_three_spikes") violation("unknown synthetic kind '" + c.synthetic + "'");
    if (c.evaluate_bounds) violation("bounds are not defined for synthetic traces");
    return std::nullopt;
  }
  if (c.problem.kind == "custom" && !objectives::has_custom_stream(c.problem.custom_name))
    violation("problem.name: no custom stream registered as '" + c.problem.custom_name + "'");
  if (!c.topology.matrix_file.empty() && !std::filesystem::exists(c.topology.matrix_file))
    violation("topology.matrix_file does not exist: " + c.topology.matrix_file);

  std::optional<geometry::BoxSet> set;
  try {
    set.emplace(make_set(c));
  } catch (const Error& e) {
    violation(std::string("feasible_set: ") + e.what());
  }
  if (set->dim() != problem_dim(c.problem)) violation("feasible_set dimension differs from problem dimension");

  std::optional<network::WeightMatrix> wm;
  try {
    wm.emplace(network::validate_weight_matrix(make_matrix(c.topology), c.topology.B));
  } catch (const Error& e) {
    violation(std::string("topology: ") + e.what());
  }
  if (wm->n() != problem_agents(c.problem)) violation("topology agent count differs from problem agent count");

  try {
    algorithms::validate(c.algorithm, *set);
  } catch (const Error& e) {
    violation(std::string("algorithm: ") + e.what());
  }

  auto mc = network::mixing_constants(*wm);
  if (c.topology.lambda_override) {
    const double l = *c.topology.lambda_override;
    if (!(l > 0.0 && l < 1.0)) violation("topology.lambda_override must lie in (0, 1)");
    mc.lambda = l;
  }
  if (c.evaluate_bounds) {
    if (c.rho.empty()) violation("bounds need at least one rho");
    for (double r : c.rho)
      if (!(r > mc.lambda))
        violation("rho " + format_double(r) + " must exceed lambda " + format_double(mc.lambda) +
                  " when bounds are enabled");
  }
  if (!c.initial.empty()) {
    if (static_cast<int>(c.initial.size()) != wm->n()) violation("initial needs one state per agent");
    const auto feasible = algorithms::decision_set(c.algorithm, *set);
    for (const auto& x : c.initial) {
      if (static_cast<int>(x.size()) != set->dim()) violation("initial state has wrong dimension");
      if (!feasible.contains(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()))))
        violation("initial state outside the decision set");
    }
  }

  auto stream = make_stream(c);
  const auto k = stream->constants(*set, c.horizon);
  return Instance{std::move(stream), *set, *wm, mc, k};
}

/// Parses a config document from text. `origin` names the source in messages.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < std::min<std::size_t>(e.byte, text.size()); ++k)
      if (text[k] == '\n') ++line;
    throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ": " + e.what());
  }
  ExperimentConfig c = from_json(j);
  validate_config(c);
  return c;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

// -- presets ---------------------------------------------------------------------------------

inline std::vector<std::string> preset_names() {
  return {"paper-tracking-alg1", "paper-tracking-alg2", "paper-tracking-dogd", "remark1-synthetic"};
}

/// Tracking experiment presets. The network (4-ring with self-loops,
/// omega = 0.22) and the zero initial decisions are choices, not published
/// values; lambda is pinned to 0.98625 so rho = 0.9875 satisfies rho > lambda.
inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.problem.kind = "paper_tracking";
  c.bounds = {{-10.0, 10.0}};
  c.topology.generator = "paper4";
  c.topology.omega = 0.22;
  c.topology.B = 1;
  c.topology.lambda_override = 0.98625;
  c.horizon = 1000;
  c.rho = {0.9875};
  c.thresholds = {1e-3, 1e-3, 1e-2};
  if (name == "paper-tracking-alg1") {
    c.algorithm.kind = AlgorithmKind::GradientFree;
    c.algorithm.schedule = {2.0, 0.5};
    c.algorithm.delta = 0.01;
    c.seeds.clear();
    for (std::uint64_t s = 1; s <= 20; ++s) c.seeds.push_back(s);
    c.evaluate_bounds = true;
  } else if (name == "paper-tracking-alg2") {
    c.algorithm.kind = AlgorithmKind::ProjectionFree;
    c.algorithm.line_search = algorithms::LineSearch::FixedAlpha0;
    c.algorithm.alpha0 = 0.002;
    c.seeds = {1};
    c.evaluate_bounds = true;
  } else if (name == "paper-tracking-dogd") {
    c.algorithm.kind = AlgorithmKind::ProjectedGD;
    c.algorithm.schedule = {2.0, 0.5};
    c.rho = {0.96, 0.97, 0.98};
    c.classical_regret = true;
    c.seeds = {1};
  } else if (name == "remark1-synthetic") {
    c = ExperimentConfig{};
    c.name = name;
    c.synthetic = "power_of_three_spikes";
    c.algorithm.kind = AlgorithmKind::Scripted;
    c.horizon = 729;
    c.rho = {0.9};
    c.classical_regret = true;
    c.seeds = {1};
  } else {
    throw Error(ErrorCode::ParseError, "unknown preset '" + name + "'");
  }
  return c;
}

}  // namespace dffr::harness
