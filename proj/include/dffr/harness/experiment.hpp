#pragma once

// Experiment runner, parameter sweeps and offline metric recomputation.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dffr/algorithms.hpp"
#include "dffr/bounds.hpp"
#include "dffr/error.hpp"
#include "dffr/harness/config.hpp"
#include "dffr/harness/trace_io.hpp"
#include "dffr/metrics.hpp"

namespace dffr::harness {

/// Per-seed results.
struct SeedResult {
  std::uint64_t seed = 0;
  Trace trace;
  std::optional<int> consensus_time;
  std::optional<int> tracking_time;
  std::vector<double> gaps;                       // m_t
  std::vector<std::vector<double>> dffr;          // [rho][t-1]
  std::vector<double> cumulative;                 // sum_{s<=t} m_s
  std::vector<double> tracking_error;             // nu_t
  std::optional<bounds::BoundInputs> bound_inputs;
};

/// Bound curves for one rho, evaluated on seed-averaged measured inputs.
struct BoundCurve {
  double rho = 0.0;
  std::string name;  // gradient_free | projection_free
  std::vector<double> values;
  double asymptote = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedResult> seeds;
  std::vector<BoundCurve> bound_curves;
  json summary;
  std::vector<std::filesystem::path> written;
};

inline std::optional<double> median(std::vector<std::optional<int>> values) {
  std::vector<double> v;
  for (const auto& x : values)
    if (x) v.push_back(*x);
  if (v.empty() || v.size() < values.size()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

inline json optional_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Runs one seed in memory.
inline SeedResult run_seed(const ExperimentConfig& cfg, const std::optional<Instance>& inst, std::uint64_t seed) {
  SeedResult res;
  res.seed = seed;
  if (!cfg.synthetic.empty()) {
    res.trace = metrics::spike_trace(cfg.horizon);
  } else {
    auto acfg = cfg.algorithm;
    acfg.seed = seed;
    std::optional<AgentVectors> init;
    if (!cfg.initial.empty()) {
      init.emplace();
      for (const auto& x : cfg.initial) init->push_back(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())));
    }
    res.trace = algorithms::run(*inst->stream, inst->wm, inst->set, acfg, cfg.horizon, std::move(init));
    if (cfg.evaluate_bounds) {
      std::optional<double> delta;
      if (acfg.kind == AlgorithmKind::GradientFree) delta = acfg.delta;
      res.bound_inputs = bounds::collect_bound_inputs(res.trace, *inst->stream, inst->set, inst->mc, cfg.rho.front(),
                                                      delta, inst->constants);
    }
  }
  res.gaps = metrics::instantaneous_gaps(res.trace);
  for (double r : cfg.rho) res.dffr.push_back(metrics::dffr_sequence(res.gaps, r));
  res.cumulative = metrics::cumulative_regret(res.gaps);
  res.tracking_error = metrics::mean_tracking_errors(res.trace);
  res.consensus_time = metrics::consensus_time(res.trace, cfg.thresholds.consensus);
  res.tracking_time = metrics::tracking_time(res.trace, cfg.thresholds.tracking);
  return res;
}

/// Bound curves on seed-averaged inputs for each configured rho.
inline std::vector<BoundCurve> evaluate_bounds(const ExperimentConfig& cfg, const std::vector<SeedResult>& seeds) {
  std::vector<BoundCurve> out;
  if (!cfg.evaluate_bounds || seeds.empty() || !seeds.front().bound_inputs) return out;
  std::vector<bounds::BoundInputs> all;
  for (const auto& s : seeds) all.push_back(*s.bound_inputs);
  auto avg = bounds::average_inputs(all);
  for (double r : cfg.rho) {
    avg.rho = r;
    BoundCurve c;
    c.rho = r;
    if (cfg.algorithm.kind == AlgorithmKind::GradientFree) {
      c.name = "gradient_free";
      c.values = bounds::gradient_free_bound(avg, cfg.algorithm.schedule);
      c.asymptote = bounds::constant_step_asymptote(avg, cfg.algorithm.schedule.at(cfg.horizon));
    } else if (cfg.algorithm.kind == AlgorithmKind::ProjectionFree) {
      c.name = "projection_free";
      c.values = bounds::projection_free_bound(avg, cfg.algorithm.alpha0);
      c.asymptote = bounds::projection_free_asymptote(avg, cfg.algorithm.alpha0);
    } else {
      continue;
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace detail {

inline std::vector<double> seed_mean(const std::vector<SeedResult>& seeds, auto&& pick) {
  std::vector<double> out(pick(seeds.front()).size(), 0.0);
  for (const auto& s : seeds) {
    const auto& v = pick(s);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += v[k];
  }
  for (double& x : out) x /= static_cast<double>(seeds.size());
  return out;
}

inline std::vector<double> seed_stderr(const std::vector<SeedResult>& seeds, const std::vector<double>& mean,
                                       auto&& pick) {
  std::vector<double> out(mean.size(), 0.0);
  if (seeds.size() < 2) return out;
  for (const auto& s : seeds) {
    const auto& v = pick(s);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
  }
  const double m = static_cast<double>(seeds.size());
  for (double& x : out) x = std::sqrt(x / (m - 1.0) / m);
  return out;
}

inline std::string rho_label(std::optional<double> rho) { return rho ? format_double(*rho) : "none"; }

}  // namespace detail

/// First round at which the forgetting-weighted mean tracking error drops
/// below the weighted-tracking threshold, per rho ("none" is the plain mean).
inline json weighted_tracking_crossings(const ExperimentConfig& cfg, const std::vector<double>& nu) {
  json j = json::object();
  if (cfg.classical_regret)
    j["none"] = optional_json(metrics::first_below(metrics::forgetting_weighted_mean(nu, std::nullopt),
                                                   cfg.thresholds.weighted_tracking));
  for (double r : cfg.rho)
    j[format_double(r)] =
        optional_json(metrics::first_below(metrics::forgetting_weighted_mean(nu, r), cfg.thresholds.weighted_tracking));
  return j;
}

inline json build_summary(const ExperimentResult& r) {
  const auto& cfg = r.config;
  json j;
  j["name"] = cfg.name;
  j["artifact_version"] = kArtifactVersion;
  j["algorithm"] = to_string(r.seeds.front().trace.kind);
  j["horizon"] = cfg.horizon;
  j["seeds"] = json::array();
  std::vector<std::optional<int>> ct, tt;
  for (const auto& s : r.seeds) {
    json e{{"seed", s.seed},
           {"consensus_time", optional_json(s.consensus_time)},
           {"tracking_time", optional_json(s.tracking_time)},
           {"final_gap", s.gaps.back()},
           {"cumulative_regret", s.cumulative.back()}};
    json d = json::object();
    for (std::size_t k = 0; k < cfg.rho.size(); ++k) d[format_double(cfg.rho[k])] = s.dffr[k].back();
    e["dffr"] = d;
    j["seeds"].push_back(e);
    ct.push_back(s.consensus_time);
    tt.push_back(s.tracking_time);
  }
  j["median_consensus_time"] = optional_json(median(ct));
  j["median_tracking_time"] = optional_json(median(tt));
  json d = json::object();
  for (std::size_t k = 0; k < cfg.rho.size(); ++k) {
    const auto mean = detail::seed_mean(r.seeds, [k](const SeedResult& s) -> const auto& { return s.dffr[k]; });
    d[format_double(cfg.rho[k])] = mean.back();
  }
  j["mean_final_dffr"] = d;
  const auto cum = detail::seed_mean(r.seeds, [](const SeedResult& s) -> const auto& { return s.cumulative; });
  j["mean_cumulative_regret"] = cum.back();
  const auto nu = detail::seed_mean(r.seeds, [](const SeedResult& s) -> const auto& { return s.tracking_error; });
  j["weighted_tracking_crossing"] = weighted_tracking_crossings(cfg, nu);
  json b = json::array();
  for (const auto& c : r.bound_curves)
    b.push_back({{"rho", c.rho}, {"bound", c.name}, {"final", c.values.back()}, {"asymptote", c.asymptote}});
  j["bounds"] = b;
  return j;
}

/// Long-format curves: series,rho,t,value.
inline void write_curves(std::ostream& out, const ExperimentResult& r) {
  const auto& cfg = r.config;
  out << "series,rho,t,value\n";
  auto emit = [&](const std::string& series, std::optional<double> rho, const std::vector<double>& v) {
    for (std::size_t k = 0; k < v.size(); ++k)
      out << series << ',' << detail::rho_label(rho) << ',' << (k + 1) << ',' << format_double(v[k]) << '\n';
  };
  for (std::size_t k = 0; k < cfg.rho.size(); ++k) {
    auto pick = [k](const SeedResult& s) -> const auto& { return s.dffr[k]; };
    const auto mean = detail::seed_mean(r.seeds, pick);
    emit("dffr_mean", cfg.rho[k], mean);
    emit("dffr_stderr", cfg.rho[k], detail::seed_stderr(r.seeds, mean, pick));
  }
  auto pick_cum = [](const SeedResult& s) -> const auto& { return s.cumulative; };
  const auto cum = detail::seed_mean(r.seeds, pick_cum);
  emit("cumulative_regret_mean", std::nullopt, cum);
  emit("cumulative_regret_stderr", std::nullopt, detail::seed_stderr(r.seeds, cum, pick_cum));
  emit("gap_mean", std::nullopt, detail::seed_mean(r.seeds, [](const SeedResult& s) -> const auto& { return s.gaps; }));
  const auto nu =
      detail::seed_mean(r.seeds, [](const SeedResult& s) -> const auto& { return s.tracking_error; });
  emit("tracking_error_mean", std::nullopt, nu);
  if (cfg.classical_regret)
    emit("weighted_tracking_error", std::nullopt, metrics::forgetting_weighted_mean(nu, std::nullopt));
  for (double rho : cfg.rho) emit("weighted_tracking_error", rho, metrics::forgetting_weighted_mean(nu, rho));
  for (const auto& c : r.bound_curves) emit("bound_" + c.name, c.rho, c.values);
}

/// Runs every configured seed. With a non-empty `out_dir` it writes one trace
/// (plus sidecar) per seed, summary.json and curves.csv; on failure every file
/// it created is removed before the error propagates.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir = {}) {
  const auto inst = validate_config(cfg);
  ExperimentResult res;
  res.config = cfg;
  bool created_dir = false;
  try {
    if (!out_dir.empty() && !std::filesystem::exists(out_dir)) {
      std::filesystem::create_directories(out_dir);
      created_dir = true;
    }
    for (auto seed : cfg.seeds) {
      res.seeds.push_back(run_seed(cfg, inst, seed));
      if (!out_dir.empty()) {
        auto w = write_trace(out_dir / ("trace_seed" + std::to_string(seed) + ".csv"), res.seeds.back().trace, cfg,
                             seed);
        res.written.insert(res.written.end(), w.begin(), w.end());
      }
    }
    res.bound_curves = evaluate_bounds(cfg, res.seeds);
    res.summary = build_summary(res);
    if (!out_dir.empty()) {
      const auto sp = out_dir / "summary.json";
      std::ofstream s(sp);
      if (!s) throw Error(ErrorCode::IoError, "cannot write " + sp.string());
      res.written.push_back(sp);
      json full = res.summary;
      full["config"] = to_json(cfg);
      s << full.dump(2) << '\n';
      const auto cp = out_dir / "curves.csv";
      std::ofstream c(cp);
      if (!c) throw Error(ErrorCode::IoError, "cannot write " + cp.string());
      res.written.push_back(cp);
      write_curves(c, res);
      if (!s || !c) throw Error(ErrorCode::IoError, "write failed in " + out_dir.string());
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : res.written) std::filesystem::remove(p, ec);
    if (created_dir) std::filesystem::remove(out_dir, ec);
    throw;
  }
  return res;
}

// -- sweeps ----------------------------------------------------------------------------------

inline std::vector<std::string> sweep_parameters() {
  return {"rho", "delta", "alpha0", "alpha_schedule_scale", "omega"};
}

/// Copy of `cfg` with one parameter replaced. Throws UnknownParameter.
inline ExperimentConfig with_parameter(ExperimentConfig cfg, const std::string& param, double value) {
  if (param == "rho") {
    cfg.rho = {value};
  } else if (param == "delta") {
    cfg.algorithm.delta = value;
  } else if (param == "alpha0") {
    cfg.algorithm.alpha0 = value;
    cfg.algorithm.line_search = algorithms::LineSearch::FixedAlpha0;
  } else if (param == "alpha_schedule_scale") {
    cfg.algorithm.schedule.scale = value;
  } else if (param == "omega") {
    if (cfg.topology.generator == "paper4") cfg.topology.omega = value;
    else if (cfg.topology.generator == "ring" || cfg.topology.generator == "complete") cfg.topology.edge = value;
    else throw Error(ErrorCode::ConstraintViolation, "omega sweeps need a generated topology");
  } else {
    std::string known;
    for (const auto& p : sweep_parameters()) known += (known.empty() ? "" : ", ") + p;
    throw Error(ErrorCode::UnknownParameter, "'" + param + "' (sweepable: " + known + ")");
  }
  return cfg;
}

struct SweepRow {
  double value = 0.0;
  std::optional<double> median_consensus_time;
  std::optional<double> median_tracking_time;
  double mean_final_dffr = 0.0;  // first configured rho
  std::optional<int> weighted_tracking_crossing;
  double mean_final_gap = 0.0;
};

/// Runs `cfg` once per value of `param` (in memory, bounds off). An empty
/// value list warns on `warn` and returns no rows.
inline std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::string& param,
                                   const std::vector<double>& values, std::ostream& warn = std::cerr) {
  with_parameter(cfg, param, values.empty() ? 0.5 : values.front());  // rejects unknown names up front
  if (values.empty()) {
    warn << "warning: sweep over '" << param << "' has no values; nothing to run\n";
    return {};
  }
  std::vector<SweepRow> rows;
  for (double v : values) {
    auto c = with_parameter(cfg, param, v);
    c.evaluate_bounds = false;
    const auto res = run_experiment(c);
    SweepRow row;
    row.value = v;
    std::vector<std::optional<int>> ct, tt;
    for (const auto& s : res.seeds) {
      ct.push_back(s.consensus_time);
      tt.push_back(s.tracking_time);
      row.mean_final_dffr += s.dffr.front().back();
      row.mean_final_gap += s.gaps.back();
    }
    const double k = static_cast<double>(res.seeds.size());
    row.mean_final_dffr /= k;
    row.mean_final_gap /= k;
    row.median_consensus_time = median(ct);
    row.median_tracking_time = median(tt);
    const auto nu = detail::seed_mean(res.seeds, [](const SeedResult& s) -> const auto& { return s.tracking_error; });
    row.weighted_tracking_crossing =
        metrics::first_below(metrics::forgetting_weighted_mean(nu, c.rho.front()), c.thresholds.weighted_tracking);
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::string& param, const std::vector<SweepRow>& rows) {
  auto cell = [](const auto& v) { return v ? format_double(static_cast<double>(*v)) : std::string("NA"); };
  out << param << ",median_consensus_time,median_tracking_time,mean_final_dffr,weighted_tracking_crossing,mean_final_gap\n";
  for (const auto& r : rows)
    out << format_double(r.value) << ',' << cell(r.median_consensus_time) << ',' << cell(r.median_tracking_time) << ','
        << format_double(r.mean_final_dffr) << ',' << cell(r.weighted_tracking_crossing) << ','
        << format_double(r.mean_final_gap) << '\n';
}

// -- recomputation ---------------------------------------------------------------------------

struct RecomputedMetrics {
  int horizon = 0;
  int agents = 0;
  std::vector<double> rho;
  std::vector<double> final_dffr;
  double cumulative_regret = 0.0;
  double final_gap = 0.0;
  std::optional<int> consensus_time;
  std::optional<int> tracking_time;
  /// Max |recomputed - stored| over every stored dffr column whose rho was
  /// requested; nullopt when none overlap.
  std::optional<double> stored_max_abs_diff;
};

/// Recomputes metrics from the stored rows alone.
inline RecomputedMetrics recompute_metrics(const std::filesystem::path& trace_path, const std::vector<double>& rhos,
                                           double consensus_threshold = 1e-3, double tracking_threshold = 1e-3) {
  const auto lt = read_trace(trace_path);
  RecomputedMetrics m;
  m.horizon = lt.trace.horizon();
  m.agents = lt.trace.n;
  const auto gaps = metrics::instantaneous_gaps(lt.trace);
  for (double r : rhos) {
    m.rho.push_back(r);
    const auto seq = metrics::dffr_sequence(gaps, r);
    m.final_dffr.push_back(seq.back());
    for (std::size_t k = 0; k < lt.stored_rho.size(); ++k) {
      if (lt.stored_rho[k] != r) continue;
      double worst = m.stored_max_abs_diff.value_or(0.0);
      for (std::size_t t = 0; t < seq.size(); ++t) worst = std::max(worst, std::abs(seq[t] - lt.stored_dffr[k][t]));
      m.stored_max_abs_diff = worst;
    }
  }
  m.cumulative_regret = metrics::cumulative_regret(gaps).back();
  m.final_gap = gaps.back();
  m.consensus_time = metrics::consensus_time(lt.trace, consensus_threshold);
  m.tracking_time = metrics::tracking_time(lt.trace, tracking_threshold);
  return m;
}

}  // namespace dffr::harness
