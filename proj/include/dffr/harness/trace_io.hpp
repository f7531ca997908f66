#pragma once

// Trace files: a CSV body with one row per (round, agent) and a JSON sidecar
// (`<stem>.meta.json`) holding the config snapshot, seed and versions.
//
// CSV layout:
//   # dffr-trace schema=1
//   t,agent,x0,..,z0,..,eps_norm,loss,global_loss,aux,xstar0,..,f_star,gap,dffr[rho=0.9875],..
//
// `gap` and the dffr columns are per round and repeated on each agent row.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dffr/error.hpp"
#include "dffr/harness/config.hpp"
#include "dffr/metrics.hpp"
#include "dffr/trace.hpp"

namespace dffr::harness {

inline constexpr int kTraceSchemaVersion = 1;

inline std::string trace_magic() { return "# dffr-trace schema=" + std::to_string(kTraceSchemaVersion); }

inline std::filesystem::path meta_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

inline std::string rho_column(double rho) { return "dffr[rho=" + format_double(rho) + "]"; }

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

inline void write_trace_csv(std::ostream& out, const Trace& trace, const std::vector<double>& rhos) {
  const auto gaps = metrics::instantaneous_gaps(trace);
  std::vector<std::vector<double>> dffr;
  for (double r : rhos) dffr.push_back(metrics::dffr_sequence(gaps, r));

  out << trace_magic() << '\n' << "t,agent";
  for (int k = 0; k < trace.d; ++k) out << ",x" << k;
  for (int k = 0; k < trace.d; ++k) out << ",z" << k;
  out << ",eps_norm,loss,global_loss,aux";
  for (int k = 0; k < trace.d; ++k) out << ",xstar" << k;
  out << ",f_star,gap";
  for (double r : rhos) out << ',' << rho_column(r);
  out << '\n';

  for (std::size_t s = 0; s < trace.rounds.size(); ++s) {
    const auto& rec = trace.rounds[s];
    for (int i = 0; i < trace.n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      out << rec.t << ',' << i;
      for (int k = 0; k < trace.d; ++k) out << ',' << format_double(rec.x[ui][k]);
      for (int k = 0; k < trace.d; ++k) out << ',' << format_double(rec.z[ui][k]);
      out << ',' << format_double(rec.eps_norm[ui]) << ',' << format_double(rec.local_loss[ui]) << ','
          << format_double(rec.global_loss[ui]) << ',' << format_double(rec.aux.empty() ? 0.0 : rec.aux[ui]);
      for (int k = 0; k < trace.d; ++k) out << ',' << format_double(rec.x_star[k]);
      out << ',' << format_double(rec.f_star) << ',' << format_double(gaps[s]);
      for (const auto& seq : dffr) out << ',' << format_double(seq[s]);
      out << '\n';
    }
  }
}

inline json trace_metadata(const Trace& trace, const ExperimentConfig& cfg, std::uint64_t seed,
                           const std::vector<double>& rhos) {
  return {{"schema_version", kTraceSchemaVersion},
          {"artifact_version", kArtifactVersion},
          {"seed", seed},
          {"created", utc_timestamp()},
          {"algorithm", to_string(trace.kind)},
          {"agents", trace.n},
          {"dim", trace.d},
          {"horizon", trace.horizon()},
          {"rho", rhos},
          {"tail_eps", trace.tail_eps},
          {"config", to_json(cfg)}};
}

/// Writes `<path>` and its sidecar. Returns both paths.
inline std::vector<std::filesystem::path> write_trace(const std::filesystem::path& path, const Trace& trace,
                                                      const ExperimentConfig& cfg, std::uint64_t seed) {
  std::vector<std::filesystem::path> written;
  {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    written.push_back(path);
    write_trace_csv(out, trace, cfg.rho);
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }
  const auto mp = meta_path(path);
  std::ofstream meta(mp);
  if (!meta) throw Error(ErrorCode::IoError, "cannot write " + mp.string());
  written.push_back(mp);
  meta << trace_metadata(trace, cfg, seed, cfg.rho).dump(2) << '\n';
  if (!meta) throw Error(ErrorCode::IoError, "write failed for " + mp.string());
  return written;
}

/// A trace read back from disk with the stored per-round metric columns.
struct LoadedTrace {
  Trace trace;
  std::vector<double> stored_gaps;
  std::vector<double> stored_rho;
  std::vector<std::vector<double>> stored_dffr;  // [rho][t-1]
  json meta;                                     // empty if no sidecar
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Reads a trace CSV. The sidecar is optional; when present its schema
/// version and tail consensus errors are used.
inline LoadedTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string prefix = "# dffr-trace schema=";
  if (line.rfind(prefix, 0) != 0) throw Error(ErrorCode::ParseError, path.string() + ":1: missing trace header");
  if (line != trace_magic())
    throw Error(ErrorCode::SchemaVersionMismatch,
                path.string() + ": trace schema " + line.substr(prefix.size()) + ", expected " +
                    std::to_string(kTraceSchemaVersion));

  LoadedTrace lt;
  const auto mp = meta_path(path);
  if (std::filesystem::exists(mp)) {
    std::ifstream m(mp);
    try {
      lt.meta = json::parse(m);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, mp.string() + ": " + e.what());
    }
    if (lt.meta.value("schema_version", -1) != kTraceSchemaVersion)
      throw Error(ErrorCode::SchemaVersionMismatch, mp.string() + ": sidecar schema version differs");
  }

  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path.string() + ":2: missing column header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv(line);
  auto col = [&](const std::string& name) -> int {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return static_cast<int>(k);
    return -1;
  };
  auto need = [&](const std::string& name) {
    const int c = col(name);
    if (c < 0) throw Error(ErrorCode::ParseError, path.string() + ":2: missing column '" + name + "'");
    return c;
  };
  int d = 0;
  while (col("x" + std::to_string(d)) >= 0) ++d;
  if (d == 0) throw Error(ErrorCode::ParseError, path.string() + ":2: no decision columns");
  const int c_t = need("t"), c_agent = need("agent"), c_gl = need("global_loss"), c_fs = need("f_star");
  const int c_eps = col("eps_norm"), c_loss = col("loss"), c_aux = col("aux"), c_gap = col("gap");
  std::vector<int> c_x, c_z, c_xs;
  for (int k = 0; k < d; ++k) {
    c_x.push_back(need("x" + std::to_string(k)));
    c_z.push_back(col("z" + std::to_string(k)));
    c_xs.push_back(col("xstar" + std::to_string(k)));
  }
  std::vector<int> c_rho;
  for (std::size_t k = 0; k < header.size(); ++k) {
    const auto& h = header[k];
    if (h.rfind("dffr[rho=", 0) == 0 && h.back() == ']') {
      auto r = parse_double(std::string_view(h).substr(9, h.size() - 10));
      if (!r) throw Error(ErrorCode::ParseError, path.string() + ":2: bad column '" + h + "'");
      lt.stored_rho.push_back(*r);
      c_rho.push_back(static_cast<int>(k));
    }
  }
  lt.stored_dffr.resize(lt.stored_rho.size());

  Trace& tr = lt.trace;
  tr.d = d;
  tr.kind = AlgorithmKind::Scripted;
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                             std::to_string(header.size()) + " cells");
    auto num = [&](int c) -> double {
      if (c < 0) return 0.0;
      auto v = parse_double(cells[static_cast<std::size_t>(c)]);
      if (!v)
        throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": bad number in column '" +
                                               header[static_cast<std::size_t>(c)] + "'");
      return *v;
    };
    const int t = static_cast<int>(num(c_t));
    const int agent = static_cast<int>(num(c_agent));
    if (t != tr.horizon() && t != tr.horizon() + 1)
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": rounds out of order");
    if (t == tr.horizon() + 1) {
      RoundRecord rec;
      rec.t = t;
      rec.x_star = Vector(d);
      for (int k = 0; k < d; ++k) rec.x_star[k] = num(c_xs[static_cast<std::size_t>(k)]);
      rec.f_star = num(c_fs);
      tr.rounds.push_back(std::move(rec));
      lt.stored_gaps.push_back(c_gap >= 0 ? num(c_gap) : 0.0);
      for (std::size_t r = 0; r < c_rho.size(); ++r) lt.stored_dffr[r].push_back(num(c_rho[r]));
    }
    auto& rec = tr.rounds.back();
    if (agent != static_cast<int>(rec.x.size()))
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": agents out of order");
    Vector x(d), z(d);
    for (int k = 0; k < d; ++k) {
      x[k] = num(c_x[static_cast<std::size_t>(k)]);
      z[k] = c_z[static_cast<std::size_t>(k)] >= 0 ? num(c_z[static_cast<std::size_t>(k)]) : x[k];
    }
    rec.x.push_back(std::move(x));
    rec.z.push_back(std::move(z));
    rec.eps_norm.push_back(num(c_eps));
    rec.local_loss.push_back(num(c_loss));
    rec.global_loss.push_back(num(c_gl));
    rec.aux.push_back(num(c_aux));
  }
  if (tr.rounds.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no rows");
  tr.n = static_cast<int>(tr.rounds.front().x.size());
  for (const auto& rec : tr.rounds)
    if (static_cast<int>(rec.x.size()) != tr.n)
      throw Error(ErrorCode::ParseError, path.string() + ": round " + std::to_string(rec.t) + " has " +
                                             std::to_string(rec.x.size()) + " agents, expected " +
                                             std::to_string(tr.n));

  if (!lt.meta.is_null()) {
    const int T = lt.meta.value("horizon", -1);
    const int n = lt.meta.value("agents", -1);
    if (T != tr.horizon() || n != tr.n)
      throw Error(ErrorCode::ParseError, path.string() + ": row count " + std::to_string(tr.horizon() * tr.n) +
                                             " does not match sidecar (" + std::to_string(T) + " rounds x " +
                                             std::to_string(n) + " agents)");
    if (lt.meta.contains("tail_eps")) tr.tail_eps = lt.meta["tail_eps"].get<std::vector<double>>();
    const std::string kind = lt.meta.value("algorithm", "scripted");
    for (auto k : {AlgorithmKind::GradientFree, AlgorithmKind::ProjectionFree, AlgorithmKind::ProjectedGD})
      if (to_string(k) == kind) tr.kind = k;
  }
  return lt;
}

}  // namespace dffr::harness
