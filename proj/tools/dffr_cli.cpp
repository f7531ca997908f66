// dffr: run, sweep and inspect distributed online optimization experiments.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dffr/harness.hpp"

namespace {

using namespace dffr;
using namespace dffr::harness;

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  auto num = [&](const std::string& s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw Error(ErrorCode::InvalidArgument, "bad seed '" + s + "'");
    return v;
  };
  if (dots == std::string::npos) return {num(text)};
  const auto lo = num(text.substr(0, dots)), hi = num(text.substr(dots + 2));
  if (hi < lo) throw Error(ErrorCode::InvalidArgument, "seed range " + text + " is empty");
  std::vector<std::uint64_t> out;
  for (auto s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    auto v = parse_double(cell);
    if (!v) throw Error(ErrorCode::InvalidArgument, "bad number '" + cell + "'");
    out.push_back(*v);
  }
  return out;
}

ExperimentConfig load(const std::string& config, const std::string& preset_name) {
  if (!config.empty()) return parse_config(config);
  return preset(preset_name);
}

void print_optional(std::ostream& os, const std::optional<int>& v) {
  if (v) os << *v;
  else os << "never";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed online optimization under forgetting-factor regret"};
  app.require_subcommand(1);

  std::string config, preset_name, out_dir, seed, seeds, param, values, trace_path, rho_list;

  auto* run = app.add_subcommand("run", "Run an experiment and write traces, summary.json and curves.csv");
  auto* run_src = run->add_option_group("source");
  run_src->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
  run_src->add_option("--preset", preset_name, "Built-in preset name");
  run_src->require_option(1);
  auto* seed_grp = run->add_option_group("seeds");
  seed_grp->add_option("--seed", seed, "Single seed");
  seed_grp->add_option("--seeds", seeds, "Seed range N..M");
  seed_grp->require_option(0, 1);
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* sw = app.add_subcommand("sweep", "Sweep one parameter and print a CSV table");
  auto* sw_src = sw->add_option_group("source");
  sw_src->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
  sw_src->add_option("--preset", preset_name, "Built-in preset name");
  sw_src->require_option(1);
  sw->add_option("--param", param, "rho | delta | alpha0 | alpha_schedule_scale | omega")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--seeds", seeds, "Seed range N..M");
  sw->add_option("--out", out_dir, "Write the table here instead of stdout");

  auto* met = app.add_subcommand("metrics", "Recompute metrics from a stored trace");
  met->add_option("--trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  met->add_option("--rho", rho_list, "Comma-separated forgetting factors")->required();

  auto* val = app.add_subcommand("validate", "Check a config file");
  val->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);

  auto* pre = app.add_subcommand("preset", "Print a preset as a JSON config");
  pre->add_option("name", preset_name, "Preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto cfg = load(config, preset_name);
      if (!seed.empty()) cfg.seeds = parse_seed_range(seed);
      if (!seeds.empty()) cfg.seeds = parse_seed_range(seeds);
      const auto res = run_experiment(cfg, out_dir);
      std::cout << res.summary.dump(2) << '\n';
    } else if (sw->parsed()) {
      auto cfg = load(config, preset_name);
      if (!seeds.empty()) cfg.seeds = parse_seed_range(seeds);
      const auto rows = sweep(cfg, param, parse_list(values));
      if (out_dir.empty()) {
        write_sweep_csv(std::cout, param, rows);
      } else {
        std::ofstream out(out_dir);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_dir);
        write_sweep_csv(out, param, rows);
      }
    } else if (met->parsed()) {
      const auto m = recompute_metrics(trace_path, parse_list(rho_list));
      std::cout << "rounds " << m.horizon << ", agents " << m.agents << '\n';
      for (std::size_t k = 0; k < m.rho.size(); ++k)
        std::cout << "dffr[rho=" << format_double(m.rho[k]) << "] " << format_double(m.final_dffr[k]) << '\n';
      std::cout << "cumulative_regret " << format_double(m.cumulative_regret) << '\n';
      std::cout << "final_gap " << format_double(m.final_gap) << '\n';
      std::cout << "consensus_time ";
      print_optional(std::cout, m.consensus_time);
      std::cout << "\ntracking_time ";
      print_optional(std::cout, m.tracking_time);
      std::cout << '\n';
      if (m.stored_max_abs_diff)
        std::cout << "stored_dffr_max_abs_diff " << format_double(*m.stored_max_abs_diff) << '\n';
    } else if (val->parsed()) {
      const auto cfg = parse_config(config);
      std::cout << "ok: " << (cfg.name.empty() ? config : cfg.name) << '\n';
    } else if (pre->parsed()) {
      std::cout << to_json(preset(preset_name)).dump(2) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
