// qalloc: multi-tenant allocation experiments under misreported calibration.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qalloc/adversary.hpp"
#include "qalloc/calibration.hpp"
#include "qalloc/defense.hpp"
#include "qalloc/error.hpp"
#include "qalloc/experiment.hpp"
#include "qalloc/scheduler.hpp"
#include "qalloc/topology.hpp"
#include "qalloc/transpile.hpp"

using nlohmann::json;
using namespace qalloc;

namespace {

std::uint64_t parse_u64(std::string_view s, const std::string& what) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw ConfigError(what + ": bad integer '" + std::string(s) + "'");
  return v;
}

/// "1-20", "3,5,9" or a mix: "1-4,10".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(parse_u64(item, "--seeds"));
    } else {
      const auto lo = parse_u64(item.substr(0, dash), "--seeds");
      const auto hi = parse_u64(item.substr(dash + 1), "--seeds");
      if (hi < lo) throw ConfigError("--seeds: descending range");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  if (out.empty()) throw ConfigError("--seeds: at least one seed required");
  return out;
}

CycleRange parse_window(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError(std::string(flag) + ": expected FIRST:LAST");
  return {parse_u64(std::string_view(text).substr(0, colon), flag),
          parse_u64(std::string_view(text).substr(colon + 1), flag)};
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

struct RunFlags {
  std::string config;
  std::string preset;
  std::string topology;
  std::string allocator;
  std::string weighting;
  std::string attack;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON config, or a saved report to re-run");
  cmd->add_option("--preset", f.preset, "hanoi-h1 | hanoi-h2");
  cmd->add_option("--topology", f.topology, "hanoi27 or an edge-list file");
  cmd->add_option("--allocator", f.allocator, "greedy | comdap");
  cmd->add_option("--weighting", f.weighting, "community edge weighting: fidelity | uniform");
  cmd->add_option("--attack", f.attack, "none | H1:<n>:<k> | H2:<k1>,<k2>,... | plan:<file>");
  cmd->add_option("--seed", f.seed, "workload seed");
}

ExperimentConfig resolve(const RunFlags& f) {
  if (!f.config.empty() && !f.preset.empty()) throw ConfigError("--config and --preset are mutually exclusive");
  ExperimentConfig c = !f.config.empty() ? load_config(f.config) : !f.preset.empty() ? preset(f.preset) : ExperimentConfig{};
  if (!f.topology.empty()) c.topology = f.topology;
  if (!f.allocator.empty()) c.allocator = parse_allocator(f.allocator);
  if (!f.weighting.empty()) c.community_weighting = parse_edge_weighting(f.weighting);
  if (!f.attack.empty()) c.attack = AttackSpec::parse(f.attack);
  if (f.seed) c.workload.seed = *f.seed;
  c.validate();
  return c;
}

int cmd_simulate(const RunFlags& f) {
  ExperimentConfig c = resolve(f);
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    c.outputs.report = (std::filesystem::path(f.out) / "report.json").string();
    c.outputs.rounds_csv = (std::filesystem::path(f.out) / "rounds.csv").string();
    c.outputs.jobs_csv = (std::filesystem::path(f.out) / "jobs.csv").string();
  }
  const SimulationResult r = simulate(c);
  emit(c.outputs.report, report_to_json(r));
  if (!c.outputs.rounds_csv.empty()) write_file_atomic(c.outputs.rounds_csv, rounds_csv(r));
  if (!c.outputs.jobs_csv.empty()) write_file_atomic(c.outputs.jobs_csv, jobs_csv(r));
  if (!c.outputs.report.empty()) {
    std::cerr << "rounds " << r.baseline.total_rounds() << " -> " << r.attacked.total_rounds() << ", depth "
              << r.comparison.depth_change_pct << "%, pst " << r.comparison.pst_change_pct << "%\n";
  }
  return 0;
}

int cmd_sweep(const RunFlags& f, const std::string& seeds_text) {
  const ExperimentConfig c = resolve(f);
  const auto seeds = parse_seeds(seeds_text);
  const auto rows = sweep(c, seeds);
  emit(f.out, sweep_csv(rows));
  return 0;
}

struct PlanFlags {
  std::string topology = "hanoi27";
  std::string heuristic = "H1";
  std::size_t n = 3;
  double k = 0.15;
  std::vector<double> ks{0.15, 0.12, 0.10};
  std::string out;
};

int cmd_attack_plan(const PlanFlags& f) {
  const CouplingGraph g = load_topology(f.topology);
  const Heuristic h = parse_heuristic(f.heuristic);
  const MisreportPlan plan = h == Heuristic::H1 ? make_h1_plan(g, f.n, f.k) : make_h2_plan(g, f.ks);
  json doc = json::parse(plan_to_json(plan, -1));
  doc["topology"] = f.topology;
  if (h == Heuristic::H1) {
    std::vector<Qubit> pool = max_degree_qubits(g);
    std::stable_sort(pool.begin(), pool.end(),
                     [&](Qubit a, Qubit b) { return path_spread_key(g, a) < path_spread_key(g, b); });
    json ranking = json::array();
    for (Qubit q : pool) ranking.push_back({{"qubit", q}, {"sigma", path_stddev(g, q)}});
    doc["ranking"] = std::move(ranking);
  }
  emit(f.out, doc.dump(2) + "\n");
  return 0;
}

struct DetectFlags {
  std::string series;
  std::string topology = "hanoi27";
  std::string w1;
  std::string w2;
  std::size_t bins = 10;
  double eps = 1e-9;
  std::optional<double> tau;
  double percentile = 95.0;
  double cv = 0.30;
  std::size_t runs = 200;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_detect(const DetectFlags& f) {
  const CouplingGraph g = load_topology(f.topology);
  const CalibrationSeries series = load_calibration_csv(read_file(f.series), g);
  const CycleRange w1 = parse_window(f.w1, "--window1");
  const CycleRange w2 = parse_window(f.w2, "--window2");
  DetectionParams params{f.bins, f.eps, 0.0};
  std::string tau_source = "given";
  if (f.tau) {
    params.tau = *f.tau;
  } else {
    std::vector<CalibrationSnapshot> history;
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto c = series[i].cycle_id();
      if (c >= w1.first && c <= w1.last) history.push_back(series[i]);
    }
    if (history.empty()) throw DataError("--window1 holds no cycles");
    const CalibrationSnapshot base = mean_snapshot(g, history, series[0].cycle_id());
    const std::uint64_t span = std::max(w1.last, w2.last) - series[0].cycle_id() + 1;
    std::vector<DetectionVerdict> honest;
    for (std::size_t r = 0; r < f.runs; ++r) {
      const auto drift = synth_drift(g, base, span, f.cv, f.seed + r);
      honest.push_back(detect(drift, w1, w2, params));
    }
    params.tau = calibrate_threshold(honest, f.percentile);
    tau_source = "honest synthetic drift";
  }
  const DetectionVerdict v = detect(series, w1, w2, params);
  json qubits = json::array();
  for (const auto& q : v.qubits) {
    qubits.push_back({{"qubit", q.qubit}, {"divergence", q.divergence}, {"flagged", q.flagged}, {"tau", v.tau}});
  }
  json params_json{{"bins", params.bins},  {"eps", params.eps},       {"tau", params.tau},
                   {"tau_source", tau_source}, {"window1", {w1.first, w1.last}}, {"window2", {w2.first, w2.last}}};
  if (!f.tau) {
    params_json["percentile"] = f.percentile;
    params_json["cv"] = f.cv;
    params_json["runs"] = f.runs;
    params_json["seed"] = f.seed;
  }
  json doc{{"series", f.series},
           {"topology", f.topology},
           {"params", std::move(params_json)},
           {"flagged", v.flagged()},
           {"qubits", std::move(qubits)},
           {"note", "detection rates are properties of the synthetic lognormal drift model"}};
  emit(f.out, doc.dump(2) + "\n");
  return 0;
}

struct SynthFlags {
  std::string topology = "hanoi27";
  std::size_t cycles = 14;
  double cv = 0.30;
  double cnot = 0.02;
  double readout = 0.02;
  std::uint64_t seed = 1;
  std::string plan;
  std::uint64_t inject_from = 0;
  std::string out;
};

int cmd_synth(const SynthFlags& f) {
  const CouplingGraph g = load_topology(f.topology);
  const auto base = CalibrationSnapshot::uniform(g, f.cnot, f.readout);
  CalibrationSeries series = synth_drift(g, base, f.cycles, f.cv, f.seed);
  if (!f.plan.empty()) {
    const MisreportPlan plan = plan_from_json(read_file(f.plan));
    std::vector<CalibrationSnapshot> snaps(series.snapshots().begin(), series.snapshots().end());
    for (auto& s : snaps) {
      if (s.cycle_id() >= f.inject_from) s = apply_misreport(s, g, plan);
    }
    series = CalibrationSeries(g, std::move(snaps));
  }
  emit(f.out, write_calibration_csv(series));
  return 0;
}

struct WorkloadFlags {
  WorkloadSpec spec;
  std::string out = "workload";
};

int cmd_gen_workload(const WorkloadFlags& f) {
  const auto jobs = gen_workload(f.spec);
  std::filesystem::create_directories(f.out);
  json files = json::array();
  for (const Job& j : jobs) {
    char name[32];
    std::snprintf(name, sizeof name, "job_%03zu.qasm", j.id);
    const auto path = (std::filesystem::path(f.out) / name).string();
    write_file_atomic(path, to_qasm(j.circuit));
    files.push_back(path);
  }
  json manifest{{"generator",
                 {{"count", f.spec.count},
                  {"size_min", f.spec.size_min},
                  {"size_max", f.spec.size_max},
                  {"gate_density", f.spec.gate_density},
                  {"seed", f.spec.seed}}},
                {"qasm_files", std::move(files)}};
  write_file_atomic((std::filesystem::path(f.out) / "manifest.json").string(), manifest.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-tenant qubit allocation under misreported calibration data"};
  app.require_subcommand(1);

  RunFlags sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "baseline vs attacked queue run");
  add_run_flags(simulate_cmd, sim);
  simulate_cmd->add_option("--out", sim.out, "directory for report.json, rounds.csv, jobs.csv");

  RunFlags sw;
  std::string seeds = "1-20";
  auto* sweep_cmd = app.add_subcommand("sweep", "simulate over many workload seeds");
  add_run_flags(sweep_cmd, sw);
  sweep_cmd->add_option("--seeds", seeds, "seed list, e.g. 1-20 or 1,4,9")->capture_default_str();
  sweep_cmd->add_option("--out", sw.out, "CSV output (stdout if omitted)");

  PlanFlags pf;
  auto* plan_cmd = app.add_subcommand("attack-plan", "choose misreport targets");
  plan_cmd->add_option("--topology", pf.topology)->capture_default_str();
  plan_cmd->add_option("--heuristic", pf.heuristic, "H1 | H2")->capture_default_str();
  plan_cmd->add_option("--n", pf.n, "H1 target count")->capture_default_str();
  plan_cmd->add_option("--k", pf.k, "H1 over-report fraction")->capture_default_str();
  plan_cmd->add_option("--ks", pf.ks, "H2 under-report fractions, strictly decreasing")->delimiter(',');
  plan_cmd->add_option("--out", pf.out, "JSON output (stdout if omitted)");

  DetectFlags df;
  auto* detect_cmd = app.add_subcommand("detect", "KL divergence between two calibration windows");
  detect_cmd->add_option("--series", df.series, "calibration CSV")->required();
  detect_cmd->add_option("--topology", df.topology)->capture_default_str();
  detect_cmd->add_option("--window1", df.w1, "historical cycles FIRST:LAST")->required();
  detect_cmd->add_option("--window2", df.w2, "recent cycles FIRST:LAST")->required();
  detect_cmd->add_option("--bins", df.bins)->capture_default_str();
  detect_cmd->add_option("--eps", df.eps)->capture_default_str();
  detect_cmd->add_option("--tau", df.tau, "threshold; calibrated from honest synthetic drift if omitted");
  detect_cmd->add_option("--percentile", df.percentile)->capture_default_str();
  detect_cmd->add_option("--cv", df.cv, "natural drift cv for calibration")->capture_default_str();
  detect_cmd->add_option("--runs", df.runs, "honest calibration runs")->capture_default_str();
  detect_cmd->add_option("--seed", df.seed)->capture_default_str();
  detect_cmd->add_option("--out", df.out, "JSON output (stdout if omitted)");

  SynthFlags sf;
  auto* synth_cmd = app.add_subcommand("synth-calibration", "synthetic drifting calibration history");
  synth_cmd->add_option("--topology", sf.topology)->capture_default_str();
  synth_cmd->add_option("--cycles", sf.cycles)->capture_default_str();
  synth_cmd->add_option("--cv", sf.cv)->capture_default_str();
  synth_cmd->add_option("--cnot", sf.cnot)->capture_default_str();
  synth_cmd->add_option("--readout", sf.readout)->capture_default_str();
  synth_cmd->add_option("--seed", sf.seed)->capture_default_str();
  synth_cmd->add_option("--plan", sf.plan, "misreport plan applied from --inject-from onwards");
  synth_cmd->add_option("--inject-from", sf.inject_from)->capture_default_str();
  synth_cmd->add_option("--out", sf.out, "CSV output (stdout if omitted)");

  WorkloadFlags wf;
  auto* workload_cmd = app.add_subcommand("gen-workload", "write synthetic circuits as QASM");
  workload_cmd->add_option("--count", wf.spec.count)->capture_default_str();
  workload_cmd->add_option("--size-min", wf.spec.size_min)->capture_default_str();
  workload_cmd->add_option("--size-max", wf.spec.size_max)->capture_default_str();
  workload_cmd->add_option("--density", wf.spec.gate_density, "CNOTs per qubit")->capture_default_str();
  workload_cmd->add_option("--seed", wf.spec.seed)->capture_default_str();
  workload_cmd->add_option("--out", wf.out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim);
    if (*sweep_cmd) return cmd_sweep(sw, seeds);
    if (*plan_cmd) return cmd_attack_plan(pf);
    if (*detect_cmd) return cmd_detect(df);
    if (*synth_cmd) return cmd_synth(sf);
    if (*workload_cmd) return cmd_gen_workload(wf);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
