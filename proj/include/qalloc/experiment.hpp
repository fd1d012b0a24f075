#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qalloc/adversary.hpp"
#include "qalloc/allocation.hpp"
#include "qalloc/scheduler.hpp"

namespace qalloc {

struct AttackSpec {
  enum class Kind { None, H1, H2, PlanFile };
  Kind kind = Kind::None;
  std::size_t n = 3;                            ///< H1 target count
  double k = 0.15;                              ///< H1 over-report fraction
  std::vector<double> ks{0.15, 0.12, 0.10};     ///< H2 under-report fractions, strictly decreasing
  std::string plan_file;                        ///< PlanFile: JSON written by `attack-plan`

  /// "none", "H1:<n>:<k>", "H2:<k1>,<k2>,...", or "plan:<file>".
  static AttackSpec parse(std::string_view text);
  std::string to_string() const;
};

/// Everything needed to reproduce a run. Serialises to a JSON object whose
/// keys mirror the fields; every default is written out.
struct ExperimentConfig {
  std::string topology = "hanoi27";     ///< "hanoi27" or an edge-list file
  double base_cnot_error = 0.02;        ///< uniform true errors unless base_snapshot is set
  double base_readout_error = 0.02;
  std::string base_snapshot;            ///< calibration CSV; its first cycle is the truth
  AllocatorKind allocator = AllocatorKind::Greedy;
  EdgeWeighting community_weighting = EdgeWeighting::Fidelity;
  AttackSpec attack;
  WorkloadSpec workload;
  std::vector<std::string> qasm_files;  ///< replaces the generator when non-empty
  double natural_cv = 0.30;             ///< attack magnitudes may not exceed this

  struct Outputs {
    std::string report;
    std::string rounds_csv;
    std::string jobs_csv;
  } outputs;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

std::string config_to_json(const ExperimentConfig& c, int indent = 2);
ExperimentConfig config_from_json(std::string_view text);  ///< throws ConfigError

/// Reads a config file. A saved report is accepted too: its embedded
/// "config" object is used, which makes any report re-runnable.
ExperimentConfig load_config(const std::string& path);

/// Named presets: "hanoi-h1" (Greedy, H1 n=3 k=0.15) and "hanoi-h2"
/// (Greedy, H2 k=0.15/0.12/0.10), both on hanoi27 with 40 jobs of 2–10 qubits.
ExperimentConfig preset(std::string_view name);
std::vector<std::string> preset_names();

struct Comparison {
  double delta_rounds = 0.0;       ///< attacked − baseline
  double delta_utilization = 0.0;  ///< baseline − attacked mean utilization (a drop is positive)
  double depth_change_pct = 0.0;   ///< relative change of mean depth
  double pst_change_pct = 0.0;     ///< relative change of mean PST (a loss is negative)
};

struct SimulationResult {
  ExperimentConfig config;
  std::optional<MisreportPlan> plan;
  ExperimentReport baseline;
  ExperimentReport attacked;
  Comparison comparison;
};

/// Runs the queue twice on identical workload and true errors: once with
/// the truth reported, once with the misreported snapshot.
SimulationResult simulate(const ExperimentConfig& config);

std::string report_to_json(const SimulationResult& r, int indent = 2);
/// round,leg,placed,active,utilization
std::string rounds_csv(const SimulationResult& r);
/// leg,id,round,size,depth,cnots,swaps,pst
std::string jobs_csv(const SimulationResult& r);

struct SweepRow {
  std::uint64_t seed = 0;
  std::size_t baseline_rounds = 0;
  std::size_t attacked_rounds = 0;
  double baseline_utilization = 0.0;
  double attacked_utilization = 0.0;
  double baseline_depth = 0.0;
  double attacked_depth = 0.0;
  double baseline_pst = 0.0;
  double attacked_pst = 0.0;
  Comparison comparison;
};

SweepRow summarize(std::uint64_t seed, const SimulationResult& r);

/// One simulate per seed (the seed replaces workload.seed). Seeds run in parallel.
std::vector<SweepRow> sweep(const ExperimentConfig& config, std::span<const std::uint64_t> seeds);

/// Per-seed rows followed by "mean" and "std" rows.
std::string sweep_csv(std::span<const SweepRow> rows);

namespace serial {
std::vector<SweepRow> sweep(const ExperimentConfig& config, std::span<const std::uint64_t> seeds);
}

/// Writes to a temporary sibling then renames over the target.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);  ///< throws ConfigError if unreadable

}  // namespace qalloc
