#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qalloc/allocation.hpp"
#include "qalloc/calibration.hpp"
#include "qalloc/topology.hpp"
#include "qalloc/transpile.hpp"

namespace qalloc {

struct Job {
  std::size_t id = 0;
  LogicalCircuit circuit;

  std::size_t size() const noexcept { return circuit.qubit_count; }
};

struct PlacedJob {
  std::size_t job_id;
  Partition partition;
};

struct RoundReport {
  std::size_t round_index = 0;
  std::vector<PlacedJob> placed;
  std::size_t active_qubits = 0;
  double utilization = 0.0;  ///< active_qubits / device qubits
};

struct JobMetrics {
  std::size_t job_id = 0;
  std::size_t round = 0;
  std::size_t size = 0;
  std::size_t depth = 0;
  std::size_t cnot_count = 0;
  std::size_t swap_count = 0;
  double pst = 0.0;
};

struct ExperimentReport {
  std::vector<RoundReport> rounds;
  std::vector<JobMetrics> jobs;  ///< in queue order

  std::size_t total_rounds() const noexcept { return rounds.size(); }
  double mean_utilization() const;
  double mean_depth() const;
  double mean_pst() const;
  double mean_cnots() const;
  double mean_swaps() const;
};

/// Round-based multi-tenant execution. Each round starts with every qubit
/// free and repeatedly scans the unplaced jobs in queue order, allocating
/// against `reported` and skipping jobs that do not fit; the round closes when
/// a scan places nothing. Placed jobs are laid out and routed with `reported`
/// and scored for PST with `truth`.
///
/// Throws DataError for a job larger than the device or one that cannot be
/// placed even on an empty device.
ExperimentReport run_queue(const std::vector<Job>& jobs, const CouplingGraph& g, const CalibrationSnapshot& truth,
                           const CalibrationSnapshot& reported, AllocatorKind allocator,
                           const ComdapOptions& options = {});

struct WorkloadSpec {
  std::size_t count = 40;
  std::size_t size_min = 2;
  std::size_t size_max = 10;
  double gate_density = 2.0;  ///< two-qubit gates per qubit
  std::uint64_t seed = 1;
};

/// Seeded synthetic circuits: uniform size in [size_min, size_max], an H on
/// every qubit, ceil(gate_density · size) CNOTs over uniformly drawn distinct
/// pairs, then a measurement of every qubit.
std::vector<Job> gen_workload(const WorkloadSpec& spec);

}  // namespace qalloc
