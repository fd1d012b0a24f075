#include "qalloc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "qalloc/error.hpp"

namespace qalloc {

namespace {

template <typename F>
double mean_of(const std::vector<JobMetrics>& jobs, F&& f) {
  if (jobs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& j : jobs) s += f(j);
  return s / static_cast<double>(jobs.size());
}

}  // namespace

double ExperimentReport::mean_utilization() const {
  if (rounds.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rounds) s += r.utilization;
  return s / static_cast<double>(rounds.size());
}

double ExperimentReport::mean_depth() const {
  return mean_of(jobs, [](const JobMetrics& j) { return static_cast<double>(j.depth); });
}
double ExperimentReport::mean_pst() const {
  return mean_of(jobs, [](const JobMetrics& j) { return j.pst; });
}
double ExperimentReport::mean_cnots() const {
  return mean_of(jobs, [](const JobMetrics& j) { return static_cast<double>(j.cnot_count); });
}
double ExperimentReport::mean_swaps() const {
  return mean_of(jobs, [](const JobMetrics& j) { return static_cast<double>(j.swap_count); });
}

ExperimentReport run_queue(const std::vector<Job>& jobs, const CouplingGraph& g, const CalibrationSnapshot& truth,
                           const CalibrationSnapshot& reported, AllocatorKind allocator,
                           const ComdapOptions& options) {
  for (const Job& j : jobs) {
    j.circuit.validate();
    if (j.size() > g.qubit_count()) {
      throw DataError("job " + std::to_string(j.id) + " needs " + std::to_string(j.size()) + " qubits; device has " +
                      std::to_string(g.qubit_count()));
    }
  }

  ExperimentReport report;
  report.jobs.resize(jobs.size());
  std::vector<char> placed(jobs.size(), 0);
  std::size_t remaining = jobs.size();

  while (remaining > 0) {
    RoundReport round;
    round.round_index = report.rounds.size();
    std::vector<char> free(g.qubit_count(), 1);
    std::size_t free_count = g.qubit_count();

    bool progress = true;
    while (progress && free_count > 0) {
      progress = false;
      for (std::size_t i = 0; i < jobs.size() && free_count > 0; ++i) {
        if (placed[i] || jobs[i].size() > free_count) continue;
        std::vector<Qubit> available;
        available.reserve(free_count);
        for (Qubit q = 0; q < g.qubit_count(); ++q) {
          if (free[q]) available.push_back(q);
        }
        auto part = allocate(allocator, g, reported, {jobs[i].size(), QubitSubset(std::move(available))}, options);
        if (!part) continue;
        for (Qubit q : part->members.members()) free[q] = 0;
        free_count -= part->members.size();
        placed[i] = 1;
        --remaining;
        progress = true;

        const Layout layout = initial_layout(jobs[i].circuit, part->members, g, reported);
        const RoutedCircuit routed = route(jobs[i].circuit, layout, part->members, g);
        report.jobs[i] = JobMetrics{jobs[i].id,        round.round_index,   jobs[i].size(),
                                    depth(routed),     routed.cnot_count(), routed.swap_count,
                                    pst_estimate(routed, g, truth)};
        round.placed.push_back({jobs[i].id, std::move(*part)});
      }
    }
    if (round.placed.empty()) {
      throw DataError("no remaining job can be placed on an empty device (allocator " +
                      std::string(to_string(allocator)) + ")");
    }
    round.active_qubits = g.qubit_count() - free_count;
    round.utilization = static_cast<double>(round.active_qubits) / static_cast<double>(g.qubit_count());
    report.rounds.push_back(std::move(round));
  }
  return report;
}

std::vector<Job> gen_workload(const WorkloadSpec& spec) {
  if (spec.size_min < 1 || spec.size_min > spec.size_max) {
    throw ConfigError("workload sizes must satisfy 1 <= size_min <= size_max");
  }
  if (!(spec.gate_density >= 0.0)) throw ConfigError("workload gate_density must be non-negative");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> size_dist(spec.size_min, spec.size_max);
  std::vector<Job> jobs;
  jobs.reserve(spec.count);
  for (std::size_t id = 0; id < spec.count; ++id) {
    Job job{id, {}};
    const std::size_t n = size_dist(rng);
    job.circuit.qubit_count = n;
    for (Qubit q = 0; q < n; ++q) job.circuit.gates.push_back({GateKind::OneQubit, q, 0});
    if (n >= 2) {
      const auto cx = static_cast<std::size_t>(std::ceil(spec.gate_density * static_cast<double>(n)));
      std::uniform_int_distribution<Qubit> first(0, static_cast<Qubit>(n - 1));
      std::uniform_int_distribution<Qubit> second(0, static_cast<Qubit>(n - 2));
      for (std::size_t k = 0; k < cx; ++k) {
        const Qubit a = first(rng);
        Qubit b = second(rng);
        if (b >= a) ++b;
        job.circuit.gates.push_back({GateKind::TwoQubit, a, b});
      }
    }
    for (Qubit q = 0; q < n; ++q) job.circuit.gates.push_back({GateKind::Measure, q, 0});
    jobs.push_back(std::move(job));
  }
  return jobs;
}

}  // namespace qalloc
