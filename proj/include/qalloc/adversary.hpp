#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qalloc/calibration.hpp"
#include "qalloc/topology.hpp"

namespace qalloc {

enum class Heuristic { H1, H2 };
std::string_view to_string(Heuristic h);
Heuristic parse_heuristic(std::string_view name);  ///< throws ConfigError

struct MisreportTarget {
  Qubit qubit = 0;
  double delta = 0.0;     ///< relative perturbation; +0.15 over-reports by 15%
  double evidence = 0.0;  ///< H1: path stddev σ_q. H2: min hop distance to earlier targets (0 for the first)
};

/// The adversary's plan: which qubits to misreport and by how much.
/// H1 deltas are all positive; H2 deltas are negative with strictly
/// decreasing magnitude.
struct MisreportPlan {
  Heuristic heuristic = Heuristic::H1;
  std::vector<MisreportTarget> targets;

  std::size_t n() const noexcept { return targets.size(); }
  /// Throws ConfigError if the sign/ordering rules above are violated.
  void validate() const;
};

/// Qubits of maximum degree, ascending.
std::vector<Qubit> max_degree_qubits(const CouplingGraph& g);

/// Among the maximum-degree qubits, the n with the lowest path stddev in
/// ascending σ order (exact ties to the lower index).
std::vector<Qubit> heuristic1_targets(const CouplingGraph& g, std::size_t n);

/// Max-min dispersion over the maximum-degree qubits. The first pick is the
/// lowest-index candidate; each later pick maximises its minimum hop distance
/// to the picks so far. Ties prefer the candidate farther from earlier picks,
/// compared in pick order, then the lower index.
std::vector<Qubit> heuristic2_targets(const CouplingGraph& g, std::size_t n);

MisreportPlan make_h1_plan(const CouplingGraph& g, std::size_t n, double k);
MisreportPlan make_h2_plan(const CouplingGraph& g, const std::vector<double>& ks);

/// Reported snapshot: each edge incident to a target is scaled by (1 + δ) and
/// clamped to [0,1]. An edge between two targets uses the larger |δ| once.
/// Readout errors and all other edges are copied untouched.
CalibrationSnapshot apply_misreport(const CalibrationSnapshot& truth, const CouplingGraph& g,
                                    const MisreportPlan& plan);

/// JSON form: {"heuristic":"H1","n":3,"targets":[{"qubit":12,"delta":0.15,"sigma":1.6}, ...]}.
/// H2 targets carry "min_distance" instead of "sigma".
std::string plan_to_json(const MisreportPlan& plan, int indent = 2);
MisreportPlan plan_from_json(std::string_view text);  ///< throws ConfigError

}  // namespace qalloc
