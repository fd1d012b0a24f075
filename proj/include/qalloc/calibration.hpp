#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qalloc/topology.hpp"

namespace qalloc {

/// Error rates for one calibration cycle. CNOT errors are indexed by the
/// graph's canonical edge index, readout errors by qubit.
class CalibrationSnapshot {
 public:
  CalibrationSnapshot(const CouplingGraph& g, std::uint64_t cycle_id, std::vector<double> cnot_error,
                      std::vector<double> readout_error);

  static CalibrationSnapshot uniform(const CouplingGraph& g, double cnot_error, double readout_error,
                                     std::uint64_t cycle_id = 0);

  std::uint64_t cycle_id() const noexcept { return cycle_id_; }
  void set_cycle_id(std::uint64_t id) noexcept { cycle_id_ = id; }

  std::span<const double> cnot_errors() const noexcept { return cnot_; }
  std::span<const double> readout_errors() const noexcept { return readout_; }
  double cnot_error(std::size_t edge) const { return cnot_.at(edge); }
  double cnot_error(const CouplingGraph& g, Qubit a, Qubit b) const;
  double readout_error(Qubit q) const { return readout_.at(q); }

  /// Setters reject values outside [0,1].
  void set_cnot_error(std::size_t edge, double value);
  void set_readout_error(Qubit q, double value);

  friend bool operator==(const CalibrationSnapshot&, const CalibrationSnapshot&) = default;

 private:
  std::uint64_t cycle_id_;
  std::vector<double> cnot_;
  std::vector<double> readout_;
};

/// Snapshots with strictly increasing cycle ids over one graph.
class CalibrationSeries {
 public:
  CalibrationSeries(CouplingGraph graph, std::vector<CalibrationSnapshot> snapshots);

  const CouplingGraph& graph() const noexcept { return graph_; }
  std::span<const CalibrationSnapshot> snapshots() const noexcept { return snapshots_; }
  std::size_t size() const noexcept { return snapshots_.size(); }
  const CalibrationSnapshot& operator[](std::size_t i) const { return snapshots_.at(i); }

 private:
  CouplingGraph graph_;
  std::vector<CalibrationSnapshot> snapshots_;
};

/// Mean CNOT error over the edges incident to q. Incident values are summed in
/// ascending order, so the result depends only on their multiset.
/// Throws DataError for an isolated qubit.
double avg_cnot_error(const CalibrationSnapshot& snap, const CouplingGraph& g, Qubit q);

/// Parses the `cycle,kind,subject,value` schema. Every diagnostic names its line.
CalibrationSeries load_calibration_csv(std::string_view text, const CouplingGraph& g);
std::string write_calibration_csv(const CalibrationSeries& series);

/// Lognormal multiplicative drift: each cycle and edge gets
/// clamp(base · exp(s·z), 0, 1) with z ~ N(0,1) and s = sqrt(ln(1 + cv²)), so the
/// unclamped factor has coefficient of variation cv. Readout errors stay at base.
/// Cycle ids run base.cycle_id() .. base.cycle_id() + cycles − 1.
CalibrationSeries synth_drift(const CouplingGraph& g, const CalibrationSnapshot& base, std::size_t cycles,
                              double cv, std::uint64_t seed);

/// Coefficient of variation (population) of avg_cnot_error(q) across the
/// series, in percent. Throws DataError for fewer than 2 cycles or zero mean.
double fluctuation_percent(const CalibrationSeries& series, Qubit q);

/// Per-edge / per-qubit arithmetic mean of a range of snapshots.
CalibrationSnapshot mean_snapshot(const CouplingGraph& g, std::span<const CalibrationSnapshot> snaps,
                                  std::uint64_t cycle_id = 0);

}  // namespace qalloc
