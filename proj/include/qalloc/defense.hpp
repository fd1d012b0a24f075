#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qalloc/calibration.hpp"
#include "qalloc/topology.hpp"

namespace qalloc {

/// Smoothed histogram over shared bin edges.
struct ErrorDistribution {
  std::vector<double> bin_edges;      ///< ascending, size = probabilities.size() + 1
  std::vector<double> probabilities;  ///< sums to 1
};

/// Equal-width edges spanning [lo, hi].
std::vector<double> equal_width_edges(double lo, double hi, std::size_t bins);

/// Histogram of samples (bins are half-open except the last, which is closed),
/// normalised, then eps added to every bin and renormalised.
/// Throws DataError for a sample outside the edges, fewer than two edges or no samples.
ErrorDistribution build_distribution(std::span<const double> samples, std::span<const double> bin_edges,
                                     double eps);

/// D_KL(P || Q) = Σ P log(P/Q), natural log. Terms with P = 0 contribute 0.
/// Throws DataError for mismatched bins or Q = 0 where P > 0.
double kl_divergence(const ErrorDistribution& p, const ErrorDistribution& q);

/// Inclusive range of cycle ids.
struct CycleRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

struct DetectionParams {
  std::size_t bins = 10;
  double eps = 1e-9;
  double tau = 0.0;
};

struct QubitDivergence {
  Qubit qubit = 0;
  double divergence = 0.0;
  bool flagged = false;
};

struct DetectionVerdict {
  std::vector<QubitDivergence> qubits;  ///< every qubit with at least one coupling edge, ascending
  double tau = 0.0;

  std::vector<Qubit> flagged() const;
};

/// Per qubit: the average CNOT error in each cycle of the two windows,
/// histogrammed over shared equal-width bins spanning the pooled range, then
/// D_KL(window1 || window2). A qubit whose pooled values are all equal has
/// divergence 0. Flags divergence > tau. Qubits are processed in parallel.
///
/// Throws DataError if the windows overlap or either holds fewer than 3 cycles.
DetectionVerdict detect(const CalibrationSeries& history, CycleRange window1, CycleRange window2,
                        const DetectionParams& params);

/// Pooled per-qubit divergences of every run; the given percentile by the
/// nearest-rank rule (sorted[ceil(p/100 · N) − 1], p = 0 → minimum).
/// Throws DataError for fewer than 30 runs.
double calibrate_threshold(std::span<const DetectionVerdict> honest_runs, double percentile);

/// The simple bound check: a qubit is flagged when any cycle's average CNOT
/// error deviates from that qubit's series mean by more than `relative_bound`.
std::vector<Qubit> threshold_detector_flags(const CalibrationSeries& series, double relative_bound);

/// Gaussian KDE (Silverman bandwidth) evaluated at `grid`. Presentation only.
std::vector<double> gaussian_kde(std::span<const double> samples, std::span<const double> grid);

namespace serial {

/// Single-threaded reference for qalloc::detect.
DetectionVerdict detect(const CalibrationSeries& history, CycleRange window1, CycleRange window2,
                        const DetectionParams& params);

}  // namespace serial

}  // namespace qalloc
