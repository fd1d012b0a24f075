#include "qalloc/defense.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qalloc/error.hpp"

namespace qalloc {

std::vector<double> equal_width_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0) throw DataError("histogram needs at least one bin");
  if (!(hi > lo)) throw DataError("histogram range must be non-empty");
  std::vector<double> edges(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + width * static_cast<double>(i);
  edges.back() = hi;
  return edges;
}

ErrorDistribution build_distribution(std::span<const double> samples, std::span<const double> bin_edges, double eps) {
  if (bin_edges.size() < 2) throw DataError("distribution needs at least two bin edges");
  if (samples.empty()) throw DataError("distribution needs at least one sample");
  if (!(eps >= 0.0)) throw DataError("smoothing eps must be non-negative");
  const std::size_t bins = bin_edges.size() - 1;
  std::vector<double> counts(bins, 0.0);
  for (double x : samples) {
    if (!(x >= bin_edges.front() && x <= bin_edges.back())) {
      throw DataError("sample " + std::to_string(x) + " outside histogram range");
    }
    auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), x);
    std::size_t bin = static_cast<std::size_t>(it - bin_edges.begin());
    bin = bin == 0 ? 0 : std::min(bin - 1, bins - 1);
    counts[bin] += 1.0;
  }
  ErrorDistribution d;
  d.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  d.probabilities.resize(bins);
  const double n = static_cast<double>(samples.size());
  double total = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    d.probabilities[i] = counts[i] / n + eps;
    total += d.probabilities[i];
  }
  for (double& p : d.probabilities) p /= total;
  return d;
}

double kl_divergence(const ErrorDistribution& p, const ErrorDistribution& q) {
  if (p.bin_edges != q.bin_edges || p.probabilities.size() != q.probabilities.size()) {
    throw DataError("KL divergence between distributions with different bins");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.probabilities.size(); ++i) {
    const double pi = p.probabilities[i];
    if (pi == 0.0) continue;
    const double qi = q.probabilities[i];
    if (!(qi > 0.0)) throw DataError("KL divergence undefined: Q has zero mass where P does not");
    sum += pi * std::log(pi / qi);
  }
  return std::max(0.0, sum);
}

std::vector<Qubit> DetectionVerdict::flagged() const {
  std::vector<Qubit> out;
  for (const auto& q : qubits) {
    if (q.flagged) out.push_back(q.qubit);
  }
  return out;
}

namespace {

struct WindowIndex {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  std::vector<Qubit> qubits;
};

WindowIndex prepare(const CalibrationSeries& history, CycleRange w1, CycleRange w2, const DetectionParams& params) {
  if (w1.first > w1.last || w2.first > w2.last) throw DataError("detection window has first > last");
  if (!(w1.last < w2.first || w2.last < w1.first)) throw DataError("detection windows overlap");
  if (params.bins == 0) throw DataError("detection needs at least one bin");
  WindowIndex idx;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto c = history[i].cycle_id();
    if (c >= w1.first && c <= w1.last) idx.first.push_back(i);
    if (c >= w2.first && c <= w2.last) idx.second.push_back(i);
  }
  constexpr std::size_t kMinWindow = 3;
  if (idx.first.size() < kMinWindow || idx.second.size() < kMinWindow) {
    throw DataError("each detection window needs at least " + std::to_string(kMinWindow) + " cycles (got " +
                    std::to_string(idx.first.size()) + " and " + std::to_string(idx.second.size()) + ")");
  }
  const CouplingGraph& g = history.graph();
  for (Qubit q = 0; q < g.qubit_count(); ++q) {
    if (g.degree(q) > 0) idx.qubits.push_back(q);
  }
  return idx;
}

QubitDivergence divergence_for(const CalibrationSeries& history, const WindowIndex& idx, Qubit q,
                               const DetectionParams& params) {
  const CouplingGraph& g = history.graph();
  std::vector<double> a;
  std::vector<double> b;
  a.reserve(idx.first.size());
  b.reserve(idx.second.size());
  for (std::size_t i : idx.first) a.push_back(avg_cnot_error(history[i], g, q));
  for (std::size_t i : idx.second) b.push_back(avg_cnot_error(history[i], g, q));
  const auto [lo_a, hi_a] = std::minmax_element(a.begin(), a.end());
  const auto [lo_b, hi_b] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*lo_a, *lo_b);
  const double hi = std::max(*hi_a, *hi_b);
  QubitDivergence out{q, 0.0, false};
  if (hi > lo) {
    const auto edges = equal_width_edges(lo, hi, params.bins);
    out.divergence = kl_divergence(build_distribution(a, edges, params.eps), build_distribution(b, edges, params.eps));
  }
  out.flagged = out.divergence > params.tau;
  return out;
}

}  // namespace

DetectionVerdict detect(const CalibrationSeries& history, CycleRange window1, CycleRange window2,
                        const DetectionParams& params) {
  const WindowIndex idx = prepare(history, window1, window2, params);
  DetectionVerdict v;
  v.tau = params.tau;
  v.qubits.resize(idx.qubits.size());
  const auto n = static_cast<std::int64_t>(idx.qubits.size());
#ifdef QALLOC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (n >= 64)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    v.qubits[static_cast<std::size_t>(i)] = divergence_for(history, idx, idx.qubits[static_cast<std::size_t>(i)], params);
  }
  return v;
}

namespace serial {

DetectionVerdict detect(const CalibrationSeries& history, CycleRange window1, CycleRange window2,
                        const DetectionParams& params) {
  const WindowIndex idx = prepare(history, window1, window2, params);
  DetectionVerdict v;
  v.tau = params.tau;
  for (Qubit q : idx.qubits) v.qubits.push_back(divergence_for(history, idx, q, params));
  return v;
}

}  // namespace serial

double calibrate_threshold(std::span<const DetectionVerdict> honest_runs, double percentile) {
  constexpr std::size_t kMinRuns = 30;
  if (honest_runs.size() < kMinRuns) {
    throw DataError("threshold calibration needs at least " + std::to_string(kMinRuns) + " honest runs, got " +
                    std::to_string(honest_runs.size()));
  }
  if (!(percentile >= 0.0 && percentile <= 100.0)) throw DataError("percentile must lie in [0,100]");
  std::vector<double> pool;
  for (const auto& run : honest_runs) {
    for (const auto& q : run.qubits) pool.push_back(q.divergence);
  }
  if (pool.empty()) throw DataError("honest runs contain no divergences");
  std::sort(pool.begin(), pool.end());
  const auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(pool.size())));
  return pool[rank == 0 ? 0 : rank - 1];
}

std::vector<Qubit> threshold_detector_flags(const CalibrationSeries& series, double relative_bound) {
  const CouplingGraph& g = series.graph();
  std::vector<Qubit> flagged;
  std::vector<double> xs(series.size());
  for (Qubit q = 0; q < g.qubit_count(); ++q) {
    if (g.degree(q) == 0) continue;
    double mean = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
      xs[t] = avg_cnot_error(series[t], g, q);
      mean += xs[t];
    }
    mean /= static_cast<double>(xs.size());
    if (mean == 0.0) continue;
    const bool out = std::any_of(xs.begin(), xs.end(),
                                 [&](double x) { return std::abs(x / mean - 1.0) > relative_bound; });
    if (out) flagged.push_back(q);
  }
  return flagged;
}

std::vector<double> gaussian_kde(std::span<const double> samples, std::span<const double> grid) {
  if (samples.empty()) throw DataError("KDE needs at least one sample");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  const double sd = samples.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  double h = 1.06 * sd * std::pow(n, -0.2);
  if (!(h > 0.0)) h = std::max(1e-12, std::abs(mean) * 1e-3);
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = 0.0;
    for (double x : samples) {
      const double z = (grid[i] - x) / h;
      s += std::exp(-0.5 * z * z);
    }
    out[i] = s * norm;
  }
  return out;
}

}  // namespace qalloc
