#include "qalloc/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

#include "qalloc/error.hpp"

namespace qalloc {

namespace {

void check_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DataError(std::string(what) + " " + std::to_string(v) + " outside [0,1]");
  }
}

}  // namespace

CalibrationSnapshot::CalibrationSnapshot(const CouplingGraph& g, std::uint64_t cycle_id,
                                         std::vector<double> cnot_error, std::vector<double> readout_error)
    : cycle_id_(cycle_id), cnot_(std::move(cnot_error)), readout_(std::move(readout_error)) {
  if (cnot_.size() != g.edges().size()) {
    throw DataError("snapshot has " + std::to_string(cnot_.size()) + " cnot errors for " +
                    std::to_string(g.edges().size()) + " edges");
  }
  if (readout_.size() != g.qubit_count()) {
    throw DataError("snapshot has " + std::to_string(readout_.size()) + " readout errors for " +
                    std::to_string(g.qubit_count()) + " qubits");
  }
  for (double v : cnot_) check_probability(v, "cnot error");
  for (double v : readout_) check_probability(v, "readout error");
}

CalibrationSnapshot CalibrationSnapshot::uniform(const CouplingGraph& g, double cnot_error, double readout_error,
                                                 std::uint64_t cycle_id) {
  return CalibrationSnapshot(g, cycle_id, std::vector<double>(g.edges().size(), cnot_error),
                             std::vector<double>(g.qubit_count(), readout_error));
}

double CalibrationSnapshot::cnot_error(const CouplingGraph& g, Qubit a, Qubit b) const {
  const auto idx = g.edge_index(a, b);
  if (!idx) throw std::invalid_argument("no edge between " + std::to_string(a) + " and " + std::to_string(b));
  return cnot_.at(*idx);
}

void CalibrationSnapshot::set_cnot_error(std::size_t edge, double value) {
  check_probability(value, "cnot error");
  cnot_.at(edge) = value;
}

void CalibrationSnapshot::set_readout_error(Qubit q, double value) {
  check_probability(value, "readout error");
  readout_.at(q) = value;
}

CalibrationSeries::CalibrationSeries(CouplingGraph graph, std::vector<CalibrationSnapshot> snapshots)
    : graph_(std::move(graph)), snapshots_(std::move(snapshots)) {
  if (snapshots_.empty()) throw DataError("no snapshots");
  for (std::size_t i = 0; i < snapshots_.size(); ++i) {
    const auto& s = snapshots_[i];
    if (s.cnot_errors().size() != graph_.edges().size() || s.readout_errors().size() != graph_.qubit_count()) {
      throw DataError("snapshot for cycle " + std::to_string(s.cycle_id()) + " does not match the graph");
    }
    if (i > 0 && s.cycle_id() <= snapshots_[i - 1].cycle_id()) {
      throw DataError("cycle ids must be strictly increasing (cycle " + std::to_string(s.cycle_id()) + ")");
    }
  }
}

double avg_cnot_error(const CalibrationSnapshot& snap, const CouplingGraph& g, Qubit q) {
  const auto nb = g.neighbors(q);
  if (nb.empty()) throw DataError("qubit " + std::to_string(q) + " has no incident edges");
  std::vector<double> vals(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) vals[i] = snap.cnot_error(*g.edge_index(q, nb[i]));
  std::sort(vals.begin(), vals.end());
  double sum = 0.0;
  for (double v : vals) sum += v;
  return sum / static_cast<double>(vals.size());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  tok = trim(tok);
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

struct PendingSnapshot {
  std::uint64_t cycle = 0;
  std::vector<double> cnot;
  std::vector<double> readout;
  std::vector<char> cnot_seen;
  std::vector<char> readout_seen;
  std::size_t first_line = 0;
};

}  // namespace

CalibrationSeries load_calibration_csv(std::string_view text, const CouplingGraph& g) {
  std::vector<CalibrationSnapshot> snaps;
  std::optional<PendingSnapshot> pending;
  bool header_seen = false;
  std::size_t line_no = 0;

  auto finish = [&](std::size_t at_line) {
    if (!pending) return;
    const auto missing_edge = std::find(pending->cnot_seen.begin(), pending->cnot_seen.end(), 0);
    if (missing_edge != pending->cnot_seen.end()) {
      const Edge& e = g.edges()[static_cast<std::size_t>(missing_edge - pending->cnot_seen.begin())];
      throw ParseError(at_line, "cycle " + std::to_string(pending->cycle) + " lacks cnot row for " +
                                    std::to_string(e.u) + "-" + std::to_string(e.v));
    }
    const auto missing_q = std::find(pending->readout_seen.begin(), pending->readout_seen.end(), 0);
    if (missing_q != pending->readout_seen.end()) {
      throw ParseError(at_line, "cycle " + std::to_string(pending->cycle) + " lacks readout row for qubit " +
                                    std::to_string(missing_q - pending->readout_seen.begin()));
    }
    snaps.emplace_back(g, pending->cycle, std::move(pending->cnot), std::move(pending->readout));
    pending.reset();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (!header_seen) {
      if (f.size() != 4 || f[0] != "cycle" || f[1] != "kind" || f[2] != "subject" || f[3] != "value") {
        throw ParseError(line_no, "expected header 'cycle,kind,subject,value'");
      }
      header_seen = true;
      continue;
    }
    if (f.size() != 4) throw ParseError(line_no, "expected 4 fields, got " + std::to_string(f.size()));
    std::uint64_t cycle = 0;
    if (!parse_number(f[0], cycle)) throw ParseError(line_no, "bad cycle '" + std::string(f[0]) + "'");
    double value = 0.0;
    if (!parse_number(f[3], value)) throw ParseError(line_no, "bad value '" + std::string(f[3]) + "'");
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ParseError(line_no, "value " + std::string(f[3]) + " outside [0,1]");
    }

    if (pending && cycle != pending->cycle) {
      if (cycle < pending->cycle) {
        throw ParseError(line_no, "cycle " + std::to_string(cycle) + " after cycle " +
                                      std::to_string(pending->cycle) + " (cycles must ascend)");
      }
      finish(line_no);
    }
    if (!pending) {
      if (!snaps.empty() && cycle <= snaps.back().cycle_id()) {
        throw ParseError(line_no, "cycle " + std::to_string(cycle) + " is not after cycle " +
                                      std::to_string(snaps.back().cycle_id()));
      }
      pending = PendingSnapshot{cycle,
                                std::vector<double>(g.edges().size(), 0.0),
                                std::vector<double>(g.qubit_count(), 0.0),
                                std::vector<char>(g.edges().size(), 0),
                                std::vector<char>(g.qubit_count(), 0),
                                line_no};
    }

    if (f[1] == "cnot") {
      const auto dash = f[2].find('-');
      std::size_t u = 0;
      std::size_t v = 0;
      if (dash == std::string_view::npos || !parse_number(f[2].substr(0, dash), u) ||
          !parse_number(f[2].substr(dash + 1), v)) {
        throw ParseError(line_no, "cnot subject must be 'u-v', got '" + std::string(f[2]) + "'");
      }
      if (u >= v) throw ParseError(line_no, "cnot subject must have u < v");
      if (v >= g.qubit_count()) throw ParseError(line_no, "unknown edge " + std::string(f[2]));
      const auto idx = g.edge_index(static_cast<Qubit>(u), static_cast<Qubit>(v));
      if (!idx) throw ParseError(line_no, "unknown edge " + std::string(f[2]));
      if (pending->cnot_seen[*idx]) throw ParseError(line_no, "duplicate cnot row for " + std::string(f[2]));
      pending->cnot_seen[*idx] = 1;
      pending->cnot[*idx] = value;
    } else if (f[1] == "readout") {
      std::size_t q = 0;
      if (!parse_number(f[2], q)) throw ParseError(line_no, "readout subject must be a qubit index");
      if (q >= g.qubit_count()) throw ParseError(line_no, "unknown qubit " + std::string(f[2]));
      if (pending->readout_seen[q]) throw ParseError(line_no, "duplicate readout row for qubit " + std::string(f[2]));
      pending->readout_seen[q] = 1;
      pending->readout[q] = value;
    } else {
      throw ParseError(line_no, "kind must be 'cnot' or 'readout', got '" + std::string(f[1]) + "'");
    }
  }
  finish(line_no + 1);
  if (snaps.empty()) throw DataError("no snapshots");
  return CalibrationSeries(g, std::move(snaps));
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::string write_calibration_csv(const CalibrationSeries& series) {
  const CouplingGraph& g = series.graph();
  std::string out = "cycle,kind,subject,value\n";
  for (const auto& snap : series.snapshots()) {
    const std::string cycle = std::to_string(snap.cycle_id());
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
      const Edge& e = g.edges()[i];
      out += cycle + ",cnot," + std::to_string(e.u) + "-" + std::to_string(e.v) + ",";
      append_double(out, snap.cnot_error(i));
      out += '\n';
    }
    for (Qubit q = 0; q < g.qubit_count(); ++q) {
      out += cycle + ",readout," + std::to_string(q) + ",";
      append_double(out, snap.readout_error(q));
      out += '\n';
    }
  }
  return out;
}

CalibrationSeries synth_drift(const CouplingGraph& g, const CalibrationSnapshot& base, std::size_t cycles,
                              double cv, std::uint64_t seed) {
  if (cycles == 0) throw std::invalid_argument("synth_drift: cycles must be positive");
  if (!(cv > 0.0 && cv < 1.5)) throw std::invalid_argument("synth_drift: cv must lie in (0, 1.5)");
  const double s = std::sqrt(std::log1p(cv * cv));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<CalibrationSnapshot> snaps;
  snaps.reserve(cycles);
  for (std::size_t t = 0; t < cycles; ++t) {
    CalibrationSnapshot snap = base;
    snap.set_cycle_id(base.cycle_id() + t);
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      const double v = base.cnot_error(e) * std::exp(s * normal(rng));
      snap.set_cnot_error(e, std::clamp(v, 0.0, 1.0));
    }
    snaps.push_back(std::move(snap));
  }
  return CalibrationSeries(g, std::move(snaps));
}

double fluctuation_percent(const CalibrationSeries& series, Qubit q) {
  if (series.size() < 2) throw DataError("fluctuation needs at least 2 cycles");
  std::vector<double> xs;
  xs.reserve(series.size());
  for (const auto& snap : series.snapshots()) xs.push_back(avg_cnot_error(snap, series.graph(), q));
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (mean == 0.0) throw DataError("fluctuation undefined for zero mean error on qubit " + std::to_string(q));
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return 100.0 * std::sqrt(ss / static_cast<double>(xs.size())) / mean;
}

CalibrationSnapshot mean_snapshot(const CouplingGraph& g, std::span<const CalibrationSnapshot> snaps,
                                  std::uint64_t cycle_id) {
  if (snaps.empty()) throw std::invalid_argument("mean_snapshot of an empty range");
  std::vector<double> cnot(g.edges().size(), 0.0);
  std::vector<double> readout(g.qubit_count(), 0.0);
  for (const auto& s : snaps) {
    for (std::size_t e = 0; e < cnot.size(); ++e) cnot[e] += s.cnot_error(e);
    for (Qubit q = 0; q < readout.size(); ++q) readout[q] += s.readout_error(q);
  }
  const double n = static_cast<double>(snaps.size());
  for (double& v : cnot) v = std::min(1.0, v / n);
  for (double& v : readout) v = std::min(1.0, v / n);
  return CalibrationSnapshot(g, cycle_id, std::move(cnot), std::move(readout));
}

}  // namespace qalloc
