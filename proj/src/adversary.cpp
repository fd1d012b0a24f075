#include "qalloc/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "json.hpp"

#include "qalloc/error.hpp"

namespace qalloc {

using nlohmann::json;

std::string_view to_string(Heuristic h) { return h == Heuristic::H1 ? "H1" : "H2"; }

Heuristic parse_heuristic(std::string_view name) {
  if (name == "H1" || name == "h1") return Heuristic::H1;
  if (name == "H2" || name == "h2") return Heuristic::H2;
  throw ConfigError("heuristic must be 'H1' or 'H2', got '" + std::string(name) + "'");
}

void MisreportPlan::validate() const {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double d = targets[i].delta;
    if (!std::isfinite(d)) throw ConfigError("plan delta must be finite");
    if (heuristic == Heuristic::H1 && !(d > 0.0)) throw ConfigError("H1 deltas must be positive (over-report)");
    if (heuristic == Heuristic::H2) {
      if (!(d < 0.0)) throw ConfigError("H2 deltas must be negative (under-report)");
      if (i > 0 && !(std::abs(d) < std::abs(targets[i - 1].delta))) {
        throw ConfigError("H2 magnitudes must strictly decrease (k1 > k2 > ...)");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[j].qubit == targets[i].qubit) throw ConfigError("plan targets must be distinct");
    }
  }
}

std::vector<Qubit> max_degree_qubits(const CouplingGraph& g) {
  const std::size_t top = g.max_degree();
  std::vector<Qubit> out;
  for (Qubit q = 0; q < g.qubit_count(); ++q) {
    if (g.degree(q) == top) out.push_back(q);
  }
  return out;
}

namespace {

std::vector<Qubit> checked_pool(const CouplingGraph& g, std::size_t n) {
  if (!g.connected()) throw DataError("target selection requires a connected coupling graph");
  std::vector<Qubit> pool = max_degree_qubits(g);
  if (n == 0) throw ConfigError("target count n must be at least 1");
  if (n > pool.size()) {
    throw ConfigError("target count n=" + std::to_string(n) + " exceeds the " + std::to_string(pool.size()) +
                      " maximum-degree qubits");
  }
  return pool;
}

}  // namespace

std::vector<Qubit> heuristic1_targets(const CouplingGraph& g, std::size_t n) {
  std::vector<Qubit> pool = checked_pool(g, n);
  std::vector<std::int64_t> key(g.qubit_count(), 0);
  for (Qubit q : pool) key[q] = path_spread_key(g, q);
  std::stable_sort(pool.begin(), pool.end(), [&](Qubit a, Qubit b) { return key[a] < key[b]; });
  pool.resize(n);
  return pool;
}

std::vector<Qubit> heuristic2_targets(const CouplingGraph& g, std::size_t n) {
  std::vector<Qubit> pool = checked_pool(g, n);
  const DistanceMatrix& d = g.distances();
  std::vector<Qubit> picked{pool.front()};
  std::vector<char> taken(g.qubit_count(), 0);
  taken[pool.front()] = 1;

  auto min_dist = [&](Qubit q) {
    int m = std::numeric_limits<int>::max();
    for (Qubit p : picked) m = std::min(m, d(q, p));
    return m;
  };
  // true if a is farther than b from the earlier picks, compared in pick order
  auto farther_from_history = [&](Qubit a, Qubit b) {
    for (Qubit p : picked) {
      if (d(a, p) != d(b, p)) return d(a, p) > d(b, p);
    }
    return false;
  };

  while (picked.size() < n) {
    std::optional<Qubit> best;
    int best_min = -1;
    for (Qubit c : pool) {
      if (taken[c]) continue;
      const int m = min_dist(c);
      if (!best || m > best_min || (m == best_min && farther_from_history(c, *best))) {
        best = c;
        best_min = m;
      }
    }
    taken[*best] = 1;
    picked.push_back(*best);
  }
  return picked;
}

MisreportPlan make_h1_plan(const CouplingGraph& g, std::size_t n, double k) {
  if (!(k > 0.0)) throw ConfigError("H1 k must be positive");
  MisreportPlan plan{Heuristic::H1, {}};
  for (Qubit q : heuristic1_targets(g, n)) plan.targets.push_back({q, k, path_stddev(g, q)});
  return plan;
}

MisreportPlan make_h2_plan(const CouplingGraph& g, const std::vector<double>& ks) {
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0)) throw ConfigError("H2 k values must be positive");
    if (i > 0 && !(ks[i] < ks[i - 1])) throw ConfigError("H2 k values must strictly decrease");
  }
  const std::vector<Qubit> qs = heuristic2_targets(g, ks.size());
  MisreportPlan plan{Heuristic::H2, {}};
  for (std::size_t i = 0; i < qs.size(); ++i) {
    int m = 0;
    if (i > 0) {
      m = std::numeric_limits<int>::max();
      for (std::size_t j = 0; j < i; ++j) m = std::min(m, g.distance(qs[i], qs[j]));
    }
    plan.targets.push_back({qs[i], -ks[i], static_cast<double>(m)});
  }
  return plan;
}

CalibrationSnapshot apply_misreport(const CalibrationSnapshot& truth, const CouplingGraph& g,
                                    const MisreportPlan& plan) {
  std::vector<double> delta(g.edges().size(), 0.0);
  std::vector<char> touched(g.edges().size(), 0);
  for (const auto& t : plan.targets) {
    g.check_qubit(t.qubit);
    for (Qubit w : g.neighbors(t.qubit)) {
      const std::size_t e = *g.edge_index(t.qubit, w);
      if (!touched[e] || std::abs(t.delta) > std::abs(delta[e])) delta[e] = t.delta;
      touched[e] = 1;
    }
  }
  CalibrationSnapshot reported = truth;
  for (std::size_t e = 0; e < delta.size(); ++e) {
    if (!touched[e]) continue;
    reported.set_cnot_error(e, std::clamp(truth.cnot_error(e) * (1.0 + delta[e]), 0.0, 1.0));
  }
  return reported;
}

std::string plan_to_json(const MisreportPlan& plan, int indent) {
  json targets = json::array();
  for (const auto& t : plan.targets) {
    json entry{{"qubit", t.qubit}, {"delta", t.delta}};
    entry[plan.heuristic == Heuristic::H1 ? "sigma" : "min_distance"] = t.evidence;
    targets.push_back(std::move(entry));
  }
  json doc{{"heuristic", std::string(to_string(plan.heuristic))}, {"n", plan.n()}, {"targets", std::move(targets)}};
  return doc.dump(indent);
}

MisreportPlan plan_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    MisreportPlan plan{parse_heuristic(doc.at("heuristic").get<std::string>()), {}};
    const char* evidence_key = plan.heuristic == Heuristic::H1 ? "sigma" : "min_distance";
    for (const auto& t : doc.at("targets")) {
      plan.targets.push_back(
          {t.at("qubit").get<Qubit>(), t.at("delta").get<double>(), t.value(evidence_key, 0.0)});
    }
    if (doc.contains("n") && doc.at("n").get<std::size_t>() != plan.n()) {
      throw ConfigError("plan 'n' disagrees with the number of targets");
    }
    plan.validate();
    return plan;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("misreport plan JSON: ") + e.what());
  }
}

}  // namespace qalloc
