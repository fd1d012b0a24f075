#include "qalloc/allocation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qalloc/error.hpp"

namespace qalloc {

std::string_view to_string(AllocatorKind kind) {
  return kind == AllocatorKind::Greedy ? "greedy" : "comdap";
}

AllocatorKind parse_allocator(std::string_view name) {
  if (name == "greedy") return AllocatorKind::Greedy;
  if (name == "comdap") return AllocatorKind::Comdap;
  throw ConfigError("allocator must be 'greedy' or 'comdap', got '" + std::string(name) + "'");
}

std::string_view to_string(EdgeWeighting w) { return w == EdgeWeighting::Fidelity ? "fidelity" : "uniform"; }

EdgeWeighting parse_edge_weighting(std::string_view name) {
  if (name == "fidelity") return EdgeWeighting::Fidelity;
  if (name == "uniform") return EdgeWeighting::Uniform;
  throw ConfigError("community weighting must be 'fidelity' or 'uniform', got '" + std::string(name) + "'");
}

double cfm(const CouplingGraph& g, const CalibrationSnapshot& snap, Qubit q) {
  const double e = avg_cnot_error(snap, g, q);
  return static_cast<double>(g.degree(q)) + (1.0 - (e + snap.readout_error(q)));
}

namespace {

void validate_request(const CouplingGraph& g, const AllocationRequest& req) {
  if (req.size == 0) throw std::invalid_argument("allocation request size must be at least 1");
  for (Qubit q : req.available.members()) g.check_qubit(q);
}

// Index of the best candidate under "higher score, then lower qubit index".
template <typename Score>
Qubit best_by_score(std::span<const Qubit> candidates, Score&& score) {
  Qubit best = candidates.front();
  double best_score = score(best);
  for (Qubit q : candidates.subspan(1)) {
    const double s = score(q);
    if (s > best_score || (s == best_score && q < best)) {
      best = q;
      best_score = s;
    }
  }
  return best;
}

std::vector<double> cfm_table(const CouplingGraph& g, const CalibrationSnapshot& snap, std::span<const Qubit> qubits) {
  std::vector<double> table(g.qubit_count(), 0.0);
  for (Qubit q : qubits) table[q] = cfm(g, snap, q);
  return table;
}

}  // namespace

std::optional<Partition> greedy_allocate(const CouplingGraph& g, const CalibrationSnapshot& snap,
                                         const AllocationRequest& req) {
  validate_request(g, req);
  if (req.size > req.available.size()) return std::nullopt;
  const auto available = req.available.sorted();
  const std::vector<double> score = cfm_table(g, snap, available);
  auto by_cfm = [&](Qubit q) { return score[q]; };

  const Qubit attractor = best_by_score(available, by_cfm);
  std::vector<char> in_partition(g.qubit_count(), 0);
  std::vector<Qubit> members{attractor};
  in_partition[attractor] = 1;

  std::vector<Qubit> frontier;
  while (members.size() < req.size) {
    frontier.clear();
    for (Qubit m : members) {
      for (Qubit w : g.neighbors(m)) {
        if (!in_partition[w] && req.available.contains(w)) frontier.push_back(w);
      }
    }
    if (frontier.empty()) return std::nullopt;
    const Qubit next = best_by_score(std::span<const Qubit>(frontier), by_cfm);
    in_partition[next] = 1;
    members.push_back(next);
  }
  return Partition{QubitSubset(std::move(members)), score[attractor]};
}

// ---------------------------------------------------------------------------
// Louvain

namespace {

struct WeightedGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;  // no self entries
  std::vector<double> self_loop;                                 // internal weight, counted once

  std::size_t size() const { return adj.size(); }
};

// One local-moving phase. Returns the community label of every node and
// whether any node moved.
std::pair<std::vector<std::size_t>, bool> local_moving(const WeightedGraph& wg) {
  const std::size_t n = wg.size();
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : wg.adj[i]) k[i] += w;
    k[i] += 2.0 * wg.self_loop[i];
  }
  const double m2 = std::accumulate(k.begin(), k.end(), 0.0);
  std::vector<std::size_t> comm(n);
  std::iota(comm.begin(), comm.end(), std::size_t{0});
  if (m2 <= 0.0) return {comm, false};

  std::vector<double> tot = k;
  std::map<std::size_t, double> links;
  bool any_move = false;
  constexpr double kMinGain = 1e-12;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      links.clear();
      for (const auto& [j, w] : wg.adj[i]) links[comm[j]] += w;
      const std::size_t home = comm[i];
      tot[home] -= k[i];
      auto gain = [&](std::size_t c) {
        const auto it = links.find(c);
        const double in = it == links.end() ? 0.0 : it->second;
        return in - tot[c] * k[i] / m2;
      };
      std::size_t best = home;
      double best_gain = gain(home);
      for (const auto& [c, w] : links) {
        if (c == home) continue;
        const double gc = gain(c);
        if (gc > best_gain + kMinGain) {
          best = c;
          best_gain = gc;
        }
      }
      tot[best] += k[i];
      if (best != home) {
        comm[i] = best;
        improved = true;
        any_move = true;
      }
    }
  }
  return {comm, any_move};
}

// Relabels communities 0..c-1 in order of first appearance.
std::size_t renumber(std::vector<std::size_t>& comm) {
  std::map<std::size_t, std::size_t> label;
  for (auto& c : comm) {
    const auto [it, inserted] = label.emplace(c, label.size());
    c = it->second;
  }
  return label.size();
}

WeightedGraph aggregate(const WeightedGraph& wg, const std::vector<std::size_t>& comm, std::size_t count) {
  WeightedGraph out;
  out.adj.resize(count);
  out.self_loop.assign(count, 0.0);
  std::vector<std::map<std::size_t, double>> acc(count);
  for (std::size_t i = 0; i < wg.size(); ++i) {
    out.self_loop[comm[i]] += wg.self_loop[i];
    for (const auto& [j, w] : wg.adj[i]) {
      if (comm[i] == comm[j]) {
        if (i < j) out.self_loop[comm[i]] += w;
      } else {
        acc[comm[i]][comm[j]] += w;
      }
    }
  }
  for (std::size_t c = 0; c < count; ++c) out.adj[c].assign(acc[c].begin(), acc[c].end());
  return out;
}

}  // namespace

CommunitySet louvain(const CouplingGraph& g, const CalibrationSnapshot& snap, const QubitSubset& available,
                     EdgeWeighting weighting) {
  for (Qubit q : available.members()) g.check_qubit(q);
  const auto nodes = available.sorted();
  const std::size_t n = nodes.size();
  std::vector<std::size_t> local(g.qubit_count(), n);
  for (std::size_t i = 0; i < n; ++i) local[nodes[i]] = i;

  WeightedGraph wg;
  wg.adj.resize(n);
  wg.self_loop.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (Qubit w : g.neighbors(nodes[i])) {
      if (local[w] == n) continue;
      const double weight = weighting == EdgeWeighting::Uniform
                                ? 1.0
                                : std::max(0.0, 1.0 - snap.cnot_error(g, nodes[i], w));
      if (weight > 0.0) wg.adj[i].emplace_back(local[w], weight);
    }
  }

  // membership[i] = community of original node i
  std::vector<std::size_t> membership(n);
  std::iota(membership.begin(), membership.end(), std::size_t{0});
  WeightedGraph level = wg;
  while (true) {
    auto [comm, moved] = local_moving(level);
    if (!moved) break;
    const std::size_t count = renumber(comm);
    for (auto& m : membership) m = comm[m];
    level = aggregate(level, comm, count);
  }

  // Split into connected pieces of the coupling graph and order canonically.
  std::map<std::size_t, std::vector<Qubit>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[membership[i]].push_back(nodes[i]);
  std::vector<std::vector<Qubit>> pieces;
  std::vector<char> seen(g.qubit_count(), 0);
  std::vector<char> in_group(g.qubit_count(), 0);
  for (auto& [label, members] : groups) {
    for (Qubit q : members) in_group[q] = 1;
    for (Qubit start : members) {
      if (seen[start]) continue;
      std::vector<Qubit> piece;
      std::vector<Qubit> stack{start};
      seen[start] = 1;
      while (!stack.empty()) {
        const Qubit u = stack.back();
        stack.pop_back();
        piece.push_back(u);
        for (Qubit w : g.neighbors(u)) {
          if (in_group[w] && !seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
        }
      }
      std::sort(piece.begin(), piece.end());
      pieces.push_back(std::move(piece));
    }
    for (Qubit q : members) in_group[q] = 0;
  }
  std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  CommunitySet out;
  out.reserve(pieces.size());
  for (auto& p : pieces) out.emplace_back(std::move(p));
  return out;
}

// ---------------------------------------------------------------------------
// CRI and COMDAP

namespace {

constexpr std::size_t kMaxExactPool = 12;

double mean_intra_cnot(const CouplingGraph& g, const CalibrationSnapshot& snap, std::span<const Qubit> s) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (const auto idx = g.edge_index(s[i], s[j])) {
        sum += snap.cnot_error(*idx);
        ++count;
      }
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double mean_readout(const CalibrationSnapshot& snap, std::span<const Qubit> s) {
  double sum = 0.0;
  for (Qubit q : s) sum += snap.readout_error(q);
  return sum / static_cast<double>(s.size());
}

double reliability_numerator(const CouplingGraph& g, const CalibrationSnapshot& snap, const QubitSubset& s) {
  constexpr double kAlpha = 1.0;
  const double structure = density(g, s) / compactness(g, s);
  const double errors = mean_intra_cnot(g, snap, s.sorted()) + mean_readout(snap, s.sorted());
  return structure + kAlpha * (1.0 - errors);
}

}  // namespace

double cri(const CouplingGraph& g, const CalibrationSnapshot& snap, const QubitSubset& s) {
  if (!induced_connected(g, s.members())) throw DataError("CRI of a disconnected qubit subset");
  std::vector<Qubit> all(g.qubit_count());
  std::iota(all.begin(), all.end(), Qubit{0});
  const double hardware = reliability_numerator(g, snap, QubitSubset(std::move(all)));
  return reliability_numerator(g, snap, s) / hardware;
}

namespace {

QubitSubset greedy_extract(const CouplingGraph& g, const std::vector<double>& score, const QubitSubset& pool,
                           std::size_t size) {
  const auto sorted = pool.sorted();
  const Qubit seed = best_by_score(sorted, [&](Qubit q) { return score[q]; });
  std::vector<char> in_subset(g.qubit_count(), 0);
  std::vector<Qubit> members{seed};
  in_subset[seed] = 1;
  while (members.size() < size) {
    Qubit best = 0;
    std::size_t best_links = 0;
    bool found = false;
    for (Qubit c : sorted) {
      if (in_subset[c]) continue;
      std::size_t links = 0;
      for (Qubit w : g.neighbors(c)) links += in_subset[w];
      if (links == 0) continue;
      const bool better = !found || links > best_links ||
                          (links == best_links && (score[c] > score[best] || (score[c] == score[best] && c < best)));
      if (better) {
        best = c;
        best_links = links;
        found = true;
      }
    }
    if (!found) throw DataError("dense-subset extraction from a disconnected pool");
    in_subset[best] = 1;
    members.push_back(best);
  }
  return QubitSubset(std::move(members));
}

QubitSubset exact_extract(const CouplingGraph& g, const CalibrationSnapshot& snap, const QubitSubset& pool,
                          std::size_t size) {
  if (pool.size() > kMaxExactPool) {
    throw std::invalid_argument("exact extraction is limited to pools of " + std::to_string(kMaxExactPool) +
                                " qubits");
  }
  const auto nodes = pool.sorted();
  const std::size_t n = nodes.size();
  std::optional<std::vector<Qubit>> best;
  std::size_t best_edges = 0;
  double best_cri = 0.0;
  std::vector<Qubit> pick;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
    pick.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) pick.push_back(nodes[i]);
    }
    if (!induced_connected(g, pick)) continue;
    const std::size_t edges = induced_edge_count(g, pick);
    const double c = cri(g, snap, QubitSubset(pick));
    const bool better = !best || edges > best_edges || (edges == best_edges && c > best_cri) ||
                        (edges == best_edges && c == best_cri && pick < *best);
    if (better) {
      best = pick;
      best_edges = edges;
      best_cri = c;
    }
  }
  if (!best) throw DataError("no connected subset of the requested size in pool");
  return QubitSubset(std::move(*best));
}

}  // namespace

QubitSubset extract_dense_subset(const CouplingGraph& g, const CalibrationSnapshot& snap, const QubitSubset& pool,
                                 std::size_t size, ExtractionMode mode) {
  if (size == 0 || size > pool.size()) throw std::invalid_argument("extraction size out of range");
  if (mode == ExtractionMode::Exact) return exact_extract(g, snap, pool, size);
  return greedy_extract(g, cfm_table(g, snap, pool.sorted()), pool, size);
}

std::optional<Partition> comdap_allocate(const CouplingGraph& g, const CalibrationSnapshot& snap,
                                         const AllocationRequest& req, const ComdapOptions& options) {
  validate_request(g, req);
  if (req.size > req.available.size()) return std::nullopt;
  const CommunitySet communities = louvain(g, snap, req.available, options.weighting);
  std::vector<double> scores;
  scores.reserve(communities.size());
  for (const auto& c : communities) scores.push_back(cri(g, snap, c));

  // 1. exact-size community
  std::optional<std::size_t> exact;
  for (std::size_t i = 0; i < communities.size(); ++i) {
    if (communities[i].size() == req.size && (!exact || scores[i] > scores[*exact])) exact = i;
  }
  if (exact) return Partition{communities[*exact], scores[*exact]};

  if (req.size == 1) {
    const auto available = req.available.sorted();
    const std::vector<double> score = cfm_table(g, snap, available);
    const Qubit q = best_by_score(available, [&](Qubit x) { return score[x]; });
    QubitSubset s({q});
    const double c = cri(g, snap, s);
    return Partition{std::move(s), c};
  }

  auto extract = [&](const QubitSubset& pool) {
    const ExtractionMode mode =
        pool.size() > kMaxExactPool ? ExtractionMode::Greedy : options.extraction;
    QubitSubset s = extract_dense_subset(g, snap, pool, req.size, mode);
    const double c = cri(g, snap, s);
    return Partition{std::move(s), c};
  };

  // 2. cut the requested size out of a larger community
  std::optional<Partition> best;
  for (const auto& c : communities) {
    if (c.size() <= req.size) continue;
    Partition p = extract(c);
    if (!best || p.score > best->score) best = std::move(p);
  }
  if (best) return best;

  // 3. merge outward from the highest-CRI community
  std::vector<std::size_t> order(communities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> owner(g.qubit_count(), communities.size());
  for (std::size_t i = 0; i < communities.size(); ++i) {
    for (Qubit q : communities[i].members()) owner[q] = i;
  }
  std::vector<char> explored(communities.size(), 0);
  for (std::size_t start : order) {
    if (explored[start]) continue;
    std::vector<char> merged(communities.size(), 0);
    merged[start] = 1;
    explored[start] = 1;
    std::size_t total = communities[start].size();
    while (total < req.size) {
      std::optional<std::size_t> next;
      for (std::size_t i = 0; i < communities.size(); ++i) {
        if (!merged[i]) continue;
        for (Qubit q : communities[i].members()) {
          for (Qubit w : g.neighbors(q)) {
            const std::size_t o = owner[w];
            if (o == communities.size() || merged[o]) continue;
            if (!next || scores[o] > scores[*next] || (scores[o] == scores[*next] && o < *next)) next = o;
          }
        }
      }
      if (!next) break;
      merged[*next] = 1;
      explored[*next] = 1;
      total += communities[*next].size();
    }
    if (total < req.size) continue;
    std::vector<Qubit> pool;
    for (std::size_t i = 0; i < communities.size(); ++i) {
      if (merged[i]) pool.insert(pool.end(), communities[i].members().begin(), communities[i].members().end());
    }
    std::sort(pool.begin(), pool.end());
    const QubitSubset merged_pool(std::move(pool));
    if (merged_pool.size() == req.size) return Partition{merged_pool, cri(g, snap, merged_pool)};
    return extract(merged_pool);
  }
  return std::nullopt;
}

std::optional<Partition> allocate(AllocatorKind kind, const CouplingGraph& g, const CalibrationSnapshot& snap,
                                  const AllocationRequest& req, const ComdapOptions& options) {
  if (kind == AllocatorKind::Greedy) return greedy_allocate(g, snap, req);
  return comdap_allocate(g, snap, req, options);
}

}  // namespace qalloc
