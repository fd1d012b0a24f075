#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qalloc {

using Qubit = std::uint32_t;

/// Undirected coupling edge, always stored with u < v.
struct Edge {
  Qubit u = 0;
  Qubit v = 0;

  static Edge canonical(Qubit a, Qubit b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  bool touches(Qubit q) const { return u == q || v == q; }
  Qubit other(Qubit q) const { return q == u ? v : u; }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Dense row-major hop-distance matrix. Unreachable pairs hold kUnreachable.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, int fill) : n_(n), d_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  int operator()(Qubit a, Qubit b) const { return d_[std::size_t{a} * n_ + b]; }
  int& at(Qubit a, Qubit b) { return d_[std::size_t{a} * n_ + b]; }
  std::span<const int> row(Qubit a) const { return {d_.data() + std::size_t{a} * n_, n_}; }
  std::span<int> row(Qubit a) { return {d_.data() + std::size_t{a} * n_, n_}; }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<int> d_;
};

/// Physical-qubit connectivity. Immutable after construction; the distance
/// matrix is computed once in the constructor and shared by every consumer.
class CouplingGraph {
 public:
  /// Throws DataError on self-loops, duplicate edges or out-of-range endpoints.
  CouplingGraph(std::size_t qubit_count, std::vector<Edge> edges);

  std::size_t qubit_count() const noexcept { return n_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Qubit> neighbors(Qubit q) const;
  std::size_t degree(Qubit q) const { return neighbors(q).size(); }
  bool adjacent(Qubit a, Qubit b) const { return edge_index(a, b).has_value(); }
  std::optional<std::size_t> edge_index(Qubit a, Qubit b) const;
  std::size_t max_degree() const noexcept;

  const DistanceMatrix& distances() const noexcept { return dist_; }
  int distance(Qubit a, Qubit b) const;
  bool connected() const noexcept { return connected_; }

  /// Throws std::out_of_range for an invalid qubit index.
  void check_qubit(Qubit q) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Qubit>> adjacency_;
  std::vector<std::int32_t> pair_edge_;  // n*n, -1 where no edge
  DistanceMatrix dist_;
  bool connected_ = false;
};

/// Non-empty ordered set of distinct qubits. Insertion order is preserved;
/// membership queries use a sorted copy.
class QubitSubset {
 public:
  explicit QubitSubset(std::vector<Qubit> members);

  std::span<const Qubit> members() const noexcept { return members_; }
  std::span<const Qubit> sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool contains(Qubit q) const;
  Qubit min_member() const { return sorted_.front(); }

  friend bool operator==(const QubitSubset& a, const QubitSubset& b) { return a.members_ == b.members_; }

 private:
  std::vector<Qubit> members_;
  std::vector<Qubit> sorted_;
};

/// 27-qubit heavy-hex layout (IBM Falcon r5.11 / Hanoi family).
CouplingGraph hanoi27();

std::size_t degree(const CouplingGraph& g, Qubit q);
const DistanceMatrix& all_pairs_shortest_paths(const CouplingGraph& g);

/// Population standard deviation of hop distances from q to every other qubit.
/// Throws DataError if g is disconnected.
double path_stddev(const CouplingGraph& g, Qubit q);

/// Exact integer form of the same spread: m·Σx² − (Σx)² over the m = n−1
/// distances from q. Monotone in path_stddev; used where ties must be exact.
std::int64_t path_spread_key(const CouplingGraph& g, Qubit q);

/// Edges with both endpoints in s over |s|(|s|−1)/2; 1 for a singleton.
double density(const CouplingGraph& g, const QubitSubset& s);

/// Diameter of the induced subgraph over |s|−1; 1 for a singleton.
/// Throws DataError if the induced subgraph is disconnected.
double compactness(const CouplingGraph& g, const QubitSubset& s);

std::size_t induced_edge_count(const CouplingGraph& g, std::span<const Qubit> s);
bool induced_connected(const CouplingGraph& g, std::span<const Qubit> s);

/// Hop distances inside the subgraph induced by s, indexed by position in s.
DistanceMatrix induced_distances(const CouplingGraph& g, std::span<const Qubit> s);

/// Edge-list exchange format: a "qubits N" line followed by one "u v" pair per line.
/// Blank lines and '#' comments are ignored.
CouplingGraph parse_edge_list(std::string_view text);
std::string format_edge_list(const CouplingGraph& g);

/// Resolves "hanoi27" or a path to an edge-list file.
CouplingGraph load_topology(const std::string& source);

/// Seeded random connected graph: a random spanning tree plus each remaining
/// pair independently with probability extra_edge_probability.
CouplingGraph random_connected_graph(std::size_t n, double extra_edge_probability, std::uint64_t seed);

}  // namespace qalloc
