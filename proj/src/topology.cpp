#include "qalloc/topology.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qalloc/error.hpp"
#include "qalloc/kernels.hpp"

namespace qalloc {

CouplingGraph::CouplingGraph(std::size_t qubit_count, std::vector<Edge> edges)
    : n_(qubit_count), adjacency_(qubit_count), pair_edge_(qubit_count * qubit_count, -1) {
  if (n_ == 0) throw DataError("coupling graph needs at least one qubit");
  for (Edge& e : edges) {
    if (e.u == e.v) throw DataError("self-loop on qubit " + std::to_string(e.u));
    if (e.u >= n_ || e.v >= n_) {
      throw DataError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") outside " +
                      std::to_string(n_) + " qubits");
    }
    e = Edge::canonical(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw DataError("duplicate edge (" + std::to_string(dup->u) + "," + std::to_string(dup->v) + ")");
  }
  edges_ = std::move(edges);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
    pair_edge_[e.u * n_ + e.v] = static_cast<std::int32_t>(i);
    pair_edge_[e.v * n_ + e.u] = static_cast<std::int32_t>(i);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());

  dist_ = kernels::bfs_all_pairs(adjacency_);
  const auto row0 = dist_.row(0);
  connected_ = std::none_of(row0.begin(), row0.end(), [](int d) { return d == kUnreachable; });
}

void CouplingGraph::check_qubit(Qubit q) const {
  if (q >= n_) {
    throw std::out_of_range("qubit " + std::to_string(q) + " outside graph of " + std::to_string(n_));
  }
}

std::span<const Qubit> CouplingGraph::neighbors(Qubit q) const {
  check_qubit(q);
  return adjacency_[q];
}

std::optional<std::size_t> CouplingGraph::edge_index(Qubit a, Qubit b) const {
  check_qubit(a);
  check_qubit(b);
  const auto idx = pair_edge_[std::size_t{a} * n_ + b];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

std::size_t CouplingGraph::max_degree() const noexcept {
  std::size_t best = 0;
  for (const auto& nb : adjacency_) best = std::max(best, nb.size());
  return best;
}

int CouplingGraph::distance(Qubit a, Qubit b) const {
  check_qubit(a);
  check_qubit(b);
  return dist_(a, b);
}

QubitSubset::QubitSubset(std::vector<Qubit> members) : members_(std::move(members)), sorted_(members_) {
  if (members_.empty()) throw std::invalid_argument("qubit subset must be non-empty");
  std::sort(sorted_.begin(), sorted_.end());
  if (std::adjacent_find(sorted_.begin(), sorted_.end()) != sorted_.end()) {
    throw std::invalid_argument("qubit subset has repeated members");
  }
}

bool QubitSubset::contains(Qubit q) const { return std::binary_search(sorted_.begin(), sorted_.end(), q); }

CouplingGraph hanoi27() {
  return CouplingGraph(27, {{0, 1},   {1, 2},   {1, 4},   {2, 3},   {3, 5},   {4, 7},   {5, 8},
                            {6, 7},   {7, 10},  {8, 9},   {8, 11},  {10, 12}, {11, 14}, {12, 13},
                            {12, 15}, {13, 14}, {14, 16}, {15, 18}, {16, 19}, {17, 18}, {18, 21},
                            {19, 20}, {19, 22}, {21, 23}, {22, 25}, {23, 24}, {24, 25}, {25, 26}});
}

std::size_t degree(const CouplingGraph& g, Qubit q) { return g.degree(q); }

const DistanceMatrix& all_pairs_shortest_paths(const CouplingGraph& g) { return g.distances(); }

namespace {

void require_connected(const CouplingGraph& g) {
  if (!g.connected()) throw DataError("operation requires a connected coupling graph");
}

}  // namespace

double path_stddev(const CouplingGraph& g, Qubit q) {
  g.check_qubit(q);
  require_connected(g);
  const std::size_t m = g.qubit_count() - 1;
  if (m == 0) return 0.0;
  const auto row = g.distances().row(q);
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i != q) sum += row[i];
  }
  const double mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i == q) continue;
    const double d = row[i] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(m));
}

std::int64_t path_spread_key(const CouplingGraph& g, Qubit q) {
  g.check_qubit(q);
  require_connected(g);
  const auto row = g.distances().row(q);
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i == q) continue;
    sum += row[i];
    sum_sq += std::int64_t{row[i]} * row[i];
  }
  const auto m = static_cast<std::int64_t>(g.qubit_count() - 1);
  return m * sum_sq - sum * sum;
}

std::size_t induced_edge_count(const CouplingGraph& g, std::span<const Qubit> s) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (g.adjacent(s[i], s[j])) ++count;
    }
  }
  return count;
}

DistanceMatrix induced_distances(const CouplingGraph& g, std::span<const Qubit> s) {
  std::vector<std::vector<Qubit>> local(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (i != j && g.adjacent(s[i], s[j])) local[i].push_back(static_cast<Qubit>(j));
    }
  }
  return kernels::serial::bfs_all_pairs(local);
}

bool induced_connected(const CouplingGraph& g, std::span<const Qubit> s) {
  if (s.empty()) return false;
  for (Qubit q : s) g.check_qubit(q);
  std::vector<char> member(g.qubit_count(), 0);
  for (Qubit q : s) member[q] = 1;
  std::vector<char> seen(g.qubit_count(), 0);
  std::vector<Qubit> stack{s.front()};
  seen[s.front()] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Qubit u = stack.back();
    stack.pop_back();
    for (Qubit w : g.neighbors(u)) {
      if (member[w] && !seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == s.size();
}

double density(const CouplingGraph& g, const QubitSubset& s) {
  for (Qubit q : s.members()) g.check_qubit(q);
  const std::size_t n = s.size();
  if (n == 1) return 1.0;
  const double possible = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(induced_edge_count(g, s.members())) / possible;
}

double compactness(const CouplingGraph& g, const QubitSubset& s) {
  for (Qubit q : s.members()) g.check_qubit(q);
  const std::size_t n = s.size();
  if (n == 1) return 1.0;
  const DistanceMatrix local = induced_distances(g, s.members());
  int diameter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int d : local.row(static_cast<Qubit>(i))) {
      if (d == kUnreachable) throw DataError("compactness of a disconnected qubit subset");
      diameter = std::max(diameter, d);
    }
  }
  return static_cast<double>(diameter) / static_cast<double>(n - 1);
}

namespace {

bool read_uint(std::string_view tok, std::size_t& out) {
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

CouplingGraph parse_edge_list(std::string_view text) {
  std::optional<std::size_t> qubits;
  std::vector<Edge> edges;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (!qubits) {
      std::size_t n = 0;
      if (tok.size() != 2 || tok[0] != "qubits" || !read_uint(tok[1], n) || n == 0) {
        throw ParseError(line_no, "expected header 'qubits N'");
      }
      qubits = n;
      continue;
    }
    std::size_t u = 0;
    std::size_t v = 0;
    if (tok.size() != 2 || !read_uint(tok[0], u) || !read_uint(tok[1], v)) {
      throw ParseError(line_no, "expected edge 'u v'");
    }
    if (u >= *qubits || v >= *qubits) throw ParseError(line_no, "edge endpoint out of range");
    if (u == v) throw ParseError(line_no, "self-loop");
    edges.push_back(Edge::canonical(static_cast<Qubit>(u), static_cast<Qubit>(v)));
  }
  if (!qubits) throw DataError("edge list is empty (missing 'qubits N' header)");
  return CouplingGraph(*qubits, std::move(edges));
}

std::string format_edge_list(const CouplingGraph& g) {
  std::ostringstream out;
  out << "qubits " << g.qubit_count() << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  return out.str();
}

CouplingGraph load_topology(const std::string& source) {
  if (source == "hanoi27") return hanoi27();
  std::ifstream in(source);
  if (!in) throw ConfigError("topology: cannot open '" + source + "' (expected 'hanoi27' or an edge-list file)");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str());
}

CouplingGraph random_connected_graph(std::size_t n, double extra_edge_probability, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Qubit> order(n);
  std::iota(order.begin(), order.end(), Qubit{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  std::vector<char> present(n * n, 0);
  auto add = [&](Qubit a, Qubit b) {
    const Edge e = Edge::canonical(a, b);
    if (present[e.u * n + e.v]) return;
    present[e.u * n + e.v] = 1;
    edges.push_back(e);
  };
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    add(order[i], order[pick(rng)]);
  }
  std::bernoulli_distribution extra(extra_edge_probability);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (extra(rng)) add(static_cast<Qubit>(a), static_cast<Qubit>(b));
    }
  }
  return CouplingGraph(n, std::move(edges));
}

}  // namespace qalloc
