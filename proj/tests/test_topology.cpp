#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "qalloc/error.hpp"
#include "qalloc/kernels.hpp"
#include "qalloc/topology.hpp"

using namespace qalloc;

namespace {

CouplingGraph path3() { return CouplingGraph(3, {{0, 1}, {1, 2}}); }
CouplingGraph triangle() { return CouplingGraph(3, {{0, 1}, {1, 2}, {0, 2}}); }

}  // namespace

TEST_CASE("hanoi27 shape") {
  const auto g = hanoi27();
  CHECK(g.qubit_count() == 27);
  CHECK(g.edges().size() == 28);
  CHECK(g.connected());
  std::vector<Qubit> deg3;
  for (Qubit q = 0; q < 27; ++q) {
    if (degree(g, q) == 3) deg3.push_back(q);
    CHECK(degree(g, q) <= 3);
  }
  CHECK(deg3 == std::vector<Qubit>{1, 7, 8, 12, 14, 18, 19, 25});
  CHECK(degree(g, 0) == 1);
  CHECK(degree(g, 14) == 3);
  CHECK(oracle::edge_pairs(g) == oracle::hanoi_edges());
}

TEST_CASE("degree sums to twice the edge count") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_connected_graph(12, 0.2, seed);
    std::size_t sum = 0;
    for (Qubit q = 0; q < g.qubit_count(); ++q) sum += degree(g, q);
    CHECK(sum == 2 * g.edges().size());
  }
}

TEST_CASE("graph construction rejects bad edges") {
  CHECK_THROWS_AS(CouplingGraph(3, {{0, 0}}), DataError);
  CHECK_THROWS_AS(CouplingGraph(3, {{0, 1}, {1, 0}}), DataError);
  CHECK_THROWS_AS(CouplingGraph(3, {{0, 3}}), DataError);
  CHECK_THROWS_AS(degree(path3(), 7), std::out_of_range);
}

TEST_CASE("shortest paths on small fixtures") {
  const auto p = path3();
  CHECK(all_pairs_shortest_paths(p)(0, 2) == 2);
  CHECK(all_pairs_shortest_paths(p)(1, 1) == 0);
  CHECK(hanoi27().distance(1, 25) == 10);
  const CouplingGraph split(4, {{0, 1}, {2, 3}});
  CHECK(split.distance(0, 3) == kUnreachable);
  CHECK_FALSE(split.connected());
}

TEST_CASE("APSP agrees with an independent Floyd-Warshall on random graphs") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t n = 2 + seed % 11;
    const auto g = random_connected_graph(n, 0.25, seed);
    CHECK(g.connected());
    const auto ref = oracle::floyd_warshall(n, oracle::edge_pairs(g));
    const auto& d = all_pairs_shortest_paths(g);
    for (Qubit a = 0; a < n; ++a) {
      for (Qubit b = 0; b < n; ++b) {
        REQUIRE(d(a, b) == ref[a][b]);
        CHECK(d(a, b) == d(b, a));
        for (Qubit c = 0; c < n; ++c) CHECK(d(a, b) <= d(a, c) + d(c, b));
      }
    }
  }
}

TEST_CASE("parallel BFS kernel matches the serial references") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_connected_graph(150, 0.02, seed);
    std::vector<std::vector<Qubit>> adj(g.qubit_count());
    for (Qubit q = 0; q < g.qubit_count(); ++q) adj[q].assign(g.neighbors(q).begin(), g.neighbors(q).end());
    const auto par = kernels::bfs_all_pairs(adj);
    CHECK(par == kernels::serial::bfs_all_pairs(adj));
    CHECK(par == kernels::serial::floyd_warshall(g.qubit_count(), g.edges()));
  }
}

TEST_CASE("path_stddev") {
  const auto p = path3();
  CHECK(path_stddev(p, 1) == doctest::Approx(0.0));
  CHECK(path_stddev(p, 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(path_stddev(CouplingGraph(3, {{0, 1}}), 0), DataError);

  const auto g = hanoi27();
  const auto ref = oracle::floyd_warshall(27, oracle::hanoi_edges());
  for (Qubit q = 0; q < 27; ++q) CHECK(path_stddev(g, q) == doctest::Approx(double(oracle::sigma(ref, q))).epsilon(1e-12));
  // the spread key orders exactly like σ
  for (Qubit a = 0; a < 27; ++a) {
    for (Qubit b = 0; b < 27; ++b) {
      const long double sa = oracle::sigma(ref, a), sb = oracle::sigma(ref, b);
      if (sa + 1e-12 < sb) CHECK(path_spread_key(g, a) < path_spread_key(g, b));
    }
  }
  CHECK(path_spread_key(g, 12) == path_spread_key(g, 14));
}

TEST_CASE("density and compactness") {
  const auto k3 = triangle();
  const auto p = path3();
  CHECK(density(k3, QubitSubset({0, 1, 2})) == 1.0);
  CHECK(density(p, QubitSubset({0, 1, 2})) == doctest::Approx(2.0 / 3.0));
  CHECK(density(p, QubitSubset({1})) == 1.0);
  CHECK(compactness(p, QubitSubset({0, 1, 2})) == 1.0);
  CHECK(compactness(k3, QubitSubset({0, 1, 2})) == 0.5);
  CHECK(compactness(p, QubitSubset({2})) == 1.0);
  CHECK_THROWS_AS(compactness(p, QubitSubset({0, 2})), DataError);
}

TEST_CASE("tree-induced density is 2/n and path compactness is 1") {
  const auto g = hanoi27();
  // 0-1-2-3-5-8-9 is an induced path
  const std::vector<Qubit> path{0, 1, 2, 3, 5, 8, 9};
  for (std::size_t n = 2; n <= path.size(); ++n) {
    const QubitSubset s(std::vector<Qubit>(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(n)));
    CHECK(density(g, s) == doctest::Approx(2.0 / static_cast<double>(n)));
    CHECK(compactness(g, s) == doctest::Approx(1.0));
  }
}

TEST_CASE("QubitSubset validation") {
  CHECK_THROWS_AS(QubitSubset({}), std::invalid_argument);
  CHECK_THROWS_AS(QubitSubset({1, 1}), std::invalid_argument);
  const QubitSubset s({5, 2, 9});
  CHECK(s.contains(2));
  CHECK_FALSE(s.contains(3));
  CHECK(s.min_member() == 2);
  CHECK(std::vector<Qubit>(s.members().begin(), s.members().end()) == std::vector<Qubit>{5, 2, 9});
}

TEST_CASE("edge-list format round trip and diagnostics") {
  const auto g = hanoi27();
  const auto back = parse_edge_list(format_edge_list(g));
  CHECK(back.qubit_count() == 27);
  CHECK(oracle::edge_pairs(back) == oracle::edge_pairs(g));

  const auto c = parse_edge_list("# comment\nqubits 3\n\n0 1  # trailing\n1 2\n");
  CHECK(c.edges().size() == 2);

  try {
    parse_edge_list("qubits 3\n0 1\n1 x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_edge_list("0 1\n"), ParseError);
  CHECK_THROWS_AS(parse_edge_list("qubits 2\n0 5\n"), DataError);
  CHECK_THROWS_AS(load_topology("/nonexistent/file.txt"), ConfigError);
}
