#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "qalloc/allocation.hpp"
#include "qalloc/error.hpp"

using namespace qalloc;

namespace {

std::vector<Qubit> sorted_members(const QubitSubset& s) { return {s.sorted().begin(), s.sorted().end()}; }

CalibrationSnapshot random_snapshot(const CouplingGraph& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.001, 0.1);
  std::vector<double> c(g.edges().size()), r(g.qubit_count());
  for (auto& x : c) x = u(rng);
  for (auto& x : r) x = u(rng);
  return {g, 0, c, r};
}

// 0-1, 1-2, 2-3, 3-4, 1-3 with hand-set errors
struct Fixture5 {
  CouplingGraph g{5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 3}}};
  CalibrationSnapshot snap = make();

  CalibrationSnapshot make() const {
    std::vector<double> c(5);
    c[*g.edge_index(0, 1)] = 0.01;
    c[*g.edge_index(1, 2)] = 0.02;
    c[*g.edge_index(2, 3)] = 0.03;
    c[*g.edge_index(3, 4)] = 0.04;
    c[*g.edge_index(1, 3)] = 0.05;
    return {g, 0, c, {0.01, 0.02, 0.03, 0.04, 0.05}};
  }
};

}  // namespace

TEST_CASE("cfm") {
  const CouplingGraph star(4, {{0, 1}, {0, 2}, {0, 3}});
  const CalibrationSnapshot s(star, 0, {0.01, 0.01, 0.01}, {0.02, 0, 0, 0});
  CHECK(cfm(star, s, 0) == doctest::Approx(3.97));
  const CouplingGraph pair(2, {{0, 1}});
  CHECK(cfm(pair, CalibrationSnapshot::uniform(pair, 0, 0), 0) == 2.0);
  CalibrationSnapshot up = s;
  for (std::size_t e = 0; e < 3; ++e) up.set_cnot_error(e, 0.01 * 1.15);
  CHECK(cfm(star, up, 0) < cfm(star, s, 0));
}

TEST_CASE("cfm and cri on a hand-set five-node fixture") {
  const Fixture5 f;
  CHECK(std::abs(cfm(f.g, f.snap, 1) - (3.0 + 1.0 - ((0.01 + 0.02 + 0.05) / 3.0 + 0.02))) < 1e-12);
  CHECK(std::abs(cfm(f.g, f.snap, 4) - (1.0 + 1.0 - (0.04 + 0.05))) < 1e-12);
  // hardware: density 5/10, diameter 3 → compactness 3/4, E = 0.15/5, R = 0.15/5
  const double hw = (0.5 / 0.75) + (1.0 - (0.15 / 5.0 + 0.15 / 5.0));
  // {1,2,3}: triangle, density 1, compactness 1/2, E = 0.10/3, R = 0.09/3
  const double tri = (1.0 / 0.5) + (1.0 - (0.10 / 3.0 + 0.09 / 3.0));
  CHECK(std::abs(cri(f.g, f.snap, QubitSubset({1, 2, 3})) - tri / hw) < 1e-12);
  // {0,1}: one edge, density 1, compactness 1, E = 0.01, R = 0.015
  const double pair = 1.0 + (1.0 - (0.01 + 0.015));
  CHECK(std::abs(cri(f.g, f.snap, QubitSubset({0, 1})) - pair / hw) < 1e-12);
  // singleton {4}: no edges → E = 0
  const double single = 1.0 + (1.0 - 0.05);
  CHECK(std::abs(cri(f.g, f.snap, QubitSubset({4})) - single / hw) < 1e-12);
  CHECK(cri(f.g, f.snap, QubitSubset({0, 1, 2, 3, 4})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cri(f.g, f.snap, QubitSubset({0, 4})), DataError);
}

TEST_CASE("cri increases as intra-subset error falls") {
  const Fixture5 f;
  CalibrationSnapshot better = f.snap;
  // move error from an intra-subset edge to an outside one so the device-wide terms stay fixed
  better.set_cnot_error(*f.g.edge_index(1, 2), 0.001);
  better.set_cnot_error(*f.g.edge_index(3, 4), 0.04 + 0.019);
  CHECK(cri(f.g, better, QubitSubset({1, 2, 3})) > cri(f.g, f.snap, QubitSubset({1, 2, 3})));
}

TEST_CASE("greedy on P3 and hanoi27") {
  const CouplingGraph p(3, {{0, 1}, {1, 2}});
  const auto u = CalibrationSnapshot::uniform(p, 0.02, 0.02);
  const auto r = greedy_allocate(p, u, {2, QubitSubset({0, 1, 2})});
  REQUIRE(r);
  CHECK(std::vector<Qubit>(r->members.members().begin(), r->members.members().end()) == std::vector<Qubit>{1, 0});
  CHECK(r->score == doctest::Approx(cfm(p, u, 1)));
  const auto one = greedy_allocate(p, u, {1, QubitSubset({0, 1, 2})});
  REQUIRE(one);
  CHECK(sorted_members(one->members) == std::vector<Qubit>{1});
  CHECK_FALSE(greedy_allocate(p, u, {2, QubitSubset({0, 2})}));

  const auto h = hanoi27();
  const auto hu = CalibrationSnapshot::uniform(h, 0.02, 0.02);
  std::vector<Qubit> all(27);
  std::iota(all.begin(), all.end(), Qubit{0});
  const auto four = greedy_allocate(h, hu, {4, QubitSubset(all)});
  REQUIRE(four);
  CHECK(four->members.size() == 4);
  CHECK(oracle::connected_subset(h, sorted_members(four->members)));
  CHECK(degree(h, four->members.members()[0]) == 3);
}

TEST_CASE("greedy is unchanged by a constant shift of every qubit's error") {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = random_connected_graph(14, 0.15, seed);
    const auto snap = random_snapshot(g, rng);
    std::vector<double> r(snap.readout_errors().begin(), snap.readout_errors().end());
    for (auto& x : r) x += 0.125;
    const CalibrationSnapshot shifted(g, 0, {snap.cnot_errors().begin(), snap.cnot_errors().end()}, r);
    std::vector<Qubit> all(g.qubit_count());
    std::iota(all.begin(), all.end(), Qubit{0});
    for (std::size_t size = 1; size <= 6; ++size) {
      const auto a = greedy_allocate(g, snap, {size, QubitSubset(all)});
      const auto b = greedy_allocate(g, shifted, {size, QubitSubset(all)});
      REQUIRE(a);
      REQUIRE(b);
      CHECK(a->members == b->members);
    }
  }
}

TEST_CASE("louvain splits two bridged triangles and matches the exhaustive optimum") {
  const CouplingGraph g(6, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {3, 5}});
  const auto snap = CalibrationSnapshot::uniform(g, 0.0, 0.0);
  const auto comms = louvain(g, snap, QubitSubset({0, 1, 2, 3, 4, 5}), EdgeWeighting::Uniform);
  REQUIRE(comms.size() == 2);
  CHECK(sorted_members(comms[0]) == std::vector<Qubit>{0, 1, 2});
  CHECK(sorted_members(comms[1]) == std::vector<Qubit>{3, 4, 5});

  std::vector<std::tuple<Qubit, Qubit, double>> edges;
  for (const auto& e : g.edges()) edges.emplace_back(e.u, e.v, 1.0);
  double best = -1;
  std::vector<int> best_label;
  for (unsigned mask = 1; mask < (1u << 5); ++mask) {  // node 5 fixed in class 0
    std::vector<int> label(6, 0);
    for (int i = 0; i < 5; ++i) label[static_cast<std::size_t>(i)] = (mask >> i) & 1;
    const double q = oracle::modularity(6, edges, label);
    if (q > best + 1e-12) best = q, best_label = label;
  }
  std::vector<int> found(6);
  for (std::size_t c = 0; c < comms.size(); ++c)
    for (Qubit q : comms[c].members()) found[q] = static_cast<int>(c);
  CHECK(oracle::modularity(6, edges, found) == doctest::Approx(best));
}

TEST_CASE("louvain degenerate and zero-weight cases") {
  const CouplingGraph g(6, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {3, 5}});
  const auto one = louvain(g, CalibrationSnapshot::uniform(g, 0.1, 0.1), QubitSubset({4}));
  REQUIRE(one.size() == 1);
  CHECK(sorted_members(one[0]) == std::vector<Qubit>{4});

  std::vector<double> c(g.edges().size(), 0.02);
  c[*g.edge_index(2, 3)] = 1.0;
  const CalibrationSnapshot cut(g, 0, c, std::vector<double>(6, 0.0));
  for (const auto& comm : louvain(g, cut, QubitSubset({0, 1, 2, 3, 4, 5}))) {
    const bool left = comm.contains(2), right = comm.contains(3);
    CHECK_FALSE((left && right));
  }
}

TEST_CASE("louvain output is a connected disjoint cover") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = random_connected_graph(4 + seed % 20, 0.1, seed);
    const auto snap = random_snapshot(g, rng);
    std::vector<Qubit> avail;
    for (Qubit q = 0; q < g.qubit_count(); ++q)
      if (rng() % 4 != 0) avail.push_back(q);
    if (avail.empty()) avail.push_back(0);
    const auto comms = louvain(g, snap, QubitSubset(avail));
    std::multiset<Qubit> cover;
    for (const auto& c : comms) {
      CHECK(oracle::connected_subset(g, sorted_members(c)));
      cover.insert(c.members().begin(), c.members().end());
    }
    CHECK(std::vector<Qubit>(cover.begin(), cover.end()) == avail);
    CHECK(louvain(g, snap, QubitSubset(avail)).size() == comms.size());
  }
}

TEST_CASE("comdap returns an exact-size community verbatim") {
  std::mt19937_64 rng(5);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = random_connected_graph(8 + seed % 12, 0.1, seed);
    const auto snap = random_snapshot(g, rng);
    std::vector<Qubit> all(g.qubit_count());
    std::iota(all.begin(), all.end(), Qubit{0});
    const auto comms = louvain(g, snap, QubitSubset(all));
    for (const auto& c : comms) {
      const auto r = comdap_allocate(g, snap, {c.size(), QubitSubset(all)});
      REQUIRE(r);
      bool verbatim = false;
      for (const auto& d : comms) verbatim = verbatim || (d.size() == c.size() && sorted_members(d) == sorted_members(r->members));
      CHECK(verbatim);
      ++hits;
    }
  }
  CHECK(hits > 200);
}

TEST_CASE("comdap single-qubit request without a singleton community takes the best CFM qubit") {
  const auto h = hanoi27();
  std::vector<double> r(27, 0.02);
  r[19] = 0.001;
  const CalibrationSnapshot snap(h, 0, std::vector<double>(28, 0.02), r);
  std::vector<Qubit> all(27);
  std::iota(all.begin(), all.end(), Qubit{0});
  const auto p = comdap_allocate(h, snap, {1, QubitSubset(all)});
  REQUIRE(p);
  CHECK(sorted_members(p->members) == std::vector<Qubit>{19});
}

TEST_CASE("exact extraction maximises induced edges") {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g = random_connected_graph(9, 0.3, seed);
    const auto snap = random_snapshot(g, rng);
    std::vector<Qubit> all(9);
    std::iota(all.begin(), all.end(), Qubit{0});
    for (std::size_t size = 1; size <= 6; ++size) {
      std::size_t best = 0;
      for (unsigned mask = 0; mask < (1u << 9); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
        std::vector<Qubit> s;
        for (Qubit q = 0; q < 9; ++q)
          if (mask >> q & 1) s.push_back(q);
        if (!oracle::connected_subset(g, s)) continue;
        best = std::max(best, induced_edge_count(g, s));
      }
      const auto ex = extract_dense_subset(g, snap, QubitSubset(all), size, ExtractionMode::Exact);
      CHECK(ex.size() == size);
      CHECK(induced_edge_count(g, ex.sorted()) == best);
      const auto gr = extract_dense_subset(g, snap, QubitSubset(all), size, ExtractionMode::Greedy);
      CHECK(gr.size() == size);
      CHECK(oracle::connected_subset(g, sorted_members(gr)));
      CHECK(induced_edge_count(g, gr.sorted()) <= best);
    }
  }
}

TEST_CASE("both allocators return valid partitions on 1000 seeded instances") {
  std::mt19937_64 rng(2024);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const std::size_t n = 3 + seed % 25;
    const auto g = random_connected_graph(n, 0.08, seed);
    const auto snap = random_snapshot(g, rng);
    std::vector<Qubit> avail;
    for (Qubit q = 0; q < n; ++q)
      if (rng() % 3 != 0) avail.push_back(q);
    if (avail.empty()) avail.push_back(static_cast<Qubit>(seed % n));
    std::shuffle(avail.begin(), avail.end(), rng);
    const QubitSubset available(avail);
    const std::size_t size = 1 + rng() % avail.size();

    // largest connected region of the available set
    std::size_t largest = 0;
    for (Qubit start : avail) {
      std::vector<Qubit> comp{start}, stack{start};
      while (!stack.empty()) {
        const Qubit x = stack.back();
        stack.pop_back();
        for (Qubit y : g.neighbors(x))
          if (available.contains(y) && std::find(comp.begin(), comp.end(), y) == comp.end())
            comp.push_back(y), stack.push_back(y);
      }
      largest = std::max(largest, comp.size());
    }

    for (AllocatorKind kind : {AllocatorKind::Greedy, AllocatorKind::Comdap}) {
      const auto p = allocate(kind, g, snap, {size, available});
      if (!p) {
        if (kind == AllocatorKind::Comdap) CHECK(largest < size);
        continue;
      }
      CHECK(p->members.size() == size);
      for (Qubit q : p->members.members()) CHECK(available.contains(q));
      CHECK(oracle::connected_subset(g, sorted_members(p->members)));
      const auto again = allocate(kind, g, snap, {size, available});
      REQUIRE(again);
      CHECK(again->members == p->members);
    }
  }
}

TEST_CASE("allocator and weighting names") {
  CHECK(parse_allocator("greedy") == AllocatorKind::Greedy);
  CHECK(parse_allocator("comdap") == AllocatorKind::Comdap);
  CHECK_THROWS_AS(parse_allocator("random"), ConfigError);
  CHECK(parse_edge_weighting("uniform") == EdgeWeighting::Uniform);
  CHECK(to_string(EdgeWeighting::Fidelity) == "fidelity");
}
