#include <cmath>
#include <random>

#include "doctest.h"
#include "qalloc/calibration.hpp"
#include "qalloc/error.hpp"

using namespace qalloc;

namespace {

CouplingGraph star3() { return CouplingGraph(4, {{0, 1}, {0, 2}, {0, 3}}); }

CalibrationSnapshot random_snapshot(const CouplingGraph& g, std::uint64_t cycle, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(g.edges().size()), r(g.qubit_count());
  for (auto& x : c) x = u(rng);
  for (auto& x : r) x = u(rng);
  return {g, cycle, c, r};
}

}  // namespace

TEST_CASE("avg_cnot_error") {
  const auto g = star3();
  const CalibrationSnapshot s(g, 0, {0.01, 0.02, 0.03}, {0, 0, 0, 0});
  CHECK(avg_cnot_error(s, g, 0) == doctest::Approx(0.02));
  CHECK(avg_cnot_error(s, g, 3) == 0.03);
  const auto h = hanoi27();
  const auto u = CalibrationSnapshot::uniform(h, 0.05, 0.01);
  for (Qubit q = 0; q < 27; ++q) CHECK(avg_cnot_error(u, h, q) == doctest::Approx(0.05));
  CHECK_THROWS_AS(avg_cnot_error(CalibrationSnapshot::uniform(CouplingGraph(2, {}), 0.1, 0.1),
                                 CouplingGraph(2, {}), 0),
                  DataError);
}

TEST_CASE("avg_cnot_error ignores edge order") {
  const CouplingGraph a(4, {{0, 1}, {0, 2}, {0, 3}});
  const CouplingGraph b(4, {{0, 3}, {0, 1}, {0, 2}});
  const double e01 = 0.013, e02 = 0.071, e03 = 0.029;
  const CalibrationSnapshot sa(a, 0, {e01, e02, e03}, {0, 0, 0, 0});
  std::vector<double> cb(3);
  cb[*b.edge_index(0, 1)] = e01;
  cb[*b.edge_index(0, 2)] = e02;
  cb[*b.edge_index(0, 3)] = e03;
  const CalibrationSnapshot sb(b, 0, cb, {0, 0, 0, 0});
  CHECK(avg_cnot_error(sa, a, 0) == avg_cnot_error(sb, b, 0));
}

TEST_CASE("snapshot validation") {
  const auto g = star3();
  CHECK_THROWS_AS(CalibrationSnapshot(g, 0, {0.1, 0.1}, {0, 0, 0, 0}), DataError);
  CHECK_THROWS_AS(CalibrationSnapshot(g, 0, {0.1, 0.1, 1.5}, {0, 0, 0, 0}), DataError);
  CHECK_THROWS_AS(CalibrationSnapshot(g, 0, {0.1, 0.1, 0.1}, {0, 0, -0.1, 0}), DataError);
  auto s = CalibrationSnapshot::uniform(g, 0.1, 0.1);
  CHECK_THROWS_AS(s.set_cnot_error(0, 2.0), DataError);
  CHECK_THROWS_AS(CalibrationSeries(g, {}), DataError);
  CHECK_THROWS_AS(CalibrationSeries(g, {CalibrationSnapshot::uniform(g, 0.1, 0.1, 3),
                                        CalibrationSnapshot::uniform(g, 0.1, 0.1, 3)}),
                  DataError);
}

TEST_CASE("calibration CSV parsing") {
  const CouplingGraph g(3, {{0, 1}, {1, 2}});
  const std::string ok =
      "cycle,kind,subject,value\n"
      "0,cnot,0-1,0.01\n0,cnot,1-2,0.02\n0,readout,0,0.1\n0,readout,1,0.1\n0,readout,2,0.1\n"
      "1,cnot,0-1,0.03\n1,cnot,1-2,0.04\n1,readout,0,0.2\n1,readout,1,0.2\n1,readout,2,0.2\n";
  const auto s = load_calibration_csv(ok, g);
  CHECK(s.size() == 2);
  CHECK(s[1].cnot_error(g, 1, 2) == 0.04);
  CHECK(s[0].readout_error(2) == 0.1);

  auto line_of = [&](const std::string& text) -> std::size_t {
    try {
      load_calibration_csv(text, g);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  std::string bad = ok;
  bad.replace(bad.find("0.03"), 4, "1.5");
  CHECK(line_of(bad) == 7);
  CHECK(line_of("cycle,kind,subject,value\n0,cnot,0-2,0.1\n") == 2);
  CHECK(line_of("cycle,kind,subject,value\n0,cnot,1-0,0.1\n") == 2);
  CHECK(line_of("cycle,kind,subject,value\n0,gate,0-1,0.1\n") == 2);
  CHECK(line_of("cycle,kind,subject\n") == 1);
  CHECK(line_of(ok + "0,cnot,0-1,0.01\n") > 0);  // descending cycle
  CHECK(line_of("cycle,kind,subject,value\n0,cnot,0-1,0.01\n0,cnot,0-1,0.01\n") == 3);
  CHECK_THROWS_AS(load_calibration_csv("cycle,kind,subject,value\n0,cnot,0-1,0.01\n", g), DataError);  // missing entries
  try {
    load_calibration_csv("", g);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("no snapshots") != std::string::npos);
  }
}

TEST_CASE("CSV round trip is the identity") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_connected_graph(8, 0.3, static_cast<std::uint64_t>(trial));
    std::vector<CalibrationSnapshot> snaps;
    for (std::uint64_t c = 0; c < 4; ++c) snaps.push_back(random_snapshot(g, c * 3 + 1, rng));
    const CalibrationSeries s(g, snaps);
    const auto back = load_calibration_csv(write_calibration_csv(s), g);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(back[i] == s[i]);
  }
}

TEST_CASE("synth_drift basics") {
  const auto g = hanoi27();
  const auto base = CalibrationSnapshot::uniform(g, 0.02, 0.03, 5);
  const auto a = synth_drift(g, base, 14, 0.3, 42);
  const auto b = synth_drift(g, base, 14, 0.3, 42);
  REQUIRE(a.size() == 14);
  for (std::size_t i = 0; i < 14; ++i) {
    CHECK(a[i] == b[i]);
    CHECK(a[i].cycle_id() == 5 + i);
    for (Qubit q = 0; q < 27; ++q) CHECK(a[i].readout_error(q) == 0.03);
  }
  CHECK_FALSE(synth_drift(g, base, 14, 0.3, 43)[0] == a[0]);

  const auto flat = synth_drift(g, base, 3, 1e-12, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    for (double e : flat[i].cnot_errors()) CHECK(e == doctest::Approx(0.02).epsilon(1e-9));
  }

  const auto big = synth_drift(g, CalibrationSnapshot::uniform(g, 0.9, 0.0), 50, 1.4, 3);
  for (std::size_t i = 0; i < big.size(); ++i) {
    for (double e : big[i].cnot_errors()) CHECK((e >= 0.0 && e <= 1.0));
  }
}

TEST_CASE("synth_drift per-edge coefficient of variation") {
  // 1000 seeds x 14 cycles; the mean per-edge CV must land within 20% of 0.30
  const CouplingGraph g(2, {{0, 1}});
  const auto base = CalibrationSnapshot::uniform(g, 0.02, 0.0);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto s = synth_drift(g, base, 14, 0.30, seed);
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 14; ++i) m += s[i].cnot_error(0);
    m /= 14;
    for (std::size_t i = 0; i < 14; ++i) v += (s[i].cnot_error(0) - m) * (s[i].cnot_error(0) - m);
    total += std::sqrt(v / 14) / m;
  }
  const double cv = total / 1000;
  CHECK(cv > 0.30 * 0.8);
  CHECK(cv < 0.30 * 1.2);
}

TEST_CASE("fluctuation_percent") {
  const CouplingGraph g(2, {{0, 1}});
  const CalibrationSeries two(g, {CalibrationSnapshot(g, 0, {0.01}, {0, 0}), CalibrationSnapshot(g, 1, {0.03}, {0, 0})});
  CHECK(fluctuation_percent(two, 0) == doctest::Approx(50.0));
  const CalibrationSeries flat(g, {CalibrationSnapshot(g, 0, {0.02}, {0, 0}), CalibrationSnapshot(g, 1, {0.02}, {0, 0})});
  CHECK(fluctuation_percent(flat, 0) == 0.0);
  CHECK_THROWS_AS(fluctuation_percent(CalibrationSeries(g, {CalibrationSnapshot(g, 0, {0.02}, {0, 0})}), 0), DataError);
  const CalibrationSeries zero(g, {CalibrationSnapshot(g, 0, {0.0}, {0, 0}), CalibrationSnapshot(g, 1, {0.0}, {0, 0})});
  CHECK_THROWS_AS(fluctuation_percent(zero, 0), DataError);

  // a single-edge qubit sees the raw edge drift: ≈30% within ±10 points
  const auto h = hanoi27();
  const auto s = synth_drift(h, CalibrationSnapshot::uniform(h, 0.02, 0.02), 14, 0.30, 11);
  double mean = 0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    mean += fluctuation_percent(synth_drift(h, CalibrationSnapshot::uniform(h, 0.02, 0.02), 14, 0.30, seed), 0);
    ++count;
  }
  mean /= count;
  CHECK(mean > 20.0);
  CHECK(mean < 40.0);
  CHECK(fluctuation_percent(s, 0) > 0.0);
}

TEST_CASE("mean_snapshot") {
  const CouplingGraph g(2, {{0, 1}});
  const std::vector<CalibrationSnapshot> v{CalibrationSnapshot(g, 0, {0.01}, {0.1, 0.2}),
                                           CalibrationSnapshot(g, 1, {0.03}, {0.3, 0.4})};
  const auto m = mean_snapshot(g, v, 9);
  CHECK(m.cycle_id() == 9);
  CHECK(m.cnot_error(0) == doctest::Approx(0.02));
  CHECK(m.readout_error(1) == doctest::Approx(0.3));
}
