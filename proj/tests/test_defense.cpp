#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "qalloc/adversary.hpp"
#include "qalloc/defense.hpp"
#include "qalloc/error.hpp"

using namespace qalloc;

namespace {

ErrorDistribution dist(std::vector<double> p) {
  ErrorDistribution d;
  for (std::size_t i = 0; i <= p.size(); ++i) d.bin_edges.push_back(static_cast<double>(i));
  d.probabilities = std::move(p);
  return d;
}

}  // namespace

TEST_CASE("histograms") {
  const std::vector<double> edges{0.0, 1.0, 2.0};
  const std::vector<double> in_one{0.1, 0.2, 0.9};
  const auto a = build_distribution(in_one, edges, 0.0);
  CHECK(a.probabilities == std::vector<double>{1.0, 0.0});
  const std::vector<double> spread{0.5, 1.5, 2.0};  // 2.0 falls in the closed last bin
  const auto b = build_distribution(spread, edges, 0.0);
  CHECK(b.probabilities[0] == doctest::Approx(1.0 / 3.0));
  CHECK(b.probabilities[1] == doctest::Approx(2.0 / 3.0));
  const auto c = build_distribution(in_one, edges, 1e-9);
  CHECK(c.probabilities[1] > 0.0);
  CHECK(c.probabilities[0] + c.probabilities[1] == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> out{3.0};
  CHECK_THROWS_AS(build_distribution(out, edges, 0.0), DataError);
  const std::vector<double> one_edge{0.0};
  CHECK_THROWS_AS(build_distribution(in_one, one_edge, 0.0), DataError);
  const std::vector<double> uniform{0.5, 1.5};
  CHECK(build_distribution(uniform, edges, 0.0).probabilities == std::vector<double>{0.5, 0.5});
}

TEST_CASE("KL divergence") {
  const auto p = dist({0.5, 0.5});
  const auto q = dist({0.25, 0.75});
  CHECK(kl_divergence(p, p) == 0.0);
  const double want = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(std::abs(kl_divergence(p, q) - want) < 1e-12);
  CHECK(std::abs(kl_divergence(p, q) - 0.1438) < 1e-4);
  CHECK(kl_divergence(q, p) != doctest::Approx(kl_divergence(p, q)));
  CHECK_THROWS_AS(kl_divergence(p, dist({0.2, 0.3, 0.5})), DataError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(6), b(6);
    double sa = 0, sb = 0;
    for (auto& x : a) sa += x = u(rng);
    for (auto& x : b) sb += x = u(rng);
    for (auto& x : a) x /= sa;
    for (auto& x : b) x /= sb;
    CHECK(kl_divergence(dist(a), dist(b)) >= 0.0);
  }
}

TEST_CASE("detect: identical windows, bad windows, order invariance") {
  const auto g = hanoi27();
  const auto base = CalibrationSnapshot::uniform(g, 0.02, 0.02);
  const auto s = synth_drift(g, base, 14, 0.3, 8);
  std::vector<CalibrationSnapshot> mirrored(s.snapshots().begin(), s.snapshots().begin() + 7);
  for (std::size_t i = 0; i < 7; ++i) {
    auto copy = s[i];
    copy.set_cycle_id(7 + i);
    mirrored.push_back(copy);
  }
  const CalibrationSeries twin(g, mirrored);
  const auto v = detect(twin, {0, 6}, {7, 13}, {10, 1e-9, 0.0});
  CHECK(v.qubits.size() == 27);
  for (const auto& q : v.qubits) CHECK(q.divergence == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(detect(twin, {0, 6}, {7, 13}, {10, 1e-9, 1e-6}).flagged().empty());

  CHECK_THROWS_AS(detect(s, {0, 7}, {7, 13}, {}), DataError);
  CHECK_THROWS_AS(detect(s, {0, 1}, {7, 13}, {}), DataError);

  // reversing cycles inside each window leaves divergences unchanged
  std::vector<CalibrationSnapshot> reversed;
  for (std::size_t i = 0; i < 14; ++i) {
    const std::size_t src = i < 7 ? 6 - i : 13 - (i - 7);
    auto copy = s[src];
    copy.set_cycle_id(i);
    reversed.push_back(copy);
  }
  const auto a = detect(s, {0, 6}, {7, 13}, {});
  const auto b = detect(CalibrationSeries(g, reversed), {0, 6}, {7, 13}, {});
  for (std::size_t i = 0; i < a.qubits.size(); ++i) CHECK(a.qubits[i].divergence == b.qubits[i].divergence);
}

TEST_CASE("parallel detect matches the serial reference") {
  const auto g = random_connected_graph(200, 0.01, 4);
  const auto s = synth_drift(g, CalibrationSnapshot::uniform(g, 0.02, 0.02), 14, 0.3, 2);
  const auto a = detect(s, {0, 6}, {7, 13}, {5, 1e-9, 0.1});
  const auto b = serial::detect(s, {0, 6}, {7, 13}, {5, 1e-9, 0.1});
  REQUIRE(a.qubits.size() == b.qubits.size());
  for (std::size_t i = 0; i < a.qubits.size(); ++i) {
    CHECK(a.qubits[i].qubit == b.qubits[i].qubit);
    CHECK(a.qubits[i].divergence == b.qubits[i].divergence);
    CHECK(a.qubits[i].flagged == b.qubits[i].flagged);
  }
}

TEST_CASE("calibrate_threshold") {
  std::vector<DetectionVerdict> runs(30);
  for (auto& r : runs) r.qubits = {{0, 0.4, false}, {1, 0.4, false}};
  CHECK(calibrate_threshold(runs, 95) == 0.4);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> pool;
  for (auto& r : runs) {
    r.qubits.clear();
    for (Qubit q = 0; q < 5; ++q) {
      pool.push_back(u(rng));
      r.qubits.push_back({q, pool.back(), false});
    }
  }
  std::sort(pool.begin(), pool.end());
  CHECK(calibrate_threshold(runs, 100) == pool.back());
  CHECK(calibrate_threshold(runs, 95) == pool[static_cast<std::size_t>(std::ceil(0.95 * 150)) - 1]);
  CHECK(calibrate_threshold(runs, 0) == pool.front());
  CHECK_THROWS_AS(calibrate_threshold(std::span<const DetectionVerdict>(runs.data(), 29), 95), DataError);
}

TEST_CASE("detection rate is non-decreasing in the shift size") {
  const auto g = hanoi27();
  const auto base = CalibrationSnapshot::uniform(g, 0.02, 0.02);
  const DetectionParams params{5, 1e-9, 0.0};
  std::vector<DetectionVerdict> honest;
  for (std::uint64_t seed = 0; seed < 100; ++seed) honest.push_back(detect(synth_drift(g, base, 14, 0.3, seed), {0, 6}, {7, 13}, params));
  const double tau = calibrate_threshold(honest, 95);
  std::vector<double> rates;
  for (double delta : {0.05, 0.10, 0.15}) {
    const MisreportPlan plan{Heuristic::H1, {{12, delta, 0}, {14, delta, 0}, {8, delta, 0}}};
    int hits = 0;
    for (std::uint64_t seed = 1000; seed < 1300; ++seed) {
      auto s = synth_drift(g, base, 14, 0.3, seed);
      std::vector<CalibrationSnapshot> v(s.snapshots().begin(), s.snapshots().end());
      for (std::size_t i = 7; i < 14; ++i) v[i] = apply_misreport(v[i], g, plan);
      const auto verdict = detect(CalibrationSeries(g, v), {0, 6}, {7, 13}, {5, 1e-9, tau});
      for (const auto& q : verdict.qubits)
        if (q.flagged && (q.qubit == 12 || q.qubit == 14 || q.qubit == 8)) ++hits;
    }
    rates.push_back(hits / 900.0);
  }
  CHECK(rates[1] >= rates[0] - 0.02);
  CHECK(rates[2] >= rates[1] - 0.02);
  CHECK(rates[2] > rates[0]);
}

TEST_CASE("threshold detector and KDE") {
  const auto g = hanoi27();
  const auto flat = synth_drift(g, CalibrationSnapshot::uniform(g, 0.02, 0.02), 14, 1e-9, 1);
  CHECK(threshold_detector_flags(flat, 0.15).empty());
  const std::vector<double> samples{0.0, 0.0, 0.0};
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  const auto k = gaussian_kde(samples, grid);
  CHECK(k[1] > k[0]);
  const std::vector<double> many{1.0, 2.0, 3.0, 4.0};
  std::vector<double> fine;
  for (int i = -400; i <= 800; ++i) fine.push_back(i * 0.01);
  const auto dens = gaussian_kde(many, fine);
  double area = 0;
  for (double d : dens) area += d * 0.01;
  CHECK(area == doctest::Approx(1.0).epsilon(0.01));
}
