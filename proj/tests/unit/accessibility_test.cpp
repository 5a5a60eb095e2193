#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tnd/accessibility.hpp"
#include "tnd/error.hpp"

using namespace tnd;

using fixtures::random_bus_lines;
using fixtures::to_bus_lines;

TEST(TravelTimes, CoLocatedPoiIsZero) {
  Scenario s;
  s.centroids = {{0, {1.0, 1.0}}};
  s.pois = {{0, {1.0, 1.0}, 1.0}};
  s.stops = {{0, {3.0, 3.0}, StopKind::bus_candidate}};
  s.params.num_lines = 1;
  const auto g = build_router_graph(s, {});
  EXPECT_EQ(shortest_travel_times(g, 0)[0], 0.0);
}

TEST(TravelTimes, WalkOnly) {
  Scenario s;
  s.centroids = {{0, {0.0, 0.0}}};
  s.pois = {{0, {1.5, 0.0}, 1.0}};
  s.stops = {{0, {0.0, 5.0}, StopKind::bus_candidate}};
  s.params.num_lines = 1;
  EXPECT_NEAR(shortest_travel_times(build_router_graph(s, {}), 0)[0], 20.0, 1e-12);
}

TEST(TravelTimes, BusBeatsWalking) {
  Scenario s;
  s.centroids = {{0, {0.0, 0.0}}};
  s.pois = {{0, {7.0, 0.0}, 1.0}};
  s.stops = {{1, {0.0, 0.0}, StopKind::bus_candidate}, {2, {7.0, 0.0}, StopKind::bus_candidate}};
  s.params.num_lines = 1;
  s.params.fleet_per_line = 5;  // 60 * 7 / (28 * 5) = 3 minutes
  const auto lines = to_bus_lines(s, {{1, 2}});
  ASSERT_DOUBLE_EQ(lines[0].headway_min, 3.0);
  s.params.fleet_per_line = 10;
  // Headway 6 as in the worked example: 3 (wait) + 15 (ride).
  BusLine six = lines[0];
  six.headway_min = 6.0;
  const double t = shortest_travel_times(build_router_graph(s, std::vector<BusLine>{six}), 0)[0];
  EXPECT_NEAR(t, 18.0, 1e-12);
  EXPECT_LT(t, 7.0 / 4.5 * 60.0);
  EXPECT_NEAR(7.0 / 4.5 * 60.0, 93.333333333, 1e-6);
}

TEST(TravelTimes, TransferPaysNextLineWait) {
  // Metro lines 10-11 (headway 4) and 11-12 (headway 8) share station 11.
  Scenario s;
  s.centroids = {{0, {0.0, 0.0}}};
  s.pois = {{0, {6.0, 6.0}, 1.0}};
  s.stops = {{1, {20.0, 20.0}, StopKind::bus_candidate},
             {10, {0.0, 0.0}, StopKind::metro},
             {11, {6.0, 0.0}, StopKind::metro},
             {12, {6.0, 6.0}, StopKind::metro}};
  s.metro_lines = {{1, {10, 11}, 4.0}, {2, {11, 12}, 8.0}};
  s.params.num_lines = 1;
  const double ride = 6.0 / 36.0 * 60.0;
  const double expected = 2.0 + ride + 4.0 + ride;
  EXPECT_NEAR(shortest_travel_times(build_router_graph(s, {}), 0)[0], expected, 1e-12);
}

TEST(TravelTimes, MatchesBruteForceOracle) {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 40; ++trial) {
    const Scenario s = oracle::random_small_scenario(gen);
    const auto lines = random_bus_lines(s, gen, 2);
    const auto g = build_router_graph(s, to_bus_lines(s, lines));
    for (std::size_t c = 0; c < s.centroids.size(); ++c) {
      const auto got = shortest_travel_times(g, c);
      const auto want = oracle::brute_force_travel_times(s, lines, c);
      for (std::size_t p = 0; p < want.size(); ++p) EXPECT_NEAR(got[p], want[p], 1e-9);
    }
  }
}

TEST(TravelTimes, OutOfRangeCentroid) {
  Scenario s;
  s.centroids = {{0, {0.0, 0.0}}};
  s.stops = {{0, {0.0, 5.0}, StopKind::bus_candidate}};
  EXPECT_THROW(shortest_travel_times(build_router_graph(s, {}), 1), ValidationError);
}

TEST(CentroidAccessibility, Examples) {
  const std::vector<Poi> one{{0, {}, 1.0}};
  EXPECT_EQ(centroid_accessibility(std::vector<double>{0.0}, one, 30.0), 1.0);
  EXPECT_EQ(centroid_accessibility(std::vector<double>{15.0}, one, 30.0), 0.5);
  const std::vector<Poi> three{{0, {}, 1.0}, {1, {}, 1.0}, {2, {}, 1.0}};
  EXPECT_EQ(centroid_accessibility(std::vector<double>{0.0, 15.0, 45.0}, three, 30.0), 1.5);
  const std::vector<Poi> weighted{{0, {}, 4.0}};
  EXPECT_EQ(centroid_accessibility(std::vector<double>{15.0}, weighted, 30.0), 2.0);
}

TEST(QuantileAccessibility, Examples) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_EQ(quantile_accessibility(v, 20.0), 1.0);
  EXPECT_EQ(quantile_accessibility(v, 100.0), 15.0);
  EXPECT_EQ(quantile_accessibility(std::vector<double>{2, 2, 2}, 50.0), 4.0);
}

TEST(QuantileAccessibility, CountUsesCeilingAndAtLeastOne) {
  EXPECT_EQ(quantile_count(5, 20.0), 1u);
  EXPECT_EQ(quantile_count(3, 50.0), 2u);
  EXPECT_EQ(quantile_count(3, 34.0), 2u);
  EXPECT_EQ(quantile_count(3, 33.0), 1u);
  EXPECT_EQ(quantile_count(1000, 0.01), 1u);
  EXPECT_EQ(quantile_count(7, 100.0), 7u);
  EXPECT_THROW(quantile_count(5, 0.0), ValidationError);
  EXPECT_THROW(quantile_count(5, 100.5), ValidationError);
}

TEST(QuantileAccessibility, TiesBrokenById) {
  const std::vector<double> v{3.0, 1.0, 1.0, 1.0};
  const std::vector<int> ids{0, 9, 4, 7};
  const auto worst = worst_set(v, ids, 50.0);
  ASSERT_EQ(worst.size(), 2u);
  EXPECT_EQ(worst[0], 2u);  // id 4
  EXPECT_EQ(worst[1], 3u);  // id 7
}

TEST(QuantileAccessibility, HundredIsExactTotalAndMonotone) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> val(0.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 60)(gen);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = val(gen);
    Scenario dummy;
    for (int i = 0; i < n; ++i) dummy.centroids.push_back({i, {}});
    const double qs[] = {100.0};
    const auto report = make_report(dummy, v, qs);
    EXPECT_EQ(report.acc_q.at(100.0), report.total());
    double prev = 0.0;
    for (double q = 1.0; q <= 100.0; q += 1.0) {
      const double a = quantile_accessibility(v, q);
      EXPECT_LE(prev, a);
      prev = a;
    }
  }
}

TEST(PerCentroid, BoundedByTotalWeightAndThreadInvariant) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = oracle::random_small_scenario(gen);
    const auto lines = random_bus_lines(s, gen, 2);
    const auto g = build_router_graph(s, to_bus_lines(s, lines));
    const auto a1 = per_centroid_accessibility(s, g, 1);
    const auto a3 = per_centroid_accessibility(s, g, 3);
    EXPECT_EQ(a1, a3);
    for (double a : a1) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, s.total_poi_weight() + 1e-12);
    }
  }
}

TEST(PerCentroid, AddingALineNeverHurts) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Scenario s = oracle::random_small_scenario(gen);
    auto ids = s.candidate_stop_ids();
    std::shuffle(ids.begin(), ids.end(), gen);
    const std::size_t cut = ids.size() / 2;
    std::vector<std::vector<int>> before{{ids.begin(), ids.begin() + static_cast<long>(std::max<std::size_t>(cut, 1))}};
    auto after = before;
    if (cut + 1 < ids.size()) after.push_back({ids.begin() + static_cast<long>(cut + 1), ids.end()});
    const auto a = per_centroid_accessibility(s, build_router_graph(s, to_bus_lines(s, before)));
    const auto b = per_centroid_accessibility(s, build_router_graph(s, to_bus_lines(s, after)));
    for (std::size_t c = 0; c < a.size(); ++c) EXPECT_GE(b[c], a[c] - 1e-12);
  }
}

TEST(Report, WorstIdsAndQuantiles) {
  Scenario s;
  for (int i = 0; i < 5; ++i) s.centroids.push_back({10 + i, {}});
  const double qs[] = {20.0, 100.0};
  const auto r = make_report(s, {5.0, 1.0, 4.0, 2.0, 3.0}, qs);
  EXPECT_EQ(r.acc_q.at(20.0), 1.0);
  EXPECT_EQ(r.worst_ids.at(20.0), std::vector<int>{11});
  EXPECT_EQ(r.worst_ids.at(100.0).size(), 5u);
  EXPECT_THROW(make_report(s, {1.0}, qs), ValidationError);
}
