#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "antwsn/routing_core.hpp"
#include "test_support.hpp"

using namespace antwsn;
using testing_support::Gen;

TEST_CASE("table rows follow neighbor changes in every column") {
  RoutingTable t;
  t.add_neighbor(3, 0.0);
  t.add_neighbor(7, 0.0);
  t.set_column(9, {0.25, 0.75});
  t.set_column(2, {0.5, 0.5});
  CHECK(t.destinations() == std::vector<NodeId>{2, 9});
  CHECK(t.value(7, 9) == 0.75);

  t.add_neighbor(5, 0.1);
  CHECK(t.column(9) == std::vector<double>{0.25, 0.75, 0.1});
  CHECK(t.column(2) == std::vector<double>{0.5, 0.5, 0.1});
  t.add_neighbor(5, 0.9);  // already present: no-op
  CHECK(t.neighbors().size() == 3);

  t.remove_neighbor(3);
  CHECK(t.neighbors() == std::vector<NodeId>{7, 5});
  CHECK(t.column(9) == std::vector<double>{0.75, 0.1});
  CHECK(t.row_of(3) == RoutingTable::npos);
  CHECK_FALSE(t.has_neighbor(3));

  t.set(5, 9, 0.25);
  CHECK(t.value(5, 9) == 0.25);
  CHECK_THROWS_AS(t.set_column(1, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(t.column(42), std::out_of_range);
  CHECK_THROWS_AS(t.value(3, 9), std::out_of_range);
  t.drop_column(2);
  CHECK_FALSE(t.has_destination(2));
}

TEST_CASE("table CSV has neighbors as rows and destinations as columns") {
  RoutingTable t;
  t.add_neighbor(1, 0.0);
  t.add_neighbor(4, 0.0);
  t.set_column(0, {0.25, 0.75});
  t.set_column(6, {1.0, 0.0});
  CHECK(t.to_csv() == "neighbor,dest_0,dest_6\n1,0.25,1\n4,0.75,0\n");
}

TEST_CASE("stochastic column checks") {
  CHECK(column_is_stochastic({0.2, 0.3, 0.5}));
  CHECK(column_is_stochastic({1.0}));
  CHECK_FALSE(column_is_stochastic({}));
  CHECK_FALSE(column_is_stochastic({0.5, 0.6}));
  CHECK_FALSE(column_is_stochastic({1.2, -0.2}));
  CHECK_FALSE(column_is_stochastic({std::numeric_limits<double>::quiet_NaN(), 1.0}));
  CHECK(column_is_stochastic({0.5, 0.5 + 5e-10}));

  RoutingTable t;
  t.add_neighbor(1, 0.0);
  CHECK_FALSE(normalize_check(t, 0));
  t.set_column(0, {1.0});
  CHECK(normalize_check(t, 0));
}

TEST_CASE("bounded ant memory keeps the last two visits") {
  Ant ant;
  ant.memory_limit = 2;
  ant.visit(1, 0.0, 10.0);
  ant.visit(2, 0.1, 4.0);
  ant.visit(3, 0.2, 7.0);
  CHECK(ant.memory == std::vector<NodeId>{2, 3});
  CHECK(ant.stamps.empty());
  CHECK(ant.remembers(3));
  CHECK_FALSE(ant.remembers(1));
  CHECK(ant.hops == 3);
  CHECK(ant.e_min == 4.0);
  CHECK(ant.e_avg() == doctest::Approx(7.0));
}

TEST_CASE("unbounded ant memory keeps the path with timestamps") {
  Ant ant;
  for (NodeId n = 0; n < 5; ++n) ant.visit(n, 0.5 * n, 1.0);
  CHECK(ant.memory == std::vector<NodeId>{0, 1, 2, 3, 4});
  CHECK(ant.stamps == std::vector<Seconds>{0.0, 0.5, 1.0, 1.5, 2.0});
  Ant fresh;
  CHECK(fresh.e_avg() == 0.0);
}

TEST_CASE("ant cache detects a revisit within the record lifetime") {
  AntCache cache(3.0);
  const AntId id{4, 17};
  CHECK(cache.record_ant(id, 2, 1.0) == Admission::Accept);
  CHECK(cache.record_ant(id, 5, 2.0) == Admission::LoopDetected);
  const AntCacheRecord* rec = cache.find(id, 2.5);
  REQUIRE(rec != nullptr);
  CHECK(rec->previous == 2);  // the looping arrival did not overwrite it
  cache.set_forward(id, 9);
  CHECK(cache.find(id, 2.5)->forward == 9);
  CHECK(cache.find(id, 4.0) == nullptr);
  CHECK(cache.record_ant(id, 6, 4.0) == Admission::Accept);
  CHECK(cache.find(id, 4.5)->previous == 6);
}

TEST_CASE("ant cache purge and live count") {
  AntCache cache(1.0);
  for (std::uint32_t s = 0; s < 10; ++s) cache.record_ant({0, s}, 1, 0.1 * s);
  CHECK(cache.live_count(0.95) == 10);
  CHECK(cache.live_count(1.45) == 5);
  CHECK(cache.purge(1.45) == 5);
  CHECK(cache.live_count(1.45) == 5);
  CHECK(cache.purge(10.0) == 5);
  CHECK(cache.find({0, 9}, 10.0) == nullptr);
}

TEST_CASE("trip model follows the exponential update") {
  TripParams p;
  p.eta = 0.2;
  p.window = 3;
  TripModel m;
  m = update_trip_model(m, 2.0, p);
  CHECK(m.mu == 2.0);
  CHECK(m.sigma2 == 0.0);
  m = update_trip_model(m, 4.0, p);
  // mu = 2 + 0.2 * (4 - 2); sigma2 = 0 + 0.2 * ((4 - 2)^2 - 0)
  CHECK(m.mu == doctest::Approx(2.4));
  CHECK(m.sigma2 == doctest::Approx(0.8));
  m = update_trip_model(m, 1.0, p);
  // mu = 2.4 + 0.2 * (1 - 2.4); sigma2 = 0.8 + 0.2 * ((1 - 2.4)^2 - 0.8)
  CHECK(m.mu == doctest::Approx(2.12));
  CHECK(m.sigma2 == doctest::Approx(0.8 + 0.2 * (1.96 - 0.8)));
  CHECK(m.w_best() == 1.0);
  m = update_trip_model(m, 3.0, p);
  m = update_trip_model(m, 5.0, p);
  CHECK(m.window.size() == 3);
  CHECK(m.w_best() == 1.0);
  m = update_trip_model(m, 6.0, p);
  CHECK(m.w_best() == 3.0);
  CHECK(m.samples == 6);
  CHECK_THROWS_AS(update_trip_model(m, 0.0, p), std::invalid_argument);
}

TEST_CASE("confidence bounds") {
  CHECK(confidence_z(0.75) == doctest::Approx(2.0));
  CHECK(confidence_z(0.8) == doctest::Approx(1.0 / std::sqrt(0.2)));
  TripParams p;
  TripModel m;
  for (double t : {1.0, 2.0, 3.0, 4.0}) m = update_trip_model(m, t, p);
  const auto b = confidence_bounds(m, 0.75);
  CHECK(b.inf == 1.0);
  CHECK(b.sup == doctest::Approx(m.mu + 2.0 * std::sqrt(m.sigma2) / 2.0));
  CHECK_THROWS_AS(confidence_bounds(TripModel{}, 0.75), std::invalid_argument);
}

TEST_CASE("trip model statistics stay sane on random observations") {
  Gen g(23);
  TripParams p;
  for (int run = 0; run < 200; ++run) {
    TripModel m;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double t = g.real(0.001, 5.0);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      m = update_trip_model(m, t, p);
      REQUIRE(m.sigma2 >= 0.0);
      REQUIRE(m.mu >= lo - 1e-12);
      REQUIRE(m.mu <= hi + 1e-12);
      REQUIRE(m.window.size() <= p.window);
      const auto b = confidence_bounds(m, p.confidence);
      REQUIRE(b.inf >= lo);
      REQUIRE(b.sup >= m.mu - 1e-12);
    }
  }
}
