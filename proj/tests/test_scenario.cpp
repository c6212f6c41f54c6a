#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "antwsn/scenario.hpp"
#include "antwsn/simulation.hpp"
#include "test_support.hpp"

using namespace antwsn;

namespace {

// Neighbor count of grid cell (r, c) in a k x k lattice whose radius covers
// the diagonal but not two cells: the 8-neighborhood clipped to the grid.
std::size_t grid_degree(int k, int r, int c) {
  std::size_t deg = 0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const int rr = r + dr;
      const int cc = c + dc;
      if (rr >= 0 && rr < k && cc >= 0 && cc < k) ++deg;
    }
  }
  return deg;
}

}  // namespace

TEST_CASE("grid neighbor counts match the clipped 8-neighborhood") {
  for (std::uint32_t n : {9u, 16u, 49u}) {
    const Topology topo = make_grid(n, 20.0, 35.0);
    const int k = static_cast<int>(std::lround(std::sqrt(n)));
    REQUIRE(topo.size() == n);
    CHECK(topo.side == doctest::Approx(20.0 * (k - 1)));
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) {
        CHECK(topo.neighbor_map[static_cast<std::size_t>(r * k + c)].size() == grid_degree(k, r, c));
      }
    }
  }
  const Topology nine = make_grid(9);
  CHECK(nine.neighbor_map[0].size() == 3);
  CHECK(nine.neighbor_map[1].size() == 5);
  CHECK(nine.neighbor_map[4].size() == 8);
}

TEST_CASE("grid rejects non-square node counts") {
  CHECK_THROWS_AS(make_grid(10), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0), std::invalid_argument);
}

TEST_CASE("random square sides keep the reference density") {
  CHECK(random_square_side(9) == doctest::Approx(60.0));
  CHECK(random_square_side(49) == doctest::Approx(140.0));
  CHECK(random_square_side(100) == doctest::Approx(200.0));
  const double reference = 49.0 / (140.0 * 140.0);
  for (std::uint32_t n : {9u, 16u, 36u, 49u, 64u, 100u}) {
    const double side = random_square_side(n);
    CHECK(n / (side * side) == doctest::Approx(reference));
  }
}

TEST_CASE("random squares are in bounds, symmetric, connected and reproducible") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomStream rng(seed, StreamId::Topology);
    const Topology topo = make_random_square(49, rng);
    for (const auto& p : topo.nodes) {
      CHECK(p.x >= 0.0);
      CHECK(p.x <= topo.side);
      CHECK(p.y >= 0.0);
      CHECK(p.y <= topo.side);
    }
    for (NodeId a = 0; a < topo.size(); ++a) {
      for (NodeId b : topo.neighbor_map[a]) {
        const auto& back = topo.neighbor_map[b];
        CHECK(std::find(back.begin(), back.end(), a) != back.end());
        CHECK(distance(topo.nodes[a], topo.nodes[b]) <= 35.0);
      }
    }
    CHECK(is_connected(topo.neighbor_map));

    RandomStream again(seed, StreamId::Topology);
    const Topology twin = make_random_square(49, again);
    for (std::size_t i = 0; i < topo.size(); ++i) {
      CHECK(twin.nodes[i].x == topo.nodes[i].x);
      CHECK(twin.nodes[i].y == topo.nodes[i].y);
    }
  }
}

TEST_CASE("mean degree is roughly density invariant") {
  auto mean_degree = [](std::uint32_t n) {
    double total = 0.0;
    int layouts = 0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      RandomStream rng(seed, StreamId::Topology);
      const Topology topo = make_random_square(n, rng);
      for (const auto& nb : topo.neighbor_map) total += static_cast<double>(nb.size());
      layouts += 1;
    }
    return total / (static_cast<double>(n) * layouts);
  };
  const double d49 = mean_degree(49);
  const double d100 = mean_degree(100);
  CHECK(d100 == doctest::Approx(d49).epsilon(0.2));
}

TEST_CASE("connectivity check") {
  CHECK(is_connected({{1}, {0, 2}, {1}}));
  CHECK_FALSE(is_connected({{1}, {0}, {}}));
  CHECK(is_connected({}));
}

TEST_CASE("sink trajectory is a circle of one revolution per run") {
  SinkTrajectory traj;
  traj.center = {100, 100};
  traj.radius = 35;
  traj.angular_speed = 2 * std::numbers::pi / 100.0;
  traj.side = 200;
  const Position p0 = advance_sink(traj, 0.0);
  CHECK(p0.x == doctest::Approx(135));
  CHECK(p0.y == doctest::Approx(100));
  const Position q = advance_sink(traj, 25.0);
  CHECK(q.x == doctest::Approx(100));
  CHECK(q.y == doctest::Approx(135));
  const Position full = advance_sink(traj, 100.0);
  CHECK(full.x == doctest::Approx(135));
  CHECK(full.y == doctest::Approx(100).epsilon(1e-9));
  for (double t = 0; t <= 100; t += 1.0) {
    const Position p = advance_sink(traj, t);
    CHECK(distance(p, traj.center) == doctest::Approx(35.0));
  }
}

TEST_CASE("sink positions are clipped into the deployment square") {
  SinkTrajectory traj;
  traj.center = {5, 5};
  traj.radius = 35;
  traj.angular_speed = 2 * std::numbers::pi / 100.0;
  traj.side = 140;
  for (double t = 0; t <= 100; t += 0.5) {
    const Position p = advance_sink(traj, t);
    CHECK(p.x >= 0.0);
    CHECK(p.y >= 0.0);
    CHECK(p.x <= 140.0);
    CHECK(p.y <= 140.0);
  }
  RandomStream rng(3, StreamId::Mobility);
  const SinkTrajectory made = make_trajectory(140.0, 100.0, rng);
  CHECK(made.radius == doctest::Approx(35.0));
  CHECK(made.angular_speed == doctest::Approx(2 * std::numbers::pi / 100.0));
}

TEST_CASE("traffic counts follow the rate") {
  RandomStream rng(9, StreamId::Traffic);
  const auto events = generate_traffic({0}, 1.0, 100.0, rng);
  // Mean inter-arrival is exactly 1/rate; the jitter bounds it in [0.5, 1.5].
  CHECK(events.size() >= 66);
  CHECK(events.size() <= 201);
  CHECK(static_cast<double>(events.size()) == doctest::Approx(100.0).epsilon(0.15));

  std::vector<NodeId> sources;
  for (NodeId n = 1; n <= 8; ++n) sources.push_back(n);
  double total = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    RandomStream r(100 + t, StreamId::Traffic);
    total += static_cast<double>(generate_traffic(sources, 0.5, 100.0, r).size());
  }
  CHECK(total / trials == doctest::Approx(8 * 0.5 * 100).epsilon(0.03));
}

TEST_CASE("traffic is sorted, numbered and reproducible") {
  RandomStream a(4, StreamId::Traffic);
  RandomStream b(4, StreamId::Traffic);
  const auto ea = generate_traffic({0, 1, 2, 3}, 0.3, 50.0, a);
  const auto eb = generate_traffic({0, 1, 2, 3}, 0.3, 50.0, b);
  REQUIRE(ea.size() == eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i) {
    CHECK(ea[i].event_id == i);
    CHECK(ea[i].time == eb[i].time);
    CHECK(ea[i].source == eb[i].source);
    CHECK(ea[i].time >= 0.0);
    CHECK(ea[i].time <= 50.0);
    if (i > 0) CHECK(ea[i - 1].time <= ea[i].time);
  }
  RandomStream c(4, StreamId::Traffic);
  CHECK(generate_traffic({0}, 0.0, 50.0, c).empty());
}

TEST_CASE("config keys parse, reject unknowns and report the line") {
  std::istringstream in("# comment\nprotocol = EEABR\nnodes=16  # trailing\n\nduration = 20\n");
  const ScenarioConfig cfg = load_config(in);
  CHECK(cfg.protocol == ProtocolKind::EEABR);
  CHECK(cfg.node_count == 16);
  CHECK(cfg.duration == 20.0);

  std::istringstream bad("nodes = 16\nwarp_drive = 1\n");
  try {
    load_config(bad, "x.cfg");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("x.cfg:2") != std::string::npos);
    CHECK(std::string(e.what()).find("warp_drive") != std::string::npos);
  }

  ScenarioConfig c;
  CHECK_THROWS_AS(apply_config_key(c, "nodes", "ten"), ConfigError);
  CHECK_THROWS_AS(apply_config_key(c, "duration", "1.5s"), ConfigError);
  CHECK_THROWS_AS(apply_config_key(c, "protocol", "aodv"), ConfigError);
  CHECK_THROWS_AS(apply_config_key(c, "scenario", "mobile"), ConfigError);
  std::istringstream no_eq("nodes 16\n");
  CHECK_THROWS_AS(load_config(no_eq), ConfigError);
}

TEST_CASE("config validation") {
  ScenarioConfig c;
  c.traffic_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ScenarioConfig{};
  c.layout = Layout::Grid;
  c.node_count = 10;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ScenarioConfig{};
  c.proto.rho = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ScenarioConfig{};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config defaults follow the scenario") {
  ScenarioConfig c;
  CHECK(c.effective_initial_energy() == 30.0);
  c.scenario = ScenarioKind::Dynamic;
  CHECK(c.effective_initial_energy() == 60.0);
  c.initial_energy = 5.0;
  CHECK(c.effective_initial_energy() == 5.0);
  c.node_count = 9;
  CHECK(c.effective_layout() == Layout::Grid);
  c.node_count = 49;
  CHECK(c.effective_layout() == Layout::RandomSquare);
}

TEST_CASE("dumped config reloads to the same config") {
  ScenarioConfig c;
  apply_config_key(c, "protocol", "ff");
  apply_config_key(c, "aco.rho", "0.25");
  apply_config_key(c, "seed.radio", "77");
  const std::string dumped = dump_config(c);
  std::istringstream in(dumped);
  const ScenarioConfig back = load_config(in);
  CHECK(dump_config(back) == dumped);
  CHECK(back.stream_seed(StreamId::Radio) == 77);
  CHECK(config_value(back, "aco.rho") == "0.25");
  for (const auto& info : config_keys()) CHECK(is_config_key(info.key));
}

TEST_CASE("static sink is the node nearest the random circle centre") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    const Topology topo = build_topology(cfg);
    RandomStream mobility(cfg.stream_seed(StreamId::Mobility), StreamId::Mobility);
    const SinkTrajectory traj = make_trajectory(topo.side, cfg.duration, mobility);
    NodeId best = 0;
    for (NodeId i = 1; i < topo.size(); ++i) {
      if (distance(topo.nodes[i], traj.center) < distance(topo.nodes[best], traj.center)) best = i;
    }
    CHECK(topo.sink_id == best);
  }
}

TEST_CASE("same seeds give the same topology and traffic") {
  ScenarioConfig cfg;
  cfg.node_count = 36;
  Simulation a(cfg);
  Simulation b(cfg);
  REQUIRE(a.topology().size() == b.topology().size());
  for (std::size_t i = 0; i < a.topology().size(); ++i) CHECK(a.topology().nodes[i].x == b.topology().nodes[i].x);
  REQUIRE(a.traffic().size() == b.traffic().size());
  for (std::size_t i = 0; i < a.traffic().size(); ++i) CHECK(a.traffic()[i].time == b.traffic()[i].time);
}

TEST_CASE("static sources are every node but the sink") {
  ScenarioConfig cfg;
  cfg.traffic_rate = 0.5;
  cfg.duration = 20;
  Simulation sim(cfg);
  std::set<NodeId> sources;
  for (const auto& ev : sim.traffic()) sources.insert(ev.source);
  CHECK_FALSE(sources.contains(sim.sink()));
  CHECK(sources.size() == sim.sensor_count() - 1);
}

TEST_CASE("dynamic scenario uses a moving mains-powered sink") {
  ScenarioConfig cfg;
  cfg.scenario = ScenarioKind::Dynamic;
  cfg.traffic_rate = 0.5;
  cfg.duration = 20;
  Simulation sim(cfg);
  REQUIRE(sim.virtual_sink());
  CHECK(sim.sink() == sim.sensor_count());
  CHECK(sim.network().size() == sim.sensor_count() + 1);
  CHECK(sim.network().ledger(sim.sink()).unlimited);
  std::set<NodeId> sources;
  for (const auto& ev : sim.traffic()) sources.insert(ev.source);
  CHECK(sources.size() == sim.sensor_count());

  const Position start = sim.network().position(sim.sink());
  sim.run_until(10.0);
  const Position later = sim.network().position(sim.sink());
  CHECK(distance(start, later) > 1.0);
  CHECK(sim.config().effective_initial_energy() == 60.0);
}

TEST_CASE("node-attached sink follows the nearest sensor") {
  ScenarioConfig cfg;
  cfg.scenario = ScenarioKind::Dynamic;
  cfg.sink_mode = SinkMode::NodeAttached;
  cfg.duration = 30;
  Simulation sim(cfg);
  CHECK_FALSE(sim.virtual_sink());
  CHECK(sim.network().size() == sim.sensor_count());
  RandomStream mobility(cfg.stream_seed(StreamId::Mobility), StreamId::Mobility);
  const SinkTrajectory traj = make_trajectory(sim.topology().side, cfg.duration, mobility);
  std::set<NodeId> visited;
  for (double t = 1.0; t <= 30.0; t += 1.0) {
    sim.run_until(t);
    CHECK(sim.sink() == nearest_node(sim.topology(), advance_sink(traj, t)));
    visited.insert(sim.sink());
  }
  CHECK(visited.size() > 1);
}
