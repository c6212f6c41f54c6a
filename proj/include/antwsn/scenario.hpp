#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "antwsn/phy_mac.hpp"
#include "antwsn/protocol_params.hpp"
#include "antwsn/routing_core.hpp"
#include "antwsn/sim_kernel.hpp"

namespace antwsn {

// Node density of the reference deployment: 49 nodes on a 140 m square.
inline constexpr double kReferenceSide = 140.0;
inline constexpr double kReferenceNodes = 49.0;

struct Topology {
  std::vector<Position> nodes;
  double side = 0.0;
  NodeId sink_id = 0;
  std::vector<std::vector<NodeId>> neighbor_map;  // ascending ids

  std::size_t size() const { return nodes.size(); }
};

std::vector<std::vector<NodeId>> build_neighbor_map(const std::vector<Position>& nodes, double radius);
bool is_connected(const std::vector<std::vector<NodeId>>& neighbor_map);

// sqrt(n) x sqrt(n) grid. Throws std::invalid_argument for non-square n.
Topology make_grid(std::uint32_t n, double spacing = 20.0, double radius = 35.0);

// Side length keeping the reference density: 140 * sqrt(n / 49).
double random_square_side(std::uint32_t n);

// Uniform placement on a density-preserving square, redrawn until the disk
// graph is connected. Throws std::runtime_error after `max_attempts`.
Topology make_random_square(std::uint32_t n, RandomStream& rng, double radius = 35.0,
                            std::uint32_t max_attempts = 1000);

NodeId nearest_node(const Topology& topo, Position p);

struct SinkTrajectory {
  Position center;
  double radius = 0.0;
  double angular_speed = 0.0;  // rad/s
  double update_period = 1.0;  // s
  double side = 0.0;           // positions are clipped into [0, side]^2
};

// Circle of radius side * radius_fraction, one revolution per `duration`,
// centre drawn uniformly in the square.
SinkTrajectory make_trajectory(double side, Seconds duration, RandomStream& rng, double radius_fraction = 0.25,
                               double update_period = 1.0);

// Position at angle angular_speed * t from the start point center + (radius, 0).
Position advance_sink(const SinkTrajectory& traj, Seconds t);

enum class Layout : std::uint8_t { Auto, Grid, RandomSquare };
enum class ScenarioKind : std::uint8_t { Static, Dynamic };
enum class SinkMode : std::uint8_t { Virtual, NodeAttached };

std::string_view to_string(Layout layout);
std::string_view to_string(ScenarioKind kind);
std::string_view to_string(SinkMode mode);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view s);

struct ScenarioConfig {
  ProtocolKind protocol = ProtocolKind::IEEABR;
  std::uint32_t node_count = 49;
  Layout layout = Layout::Auto;  // grid for 9 nodes, random square otherwise
  ScenarioKind scenario = ScenarioKind::Static;
  std::optional<double> initial_energy;  // 30 J static, 60 J dynamic when unset
  Seconds duration = 100.0;
  double traffic_rate = 0.02;  // events/s per source
  std::uint64_t seed = 1;
  std::map<StreamId, std::uint64_t> stream_seeds;  // explicit per-stream overrides
  double grid_spacing = 20.0;
  SinkMode sink_mode = SinkMode::Virtual;
  double sink_radius_fraction = 0.25;
  Seconds sink_update_period = 1.0;
  Seconds sample_period = 1.0;
  Seconds cache_timeout = 3.0;

  RadioParams radio;
  MacParams mac;
  EnergyParams energy;
  TripParams trip;
  ProtocolParams proto;

  double effective_initial_energy() const;
  Layout effective_layout() const;
  std::uint64_t stream_seed(StreamId id) const;
  // Throws ConfigError.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sets one `key = value` pair. Throws ConfigError on unknown keys or bad values.
void apply_config_key(ScenarioConfig& cfg, std::string_view key, std::string_view value);
bool is_config_key(std::string_view key);

struct ConfigKeyInfo {
  std::string key;
  std::string description;
};
std::vector<ConfigKeyInfo> config_keys();
// Current value of a key, formatted as it would be written in a config file.
std::string config_value(const ScenarioConfig& cfg, std::string_view key);

// Parses the flat `key = value` format ('#' starts a comment). Every
// non-blank line is handed to `on_pair`; errors carry the line number.
void parse_key_values(std::istream& in, const std::string& origin,
                      const std::function<void(std::string_view key, std::string_view value)>& on_pair);

ScenarioConfig load_config(std::istream& in, const std::string& origin = "<config>");
ScenarioConfig load_config_file(const std::string& path);
std::string dump_config(const ScenarioConfig& cfg);

struct TrafficEvent {
  Seconds time = 0.0;
  NodeId source = 0;
  std::uint64_t event_id = 0;
};

// Jittered periodic generation: each source's first event falls uniformly in
// [0, 1/rate), then inter-arrivals are (1/rate) * U(0.5, 1.5). Sorted by
// (time, source); ids follow that order. A zero rate yields no events.
std::vector<TrafficEvent> generate_traffic(const std::vector<NodeId>& sources, double rate, Seconds duration,
                                           RandomStream& rng);

// Topology for `cfg` with the sink bound to the node nearest a random circle
// centre (mobility stream).
Topology build_topology(const ScenarioConfig& cfg);

}  // namespace antwsn
