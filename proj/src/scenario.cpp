#include "antwsn/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace antwsn {

std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::BABR: return "babr";
    case ProtocolKind::SC: return "sc";
    case ProtocolKind::FF: return "ff";
    case ProtocolKind::FP: return "fp";
    case ProtocolKind::EEABR: return "eeabr";
    case ProtocolKind::IEEABR: return "ieeabr";
  }
  return "unknown";
}

std::optional<ProtocolKind> parse_protocol(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (ProtocolKind k : kAllProtocols) {
    if (to_string(k) == lower) return k;
  }
  return std::nullopt;
}

void ProtocolParams::validate() const {
  if (std::abs(c1 + c2 - 1.0) > 1e-9) throw std::invalid_argument("babr.c1 + babr.c2 must equal 1");
  if (c1 < 0.0 || c2 < 0.0) throw std::invalid_argument("babr.c1 and babr.c2 must be non-negative");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("aco.rho must lie in (0, 1)");
  if (!(phi > 0.0)) throw std::invalid_argument("aco.phi must be positive");
  if (alpha < 0.0 || beta < 0.0) throw std::invalid_argument("aco.alpha and aco.beta must be non-negative");
  if (!(delta_tau_max > 0.0)) throw std::invalid_argument("aco.delta_tau_max must be positive");
  if (!(visibility_epsilon > 0.0)) throw std::invalid_argument("aco.visibility_epsilon must be positive");
  if (!(ant_interval > 0.0)) throw std::invalid_argument("ant.interval must be positive");
  if (flood_delay_max < 0.0) throw std::invalid_argument("ant.flood_delay_max must be non-negative");
  if (ant_cap_multiplier < 1) throw std::invalid_argument("ieeabr.ant_cap_multiplier must be >= 1");
  if (!(initial_energy > 0.0)) throw std::invalid_argument("initial energy must be positive");
}

std::vector<std::vector<NodeId>> build_neighbor_map(const std::vector<Position>& nodes, double radius) {
  std::vector<std::vector<NodeId>> map(nodes.size());
  for (NodeId a = 0; a < nodes.size(); ++a) {
    for (NodeId b = a + 1; b < nodes.size(); ++b) {
      if (distance(nodes[a], nodes[b]) <= radius) {
        map[a].push_back(b);
        map[b].push_back(a);
      }
    }
  }
  for (auto& list : map) std::sort(list.begin(), list.end());
  return map;
}

bool is_connected(const std::vector<std::vector<NodeId>>& neighbor_map) {
  if (neighbor_map.empty()) return true;
  std::vector<bool> seen(neighbor_map.size(), false);
  std::queue<NodeId> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const NodeId n = frontier.front();
    frontier.pop();
    for (NodeId m : neighbor_map[n]) {
      if (!seen[m]) {
        seen[m] = true;
        ++reached;
        frontier.push(m);
      }
    }
  }
  return reached == neighbor_map.size();
}

Topology make_grid(std::uint32_t n, double spacing, double radius) {
  const auto k = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(n))));
  if (n == 0 || k * k != n) throw std::invalid_argument("grid size must be a perfect square, got " + std::to_string(n));
  Topology topo;
  topo.side = spacing * (k - 1);
  for (std::uint32_t row = 0; row < k; ++row) {
    for (std::uint32_t col = 0; col < k; ++col) topo.nodes.push_back({col * spacing, row * spacing});
  }
  topo.neighbor_map = build_neighbor_map(topo.nodes, radius);
  return topo;
}

double random_square_side(std::uint32_t n) { return kReferenceSide * std::sqrt(n / kReferenceNodes); }

Topology make_random_square(std::uint32_t n, RandomStream& rng, double radius, std::uint32_t max_attempts) {
  if (n < 2) throw std::invalid_argument("random topology needs at least 2 nodes");
  Topology topo;
  topo.side = random_square_side(n);
  for (std::uint32_t attempt = 0; attempt < max_attempts; ++attempt) {
    topo.nodes.clear();
    for (std::uint32_t i = 0; i < n; ++i) topo.nodes.push_back({rng.uniform(0.0, topo.side), rng.uniform(0.0, topo.side)});
    topo.neighbor_map = build_neighbor_map(topo.nodes, radius);
    if (is_connected(topo.neighbor_map)) return topo;
  }
  throw std::runtime_error("no connected topology of " + std::to_string(n) + " nodes after " +
                           std::to_string(max_attempts) + " attempts");
}

NodeId nearest_node(const Topology& topo, Position p) {
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (NodeId i = 0; i < topo.nodes.size(); ++i) {
    const double d = distance(topo.nodes[i], p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

SinkTrajectory make_trajectory(double side, Seconds duration, RandomStream& rng, double radius_fraction,
                               double update_period) {
  SinkTrajectory traj;
  traj.center = {rng.uniform(0.0, side), rng.uniform(0.0, side)};
  traj.radius = side * radius_fraction;
  traj.angular_speed = duration > 0.0 ? 2.0 * std::numbers::pi / duration : 0.0;
  traj.update_period = update_period;
  traj.side = side;
  return traj;
}

Position advance_sink(const SinkTrajectory& traj, Seconds t) {
  const double angle = traj.angular_speed * t;
  Position p{traj.center.x + traj.radius * std::cos(angle), traj.center.y + traj.radius * std::sin(angle)};
  p.x = std::clamp(p.x, 0.0, traj.side);
  p.y = std::clamp(p.y, 0.0, traj.side);
  return p;
}

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::Auto: return "auto";
    case Layout::Grid: return "grid";
    case Layout::RandomSquare: return "random-square";
  }
  return "unknown";
}

std::string_view to_string(ScenarioKind kind) { return kind == ScenarioKind::Static ? "static" : "dynamic"; }

std::string_view to_string(SinkMode mode) { return mode == SinkMode::Virtual ? "virtual" : "node"; }

std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) {
  if (s == "static") return ScenarioKind::Static;
  if (s == "dynamic") return ScenarioKind::Dynamic;
  return std::nullopt;
}

double ScenarioConfig::effective_initial_energy() const {
  if (initial_energy) return *initial_energy;
  return scenario == ScenarioKind::Static ? 30.0 : 60.0;
}

Layout ScenarioConfig::effective_layout() const {
  if (layout != Layout::Auto) return layout;
  return node_count == 9 ? Layout::Grid : Layout::RandomSquare;
}

std::uint64_t ScenarioConfig::stream_seed(StreamId id) const {
  const auto it = stream_seeds.find(id);
  return it != stream_seeds.end() ? it->second : derive_stream_seed(seed, id);
}

void ScenarioConfig::validate() const {
  try {
    if (node_count < 2) throw std::invalid_argument("nodes must be >= 2");
    if (effective_layout() == Layout::Grid) {
      const auto k = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(node_count))));
      if (k * k != node_count) throw std::invalid_argument("grid layout needs a perfect-square node count");
    }
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (!(effective_initial_energy() > 0.0)) throw std::invalid_argument("initial_energy must be positive");
    if (!(traffic_rate > 0.0)) throw std::invalid_argument("traffic_rate must be positive");
    if (!(grid_spacing > 0.0)) throw std::invalid_argument("grid_spacing must be positive");
    if (!(sink_update_period > 0.0)) throw std::invalid_argument("sink_update_period must be positive");
    if (sink_radius_fraction < 0.0) throw std::invalid_argument("sink_radius_fraction must be non-negative");
    if (!(sample_period > 0.0)) throw std::invalid_argument("sample_period must be positive");
    if (!(cache_timeout > 0.0)) throw std::invalid_argument("routing.cache_timeout must be positive");
    if (!(trip.eta > 0.0 && trip.eta < 1.0)) throw std::invalid_argument("routing.eta must lie in (0, 1)");
    if (trip.window == 0) throw std::invalid_argument("routing.window must be positive");
    if (!(trip.confidence > 0.0 && trip.confidence < 1.0)) {
      throw std::invalid_argument("routing.confidence must lie in (0, 1)");
    }
    radio.validate();
    mac.validate();
    energy.validate();
    ProtocolParams p = proto;
    p.initial_energy = effective_initial_energy();
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string text(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || !std::isfinite(out)) {
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + text + "'");
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid integer for '" + std::string(key) + "': '" + std::string(v) + "'");
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct KeySpec {
  std::string_view key;
  std::string_view description;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define ANTWSN_DOUBLE_KEY(name, doc, member)                                                            \
  KeySpec {                                                                                             \
    name, doc, [](ScenarioConfig& c, std::string_view v) { c.member = parse_double(name, v); },        \
        [](const ScenarioConfig& c) { return format_double(c.member); }                                 \
  }
#define ANTWSN_UINT_KEY(name, doc, member)                                                              \
  KeySpec {                                                                                             \
    name, doc,                                                                                          \
        [](ScenarioConfig& c, std::string_view v) { c.member = parse_int<decltype(c.member)>(name, v); }, \
        [](const ScenarioConfig& c) { return std::to_string(c.member); }                                \
  }

KeySpec stream_seed_key(std::string_view name, std::string_view doc, StreamId id) {
  return KeySpec{name, doc,
                 [name, id](ScenarioConfig& c, std::string_view v) {
                   c.stream_seeds[id] = parse_int<std::uint64_t>(name, v);
                 },
                 [id](const ScenarioConfig& c) { return std::to_string(c.stream_seed(id)); }};
}

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      KeySpec{"protocol", "routing protocol: babr | sc | ff | fp | eeabr | ieeabr",
              [](ScenarioConfig& c, std::string_view v) {
                const auto p = parse_protocol(v);
                if (!p) throw ConfigError("unknown protocol '" + std::string(v) + "'");
                c.protocol = *p;
              },
              [](const ScenarioConfig& c) { return std::string(to_string(c.protocol)); }},
      ANTWSN_UINT_KEY("nodes", "number of sensor nodes (>= 2)", node_count),
      KeySpec{"layout", "auto | grid | random-square (auto: grid for 9 nodes, random square otherwise)",
              [](ScenarioConfig& c, std::string_view v) {
                if (v == "auto") c.layout = Layout::Auto;
                else if (v == "grid") c.layout = Layout::Grid;
                else if (v == "random-square") c.layout = Layout::RandomSquare;
                else throw ConfigError("unknown layout '" + std::string(v) + "'");
              },
              [](const ScenarioConfig& c) { return std::string(to_string(c.layout)); }},
      KeySpec{"scenario", "static | dynamic (mobile sink)",
              [](ScenarioConfig& c, std::string_view v) {
                const auto k = parse_scenario_kind(v);
                if (!k) throw ConfigError("unknown scenario '" + std::string(v) + "'");
                c.scenario = *k;
              },
              [](const ScenarioConfig& c) { return std::string(to_string(c.scenario)); }},
      KeySpec{"initial_energy", "per-node battery in J (default 30 static, 60 dynamic)",
              [](ScenarioConfig& c, std::string_view v) { c.initial_energy = parse_double("initial_energy", v); },
              [](const ScenarioConfig& c) { return format_double(c.effective_initial_energy()); }},
      ANTWSN_DOUBLE_KEY("duration", "simulated seconds", duration),
      ANTWSN_DOUBLE_KEY("traffic_rate", "data events per second per source", traffic_rate),
      ANTWSN_UINT_KEY("seed", "base seed; every stream seed derives from it unless overridden", seed),
      stream_seed_key("seed.topology", "seed of the topology stream", StreamId::Topology),
      stream_seed_key("seed.radio", "seed of the radio-noise stream", StreamId::Radio),
      stream_seed_key("seed.mac", "seed of the MAC back-off stream", StreamId::Mac),
      stream_seed_key("seed.protocol", "seed of the protocol-choice stream", StreamId::Protocol),
      stream_seed_key("seed.traffic", "seed of the traffic stream", StreamId::Traffic),
      stream_seed_key("seed.mobility", "seed of the sink-placement/mobility stream", StreamId::Mobility),
      ANTWSN_DOUBLE_KEY("grid_spacing", "m between adjacent grid nodes", grid_spacing),
      KeySpec{"sink_mode", "virtual (mobile non-forwarding sink) | node (sink re-binds to the nearest node)",
              [](ScenarioConfig& c, std::string_view v) {
                if (v == "virtual") c.sink_mode = SinkMode::Virtual;
                else if (v == "node") c.sink_mode = SinkMode::NodeAttached;
                else throw ConfigError("unknown sink_mode '" + std::string(v) + "'");
              },
              [](const ScenarioConfig& c) { return std::string(to_string(c.sink_mode)); }},
      ANTWSN_DOUBLE_KEY("sink_radius_fraction", "sink circle radius as a fraction of the square side",
                        sink_radius_fraction),
      ANTWSN_DOUBLE_KEY("sink_update_period", "s between sink position updates", sink_update_period),
      ANTWSN_DOUBLE_KEY("sample_period", "s between metric time-series samples", sample_period),
      ANTWSN_DOUBLE_KEY("radio.p_transmit", "transmit signal power", radio.p_transmit),
      ANTWSN_DOUBLE_KEY("radio.gamma", "path-loss decay exponent, 2..4", radio.gamma),
      ANTWSN_DOUBLE_KEY("radio.sigma_alpha", "std-dev of the multiplicative disturbance", radio.sigma_alpha),
      ANTWSN_DOUBLE_KEY("radio.sigma_beta", "std-dev of the additive disturbance", radio.sigma_beta),
      ANTWSN_DOUBLE_KEY("radio.rx_threshold", "reception threshold (0 derives it from tx_radius)",
                        radio.rx_threshold),
      ANTWSN_DOUBLE_KEY("radio.tx_radius", "nominal transmission radius in m", radio.tx_radius),
      ANTWSN_DOUBLE_KEY("mac.bitrate", "channel bitrate in bit/s", mac.bitrate),
      ANTWSN_UINT_KEY("mac.ant_frame_bytes", "size of ant frames", mac.ant_frame_bytes),
      ANTWSN_UINT_KEY("mac.data_frame_bytes", "size of data frames", mac.data_frame_bytes),
      ANTWSN_UINT_KEY("mac.cw_min_slots", "lower bound of the contention window", mac.cw_min_slots),
      ANTWSN_UINT_KEY("mac.cw_max_slots", "initial upper bound of the contention window", mac.cw_max_slots),
      ANTWSN_UINT_KEY("mac.max_backoff_retries", "busy-channel retries before a frame is dropped",
                      mac.max_backoff_retries),
      ANTWSN_UINT_KEY("mac.unicast_retries", "retransmissions of an unacknowledged unicast", mac.unicast_retries),
      ANTWSN_UINT_KEY("mac.queue_limit", "frames buffered per node", mac.queue_limit),
      ANTWSN_DOUBLE_KEY("energy.tx_per_bit", "J per transmitted bit", energy.tx_per_bit),
      ANTWSN_DOUBLE_KEY("energy.rx_per_bit", "J per received bit", energy.rx_per_bit),
      ANTWSN_DOUBLE_KEY("energy.idle_per_s", "J per second of idle listening", energy.idle_per_s),
      ANTWSN_DOUBLE_KEY("routing.eta", "trip-time model learning weight", trip.eta),
      ANTWSN_UINT_KEY("routing.window", "trip-time observation window size", trip.window),
      ANTWSN_DOUBLE_KEY("routing.confidence", "confidence level of the trip-time interval", trip.confidence),
      ANTWSN_DOUBLE_KEY("routing.cache_timeout", "s an ant record stays in a node's ant cache", cache_timeout),
      ANTWSN_DOUBLE_KEY("ant.interval", "s between forward-ant launches at each source", proto.ant_interval),
      ANTWSN_DOUBLE_KEY("ant.flood_delay_max", "upper bound of the random rebroadcast delay (s)",
                        proto.flood_delay_max),
      ANTWSN_DOUBLE_KEY("babr.c1", "reinforcement weight of W_best/T", proto.c1),
      ANTWSN_DOUBLE_KEY("babr.c2", "reinforcement weight of the confidence term", proto.c2),
      ANTWSN_DOUBLE_KEY("sc.beta", "exponent of the sensor-driven initial probabilities", proto.sc_beta),
      ANTWSN_DOUBLE_KEY("aco.alpha", "trail exponent of the energy-aware next-hop rule", proto.alpha),
      ANTWSN_DOUBLE_KEY("aco.beta", "visibility exponent of the energy-aware next-hop rule", proto.beta),
      ANTWSN_DOUBLE_KEY("aco.rho", "pheromone evaporation coefficient", proto.rho),
      ANTWSN_DOUBLE_KEY("aco.phi", "pheromone deposit attenuation coefficient", proto.phi),
      ANTWSN_DOUBLE_KEY("aco.delta_tau_max", "deposit used when the deposit formula degenerates",
                        proto.delta_tau_max),
      ANTWSN_DOUBLE_KEY("aco.visibility_epsilon", "floor of (C - e_s) as a fraction of C", proto.visibility_epsilon),
      ANTWSN_UINT_KEY("ieeabr.ant_cap_multiplier", "live forward ants are capped at multiplier * nodes",
                      proto.ant_cap_multiplier),
  };
  return specs;
}

#undef ANTWSN_DOUBLE_KEY
#undef ANTWSN_UINT_KEY

const KeySpec* find_key(std::string_view key) {
  for (const auto& spec : key_specs()) {
    if (spec.key == key) return &spec;
  }
  return nullptr;
}

}  // namespace

void apply_config_key(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError("unknown config key '" + std::string(key) + "'");
  spec->set(cfg, value);
}

bool is_config_key(std::string_view key) { return find_key(key) != nullptr; }

std::vector<ConfigKeyInfo> config_keys() {
  std::vector<ConfigKeyInfo> out;
  for (const auto& spec : key_specs()) out.push_back({std::string(spec.key), std::string(spec.description)});
  return out;
}

std::string config_value(const ScenarioConfig& cfg, std::string_view key) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return spec->get(cfg);
}

void parse_key_values(std::istream& in, const std::string& origin,
                      const std::function<void(std::string_view, std::string_view)>& on_pair) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    try {
      on_pair(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

ScenarioConfig load_config(std::istream& in, const std::string& origin) {
  ScenarioConfig cfg;
  parse_key_values(in, origin, [&cfg](std::string_view k, std::string_view v) { apply_config_key(cfg, k, v); });
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return load_config(in, path);
}

std::string dump_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  for (const auto& spec : key_specs()) out << spec.key << " = " << spec.get(cfg) << '\n';
  return out.str();
}

std::vector<TrafficEvent> generate_traffic(const std::vector<NodeId>& sources, double rate, Seconds duration,
                                           RandomStream& rng) {
  std::vector<TrafficEvent> events;
  if (rate <= 0.0) return events;
  const double interval = 1.0 / rate;
  for (NodeId src : sources) {
    Seconds t = rng.uniform(0.0, interval);
    while (t <= duration) {
      events.push_back({t, src, 0});
      t += interval * rng.uniform(0.5, 1.5);
    }
  }
  std::sort(events.begin(), events.end(), [](const TrafficEvent& a, const TrafficEvent& b) {
    return a.time != b.time ? a.time < b.time : a.source < b.source;
  });
  for (std::size_t i = 0; i < events.size(); ++i) events[i].event_id = i;
  return events;
}

Topology build_topology(const ScenarioConfig& cfg) {
  Topology topo;
  if (cfg.effective_layout() == Layout::Grid) {
    topo = make_grid(cfg.node_count, cfg.grid_spacing, cfg.radio.tx_radius);
  } else {
    RandomStream rng(cfg.stream_seed(StreamId::Topology), StreamId::Topology);
    topo = make_random_square(cfg.node_count, rng, cfg.radio.tx_radius);
  }
  RandomStream mobility(cfg.stream_seed(StreamId::Mobility), StreamId::Mobility);
  const SinkTrajectory traj =
      make_trajectory(topo.side, cfg.duration, mobility, cfg.sink_radius_fraction, cfg.sink_update_period);
  const Position anchor = cfg.scenario == ScenarioKind::Static ? traj.center : advance_sink(traj, 0.0);
  topo.sink_id = nearest_node(topo, anchor);
  return topo;
}

}  // namespace antwsn
