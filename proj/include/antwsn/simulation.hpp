#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "antwsn/phy_mac.hpp"
#include "antwsn/protocols.hpp"
#include "antwsn/run_log.hpp"
#include "antwsn/scenario.hpp"
#include "antwsn/sim_kernel.hpp"

namespace antwsn {

// One self-contained run: kernel, radio network, protocol, traffic and sink
// mobility for a single ScenarioConfig.
class Simulation {
 public:
  // Builds the topology from the config (throws ConfigError or
  // std::runtime_error when the config is invalid or no connected layout is
  // found).
  explicit Simulation(ScenarioConfig cfg);
  // Uses the given topology as is; it need not be connected.
  Simulation(ScenarioConfig cfg, Topology topology);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Runs to the configured duration and finalizes the log.
  void run();
  // Advances to `t` (<= duration) without finalizing.
  void run_until(Seconds t);
  bool finished() const { return finished_; }

  const ScenarioConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }
  const RunLog& log() const { return log_; }
  Simulator& kernel() { return sim_; }
  Network& network() { return *net_; }
  const Network& network() const { return *net_; }
  Protocol& protocol() { return *protocol_; }
  const Protocol& protocol() const { return *protocol_; }

  // Sensor nodes are ids [0, sensor_count); a virtual sink, when present,
  // has id sensor_count.
  std::size_t sensor_count() const { return topo_.size(); }
  NodeId sink() const { return sink_; }
  bool virtual_sink() const { return virtual_sink_; }
  const std::vector<TrafficEvent>& traffic() const { return traffic_; }

 private:
  void initialize();
  void schedule_traffic();
  void schedule_sink_moves();
  void move_sink();
  void schedule_sample(Seconds at);
  void take_sample();
  void finalize();

  ScenarioConfig cfg_;
  Topology topo_;
  Simulator sim_;
  std::map<StreamId, RandomStream> streams_;
  std::unique_ptr<Network> net_;
  std::unique_ptr<Protocol> protocol_;
  RunLog log_;
  std::vector<TrafficEvent> traffic_;
  std::optional<SinkTrajectory> trajectory_;
  NodeId sink_ = 0;
  bool virtual_sink_ = false;
  bool finished_ = false;
};

}  // namespace antwsn
