#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "antwsn/protocols.hpp"

namespace antwsn {

// Probability-table protocols reinforced by path-retracing backward ants:
// BABR (stochastic unicast ants), SC (BABR with distance-shaped initial
// tables), FF (flooded forward ants) and FP (flooded data ants).
class ProbabilisticAntRouting : public Protocol {
 public:
  ProbabilisticAntRouting(RoutingContext ctx, ProtocolKind kind);

  ProtocolKind kind() const override { return kind_; }
  void launch_forward_ant(NodeId source) override;
  void on_data_generated(NodeId source, const TrafficEvent& event) override;

 protected:
  bool launches_ants() const override { return kind_ != ProtocolKind::FP; }
  std::vector<double> initial_column(NodeId node, NodeId destination) override;
  void handle_forward(NodeId at, const Frame& frame) override;
  void handle_backward(NodeId at, const Frame& frame) override;
  void handle_data_ant(NodeId at, const Frame& frame) override;
  void on_periodic_purge() override;

 private:
  struct FloodState {
    Seconds first_seen = 0.0;
    bool pending = false;
    bool suppressed = false;
  };

  bool floods() const { return kind_ == ProtocolKind::FF || kind_ == ProtocolKind::FP; }
  void step(NodeId at, Ant ant);
  void flood_receive(NodeId at, const Frame& frame);
  void start_backward(NodeId sink_node, const Ant& arrived);
  TripModel& trip_model(NodeId node, NodeId destination);

  ProtocolKind kind_;
  std::vector<std::map<NodeId, TripModel>> trips_;
  std::vector<std::map<AntId, FloodState>> floods_;
};

// Pheromone-trail protocols with energy-aware next-hop choice: EEABR and
// IEEABR (EEABR plus shaped initial tables, the live-ant cap and
// proportional redistribution on link failure).
class EnergyAwareAntRouting : public Protocol {
 public:
  EnergyAwareAntRouting(RoutingContext ctx, bool improved);

  ProtocolKind kind() const override { return improved_ ? ProtocolKind::IEEABR : ProtocolKind::EEABR; }
  void launch_forward_ant(NodeId source) override;

 protected:
  std::vector<double> initial_column(NodeId node, NodeId destination) override;
  void handle_forward(NodeId at, const Frame& frame) override;
  void handle_backward(NodeId at, const Frame& frame) override;
  void on_neighbor_added(NodeId node, NodeId neighbor) override;
  void redistribute_lost(std::vector<double>& column, std::size_t lost_row) override;
  void on_periodic_purge() override;

 private:
  void step(NodeId at, Ant ant);
  void arrive(NodeId sink_node, const Ant& ant, NodeId from);
  double visible_energy(NodeId node, NodeId destination) const;

  bool improved_;
  std::vector<AntCache> caches_;
};

}  // namespace antwsn
