#include "antwsn/simulation.hpp"

#include <algorithm>

namespace antwsn {

Simulation::Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  topo_ = build_topology(cfg_);
  initialize();
}

Simulation::Simulation(ScenarioConfig cfg, Topology topology) : cfg_(std::move(cfg)), topo_(std::move(topology)) {
  cfg_.node_count = static_cast<std::uint32_t>(topo_.size());
  cfg_.validate();
  initialize();
}

void Simulation::initialize() {
  cfg_.proto.initial_energy = cfg_.effective_initial_energy();
  for (StreamId id : kAllStreams) streams_.emplace(id, RandomStream(cfg_.stream_seed(id), id));

  net_ = std::make_unique<Network>(sim_, streams_.at(StreamId::Radio), streams_.at(StreamId::Mac), cfg_.radio, cfg_.mac,
                                   cfg_.energy);
  for (const Position& p : topo_.nodes) net_->add_node(p, EnergyLedger::with_budget(cfg_.proto.initial_energy));

  if (cfg_.scenario == ScenarioKind::Dynamic) {
    // Same stream and draws as the topology builder, hence the same circle.
    RandomStream mobility(cfg_.stream_seed(StreamId::Mobility), StreamId::Mobility);
    trajectory_ = make_trajectory(topo_.side, cfg_.duration, mobility, cfg_.sink_radius_fraction,
                                  cfg_.sink_update_period);
  }
  if (trajectory_ && cfg_.sink_mode == SinkMode::Virtual) {
    virtual_sink_ = true;
    sink_ = net_->add_node(advance_sink(*trajectory_, 0.0), EnergyLedger::mains());
  } else {
    sink_ = topo_.sink_id;
  }

  RoutingContext ctx{sim_, *net_, streams_.at(StreamId::Protocol), log_, cfg_, topo_.size(),
                     [this] { return sink_; }};
  protocol_ = make_protocol(cfg_.protocol, std::move(ctx));
  net_->set_listener(protocol_.get());

  std::vector<NodeId> sources;
  for (NodeId n = 0; n < topo_.size(); ++n) {
    if (virtual_sink_ || trajectory_ || n != sink_) sources.push_back(n);
  }
  protocol_->start(sources);

  traffic_ = generate_traffic(sources, cfg_.traffic_rate, cfg_.duration, streams_.at(StreamId::Traffic));
  schedule_traffic();
  if (trajectory_) schedule_sink_moves();
  schedule_sample(0.0);
  sim_.schedule(cfg_.duration, EventKind::RunEnd, [] {});
}

void Simulation::schedule_traffic() {
  for (const TrafficEvent& ev : traffic_) {
    sim_.schedule(ev.time, EventKind::DataGeneration, [this, ev] {
      // Dead nodes sense nothing; the current sink has nothing to report.
      if (!net_->alive(ev.source) || ev.source == sink_) return;
      ++log_.generated;
      protocol_->on_data_generated(ev.source, ev);
    });
  }
}

void Simulation::schedule_sink_moves() {
  for (Seconds t = cfg_.sink_update_period; t <= cfg_.duration; t += cfg_.sink_update_period) {
    sim_.schedule(t, EventKind::SinkMove, [this] { move_sink(); });
  }
}

void Simulation::move_sink() {
  const Position pos = advance_sink(*trajectory_, sim_.now());
  if (!virtual_sink_) {
    sink_ = nearest_node(topo_, pos);
    return;
  }
  const std::vector<NodeId> before = net_->neighbors(sink_);
  net_->set_position(sink_, pos);
  const std::vector<NodeId>& after = net_->neighbors(sink_);
  std::vector<NodeId> lost;
  std::vector<NodeId> gained;
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(lost));
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(gained));
  for (NodeId n : lost) {
    protocol_->on_link_lost(n, sink_);
    protocol_->on_link_lost(sink_, n);
  }
  for (NodeId n : gained) {
    protocol_->on_link_gained(n, sink_);
    protocol_->on_link_gained(sink_, n);
  }
}

void Simulation::schedule_sample(Seconds at) {
  if (at > cfg_.duration) return;
  sim_.schedule(at, EventKind::Sample, [this] {
    take_sample();
    schedule_sample(sim_.now() + cfg_.sample_period);
  });
}

void Simulation::take_sample() {
  const double idle = cfg_.energy.idle_per_s * cfg_.sample_period;
  if (idle > 0.0 && sim_.now() > 0.0) {
    for (NodeId n = 0; n < topo_.size(); ++n) {
      if (net_->alive(n)) net_->charge(n, EnergyKind::Idle, idle);
    }
  }
  MetricSample s;
  s.time = sim_.now();
  s.generated = log_.generated;
  s.delivered = log_.deliveries.size();
  for (const auto& d : log_.deliveries) s.latency_sum += d.delivered - d.generated;
  for (NodeId n = 0; n < topo_.size(); ++n) {
    s.energy += net_->ledger(n).spent();
    if (net_->alive(n)) ++s.alive;
  }
  log_.samples.push_back(s);
}

void Simulation::run_until(Seconds t) { sim_.run_until(std::min(t, cfg_.duration)); }

void Simulation::run() {
  if (finished_) return;
  sim_.run_until(cfg_.duration);
  finalize();
}

void Simulation::finalize() {
  log_.duration = cfg_.duration;
  log_.data_bits = cfg_.mac.data_frame_bytes * 8;
  log_.ledgers.clear();
  for (NodeId n = 0; n < topo_.size(); ++n) log_.ledgers.push_back(net_->ledger(n));
  log_.mac = net_->counters();
  finished_ = true;
}

}  // namespace antwsn
