#include <algorithm>
#include <cmath>

#include "protocol_impl.hpp"

namespace antwsn {

ProbabilisticAntRouting::ProbabilisticAntRouting(RoutingContext ctx, ProtocolKind kind)
    : Protocol(std::move(ctx), TableMode::Probability),
      kind_(kind),
      trips_(ctx_.net.size()),
      floods_(ctx_.net.size()) {}

std::vector<double> ProbabilisticAntRouting::initial_column(NodeId node, NodeId destination) {
  if (kind_ != ProtocolKind::SC) return Protocol::initial_column(node, destination);
  const auto& nbrs = tables_[node].neighbors();
  if (nbrs.empty()) return {};
  // Distance sensing: the estimated cost through n is its distance to the
  // destination in units of the radio range; each hop costs one.
  const Position target = ctx_.net.position(destination);
  const double range = ctx_.cfg.radio.tx_radius;
  std::vector<double> q(nbrs.size());
  std::vector<double> c(nbrs.size(), 1.0);
  for (std::size_t i = 0; i < nbrs.size(); ++i) q[i] = distance(ctx_.net.position(nbrs[i]), target) / range;
  return sc_initialize(q, c, ctx_.cfg.proto.sc_beta);
}

TripModel& ProbabilisticAntRouting::trip_model(NodeId node, NodeId destination) {
  return trips_[node][destination];
}

void ProbabilisticAntRouting::launch_forward_ant(NodeId source) {
  Ant ant = new_forward_ant(source, 0);
  ant.visit(source, now(), ctx_.net.residual(source));
  if (floods()) {
    ++ctx_.log.forward_launched;
    floods_[source][ant.id] = FloodState{now(), false, false};
    send(source, kBroadcast, PayloadKind::ForwardAnt, std::move(ant));
    return;
  }
  forward_created();
  step(source, std::move(ant));
}

void ProbabilisticAntRouting::on_data_generated(NodeId source, const TrafficEvent& event) {
  if (kind_ != ProtocolKind::FP) {
    Protocol::on_data_generated(source, event);
    return;
  }
  Ant ant = new_forward_ant(source, 0);
  ant.kind = AntKind::Data;
  ant.event_id = event.event_id;
  ant.t_generated = event.time;
  ant.visit(source, now(), ctx_.net.residual(source));
  floods_[source][ant.id] = FloodState{now(), false, false};
  send(source, kBroadcast, PayloadKind::DataAnt, std::move(ant));
}

void ProbabilisticAntRouting::step(NodeId at, Ant ant) {
  const auto& table = tables_[at];
  const auto& nbrs = table.neighbors();
  if (nbrs.empty()) {
    forward_finished(ant, at, AntFate::DeadEnd);
    return;
  }
  const auto& column = ensure_column(at, ant.destination);
  std::vector<double> weights(nbrs.size(), 0.0);
  std::size_t open = 0;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (ant.remembers(nbrs[i])) continue;
    weights[i] = column[i];
    ++open;
  }
  auto pick = sample_index(weights, ctx_.rng);
  if (!pick && open > 0) {
    // Unvisited neighbors exist but the table gives them no mass.
    for (std::size_t i = 0; i < nbrs.size(); ++i) weights[i] = ant.remembers(nbrs[i]) ? 0.0 : 1.0;
    pick = sample_index(weights, ctx_.rng);
  }
  if (!pick) {
    forward_finished(ant, at, AntFate::DeadEnd);
    return;
  }
  send(at, nbrs[*pick], PayloadKind::ForwardAnt, std::move(ant));
}

void ProbabilisticAntRouting::handle_forward(NodeId at, const Frame& frame) {
  if (frame.broadcast()) {
    flood_receive(at, frame);
    return;
  }
  Ant ant = frame.ant();
  ant.visit(at, now(), ctx_.net.residual(at));
  if (at == ant.destination || is_sink(at)) {
    forward_finished(ant, at, AntFate::Arrived);
    start_backward(at, ant);
    return;
  }
  if (ant.memory.size() > ctx_.sensor_count) {
    forward_finished(ant, at, AntFate::Expired);
    return;
  }
  step(at, std::move(ant));
}

void ProbabilisticAntRouting::handle_data_ant(NodeId at, const Frame& frame) { flood_receive(at, frame); }

void ProbabilisticAntRouting::flood_receive(NodeId at, const Frame& frame) {
  Ant ant = frame.ant();
  ant.visit(at, now(), ctx_.net.residual(at));
  if (at == ant.destination || is_sink(at)) {
    // Every copy reaching the sink reinforces its own path.
    if (ant.kind == AntKind::Data) {
      ctx_.log.record_delivery(ant.event_id, ant.id.source, ant.t_generated, now());
    } else {
      ++ctx_.log.forward_arrived;
    }
    start_backward(at, ant);
    return;
  }
  auto& seen = floods_[at];
  if (const auto it = seen.find(ant.id); it != seen.end()) {
    if (it->second.pending) it->second.suppressed = true;
    return;
  }
  auto& state = seen[ant.id];
  state.first_seen = now();
  if (ant.memory.size() > ctx_.sensor_count) return;

  const auto& table = tables_[at];
  const std::size_t n = table.neighbors().size();
  if (n == 0) return;
  const std::size_t from_row = table.row_of(frame.src);
  bool rebroadcast = true;
  if (from_row != RoutingTable::npos) {
    const auto& column = ensure_column(at, ant.destination);
    if (!column_has_no_hint(column)) rebroadcast = ff_should_broadcast(column[from_row], n);
  }
  if (!rebroadcast) return;

  state.pending = true;
  const PayloadKind kind = frame.kind;
  const Seconds delay = ctx_.rng.uniform(0.0, ctx_.cfg.proto.flood_delay_max);
  ctx_.sim.schedule_in(delay, EventKind::ProtocolTimer, [this, at, kind, ant = std::move(ant)]() mutable {
    auto& flood = floods_[at];
    const auto it = flood.find(ant.id);
    if (it == flood.end() || !it->second.pending) return;
    it->second.pending = false;
    if (it->second.suppressed || !alive(at)) return;
    send(at, kBroadcast, kind, std::move(ant));
  });
}

void ProbabilisticAntRouting::start_backward(NodeId sink_node, const Ant& arrived) {
  if (arrived.memory.size() < 2) return;
  Ant back = arrived;
  back.kind = AntKind::Backward;
  back.t_destination = now();
  back.cursor = back.memory.size() - 2;
  const NodeId next = back.memory[back.cursor];
  send(sink_node, next, PayloadKind::BackwardAnt, std::move(back));
}

void ProbabilisticAntRouting::handle_backward(NodeId at, const Frame& frame) {
  Ant back = frame.ant();
  if (back.cursor >= back.memory.size() || back.memory[back.cursor] != at) {
    ++ctx_.log.backward_lost;
    return;
  }
  const NodeId d = back.destination;
  const NodeId via = back.memory[back.cursor + 1];
  const Seconds trip = std::max(back.t_destination - back.stamps[back.cursor], 1e-9);
  TripModel& model = trip_model(at, d);
  model = update_trip_model(std::move(model), trip, ctx_.cfg.trip);
  auto& table = tables_[at];
  if (table.has_neighbor(via)) {
    ensure_column(at, d);
    const double r = babr_reinforcement_factor(model, trip, ctx_.cfg.proto, ctx_.cfg.trip.confidence);
    babr_reinforce(table, via, d, r);
  }
  if (back.cursor == 0) {
    ++ctx_.log.backward_completed;
    return;
  }
  --back.cursor;
  const NodeId next = back.memory[back.cursor];
  send(at, next, PayloadKind::BackwardAnt, std::move(back));
}

void ProbabilisticAntRouting::on_periodic_purge() {
  const Seconds horizon = now() - ctx_.cfg.cache_timeout;
  for (auto& seen : floods_) {
    std::erase_if(seen, [horizon](const auto& kv) { return !kv.second.pending && kv.second.first_seen < horizon; });
  }
}

}  // namespace antwsn
