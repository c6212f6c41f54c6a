#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "antwsn/protocols.hpp"
#include "protocol_impl.hpp"

namespace antwsn {

std::string_view to_string(AntFate fate) {
  switch (fate) {
    case AntFate::Arrived: return "arrived";
    case AntFate::LoopDestroyed: return "loop";
    case AntFate::DeadEnd: return "dead-end";
    case AntFate::Lost: return "lost";
    case AntFate::Expired: return "expired";
  }
  return "?";
}

Protocol::Protocol(RoutingContext ctx, TableMode mode)
    : ctx_(std::move(ctx)),
      tables_(ctx_.net.size(), RoutingTable(mode)),
      next_ant_sequence_(ctx_.net.size(), 0) {}

void Protocol::start(const std::vector<NodeId>& sources) {
  for (NodeId n = 0; n < tables_.size(); ++n) {
    for (NodeId nb : ctx_.net.neighbors(n)) tables_[n].add_neighbor(nb, 0.0);
  }
  if (launches_ants()) {
    const double interval = ctx_.cfg.proto.ant_interval;
    for (NodeId s : sources) schedule_launch(s, ctx_.rng.uniform(0.0, interval));
  }
  schedule_purge();
}

void Protocol::schedule_launch(NodeId source, Seconds at) {
  if (at > ctx_.cfg.duration) return;
  ctx_.sim.schedule(at, EventKind::AntLaunch, [this, source] {
    if (alive(source) && !is_sink(source)) launch_forward_ant(source);
    schedule_launch(source, now() + ctx_.cfg.proto.ant_interval);
  });
}

void Protocol::schedule_purge() {
  const Seconds at = now() + ctx_.cfg.cache_timeout;
  if (at > ctx_.cfg.duration) return;
  ctx_.sim.schedule(at, EventKind::CacheTimeout, [this] {
    on_periodic_purge();
    schedule_purge();
  });
}

void Protocol::forward_finished(const Ant& ant, NodeId at, AntFate fate) {
  if (live_forward_ > 0) --live_forward_;
  auto& log = ctx_.log;
  switch (fate) {
    case AntFate::Arrived: ++log.forward_arrived; break;
    case AntFate::LoopDestroyed: ++log.forward_loops; break;
    case AntFate::DeadEnd: ++log.forward_dead_ends; break;
    case AntFate::Lost:
    case AntFate::Expired: ++log.forward_lost; break;
  }
  if (observer_) observer_(ant, at, fate);
}

Ant Protocol::new_forward_ant(NodeId source, std::size_t memory_limit) {
  Ant ant;
  ant.kind = AntKind::Forward;
  ant.id = AntId{source, next_ant_sequence_.at(source)++};
  ant.destination = sink();
  ant.memory_limit = memory_limit;
  ant.t_launch = now();
  return ant;
}

std::vector<double> Protocol::initial_column(NodeId node, NodeId destination) {
  (void)destination;
  const std::size_t n = tables_[node].neighbors().size();
  if (n == 0) return {};
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::vector<double>& Protocol::ensure_column(NodeId node, NodeId destination) {
  auto& table = tables_.at(node);
  if (!table.has_destination(destination)) table.set_column(destination, initial_column(node, destination));
  return table.column(destination);
}

void Protocol::send(NodeId from, NodeId to, PayloadKind kind, std::variant<std::monostate, Ant, DataPacket> payload,
                    Seconds at) {
  Frame frame = ctx_.net.make_frame(from, to, kind, std::move(payload));
  ctx_.net.transmit(std::move(frame), at < 0.0 ? now() : at);
}

void Protocol::on_data_generated(NodeId source, const TrafficEvent& event) {
  DataPacket packet;
  packet.event_id = event.event_id;
  packet.origin = source;
  packet.destination = sink();
  packet.t_generated = event.time;
  forward_data(source, std::move(packet));
}

void Protocol::deliver(const DataPacket& packet) {
  ctx_.log.record_delivery(packet.event_id, packet.origin, packet.t_generated, now());
}

void Protocol::forward_data(NodeId at, DataPacket packet) {
  const NodeId d = sink();
  packet.destination = d;
  if (at == d) {
    deliver(packet);
    return;
  }
  if (packet.visited.empty() || packet.visited.back() != at) packet.visited.push_back(at);
  const auto& table = tables_[at];
  if (!alive(at) || table.neighbors().empty()) {
    ++ctx_.log.data_drops;
    return;
  }
  const auto& column = ensure_column(at, d);
  const auto& nbrs = table.neighbors();
  std::vector<NodeId> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (std::find(packet.visited.begin(), packet.visited.end(), nbrs[i]) != packet.visited.end()) continue;
    const double v = column[i];
    if (v > best_value + 1e-12) {
      best_value = v;
      best.assign(1, nbrs[i]);
    } else if (std::abs(v - best_value) <= 1e-12) {
      best.push_back(nbrs[i]);
    }
  }
  if (best.empty()) {
    ++ctx_.log.data_drops;
    return;
  }
  const NodeId next =
      best.size() == 1 ? best.front()
                       : best[static_cast<std::size_t>(ctx_.rng.uniform_int(0, static_cast<std::int64_t>(best.size()) - 1))];
  send(at, next, PayloadKind::Data, std::move(packet));
}

void Protocol::on_receive(NodeId at, const Frame& frame) {
  switch (frame.kind) {
    case PayloadKind::Data:
      if (is_sink(at)) {
        deliver(frame.data());
      } else {
        forward_data(at, frame.data());
      }
      break;
    case PayloadKind::ForwardAnt: handle_forward(at, frame); break;
    case PayloadKind::BackwardAnt: handle_backward(at, frame); break;
    case PayloadKind::DataAnt: handle_data_ant(at, frame); break;
  }
}

void Protocol::handle_data_ant(NodeId at, const Frame& frame) {
  (void)at;
  (void)frame;
}

void Protocol::on_drop(NodeId at, const Frame& frame, DropReason reason, bool link_lost) {
  (void)reason;
  if (link_lost && !frame.broadcast()) on_link_lost(at, frame.dst);
  switch (frame.kind) {
    case PayloadKind::Data:
      // A broken link is repaired locally: the packet tries the next best
      // neighbor. Anything else (collisions, full queue, dead sender) loses it.
      if (link_lost && alive(at)) {
        forward_data(at, frame.data());
      } else {
        ++ctx_.log.data_drops;
      }
      break;
    case PayloadKind::ForwardAnt:
      if (!frame.broadcast()) forward_finished(frame.ant(), at, AntFate::Lost);
      break;
    case PayloadKind::BackwardAnt: ++ctx_.log.backward_lost; break;
    case PayloadKind::DataAnt: break;
  }
}

void Protocol::on_link_gained(NodeId node, NodeId neighbor) {
  if (node >= tables_.size() || tables_[node].has_neighbor(neighbor)) return;
  on_neighbor_added(node, neighbor);
}

void Protocol::on_link_lost(NodeId node, NodeId neighbor) {
  auto& table = tables_.at(node);
  const std::size_t row = table.row_of(neighbor);
  if (row == RoutingTable::npos) return;
  ++ctx_.log.link_failures;
  for (NodeId d : table.destinations()) redistribute_lost(table.column(d), row);
  table.remove_neighbor(neighbor);
}

void Protocol::on_neighbor_added(NodeId node, NodeId neighbor) {
  auto& table = tables_[node];
  const double old_count = static_cast<double>(table.neighbors().size());
  const double new_count = old_count + 1.0;
  table.add_neighbor(neighbor, 1.0 / new_count);
  if (table.mode() != TableMode::Probability) return;
  const std::size_t row = table.row_of(neighbor);
  for (NodeId d : table.destinations()) {
    auto& column = table.column(d);
    for (std::size_t i = 0; i < column.size(); ++i) {
      if (i != row) column[i] *= old_count / new_count;
    }
  }
}

void Protocol::redistribute_lost(std::vector<double>& column, std::size_t lost_row) {
  uniform_link_failure(column, lost_row);
}

std::unique_ptr<Protocol> make_protocol(ProtocolKind kind, RoutingContext ctx) {
  switch (kind) {
    case ProtocolKind::BABR:
    case ProtocolKind::SC:
    case ProtocolKind::FF:
    case ProtocolKind::FP: return std::make_unique<ProbabilisticAntRouting>(std::move(ctx), kind);
    case ProtocolKind::EEABR: return std::make_unique<EnergyAwareAntRouting>(std::move(ctx), false);
    case ProtocolKind::IEEABR: return std::make_unique<EnergyAwareAntRouting>(std::move(ctx), true);
  }
  throw std::invalid_argument("unknown protocol");
}

}  // namespace antwsn
