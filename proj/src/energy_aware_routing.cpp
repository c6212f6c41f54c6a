#include <algorithm>
#include <numeric>

#include "protocol_impl.hpp"

namespace antwsn {

EnergyAwareAntRouting::EnergyAwareAntRouting(RoutingContext ctx, bool improved)
    : Protocol(std::move(ctx), TableMode::Pheromone),
      improved_(improved),
      caches_(ctx_.net.size(), AntCache(ctx_.cfg.cache_timeout)) {}

std::vector<double> EnergyAwareAntRouting::initial_column(NodeId node, NodeId destination) {
  const auto& table = tables_[node];
  const std::size_t n = table.neighbors().size();
  if (n == 0) return {};
  if (!improved_) return Protocol::initial_column(node, destination);
  const std::size_t row = table.row_of(destination);
  return ieeabr_init_tables(n, row == RoutingTable::npos ? std::nullopt : std::optional<std::size_t>(row));
}

void EnergyAwareAntRouting::on_neighbor_added(NodeId node, NodeId neighbor) {
  Protocol::on_neighbor_added(node, neighbor);
  if (!improved_) return;
  auto& table = tables_[node];
  // The destination itself just came into range: reshape its column.
  if (table.has_destination(neighbor)) table.set_column(neighbor, initial_column(node, neighbor));
}

void EnergyAwareAntRouting::redistribute_lost(std::vector<double>& column, std::size_t lost_row) {
  if (!improved_) {
    Protocol::redistribute_lost(column, lost_row);
    return;
  }
  // Trails are not normalized; redistribute shares and restore the mass.
  const double total = std::accumulate(column.begin(), column.end(), 0.0);
  if (!(total > 0.0)) return;
  std::vector<double> shares(column.size());
  std::transform(column.begin(), column.end(), shares.begin(), [total](double v) { return v / total; });
  if (!ieeabr_link_failure(shares, lost_row)) return;
  std::transform(shares.begin(), shares.end(), column.begin(), [total](double s) { return s * total; });
}

double EnergyAwareAntRouting::visible_energy(NodeId node, NodeId destination) const {
  // The destination and mains-powered nodes are never an energy bottleneck.
  if (node == destination || ctx_.net.ledger(node).unlimited) return ctx_.cfg.proto.initial_energy;
  return ctx_.net.residual(node);
}

void EnergyAwareAntRouting::launch_forward_ant(NodeId source) {
  if (improved_ &&
      !ieeabr_ant_admission(live_forward_, ctx_.sensor_count, ctx_.cfg.proto.ant_cap_multiplier)) {
    ++ctx_.log.deferred_launches;
    return;
  }
  Ant ant = new_forward_ant(source, 2);
  caches_[source].record_ant(ant.id, kNoNode, now());
  ant.visit(source, now(), ctx_.net.residual(source));
  forward_created();
  step(source, std::move(ant));
}

void EnergyAwareAntRouting::step(NodeId at, Ant ant) {
  const auto& table = tables_[at];
  if (table.neighbors().empty()) {
    forward_finished(ant, at, AntFate::DeadEnd);
    return;
  }
  ensure_column(at, ant.destination);
  const NodeId d = ant.destination;
  const auto next = eeabr_select_next(
      table, d, ant, [this, d](NodeId s) { return visible_energy(s, d); }, ctx_.cfg.proto, ctx_.rng);
  if (!next) {
    forward_finished(ant, at, AntFate::DeadEnd);
    return;
  }
  caches_[at].set_forward(ant.id, *next);
  send(at, *next, PayloadKind::ForwardAnt, std::move(ant));
}

void EnergyAwareAntRouting::handle_forward(NodeId at, const Frame& frame) {
  const Ant& incoming = frame.ant();
  if (at == incoming.destination || is_sink(at)) {
    arrive(at, incoming, frame.src);
    return;
  }
  if (caches_[at].record_ant(incoming.id, frame.src, now()) == Admission::LoopDetected) {
    forward_finished(incoming, at, AntFate::LoopDestroyed);
    return;
  }
  Ant ant = incoming;
  ant.visit(at, now(), ctx_.net.residual(at));
  if (ant.hops > ctx_.sensor_count) {
    forward_finished(ant, at, AntFate::Expired);
    return;
  }
  step(at, std::move(ant));
}

void EnergyAwareAntRouting::arrive(NodeId sink_node, const Ant& ant, NodeId from) {
  forward_finished(ant, sink_node, AntFate::Arrived);
  const auto& p = ctx_.cfg.proto;
  Ant back = ant;
  back.kind = AntKind::Backward;
  back.t_destination = now();
  back.delta_tau = eeabr_delta_tau(p.initial_energy, ant.e_min, ant.e_avg(), static_cast<double>(ant.hops),
                                   p.delta_tau_max);
  back.backward_hops = 0;
  back.memory.clear();
  back.stamps.clear();
  send(sink_node, from, PayloadKind::BackwardAnt, std::move(back));
}

void EnergyAwareAntRouting::handle_backward(NodeId at, const Frame& frame) {
  Ant back = frame.ant();
  ++back.backward_hops;
  const NodeId d = back.destination;
  const NodeId via = frame.src;
  auto& table = tables_[at];
  const std::size_t row = table.row_of(via);
  if (row != RoutingTable::npos) {
    auto& column = ensure_column(at, d);
    const auto& p = ctx_.cfg.proto;
    for (std::size_t i = 0; i < column.size(); ++i) {
      column[i] = i == row ? eeabr_update_trail(column[i], back.delta_tau, back.backward_hops, p.rho, p.phi)
                           : (1.0 - p.rho) * column[i];
    }
  }
  if (at == back.id.source) {
    ++ctx_.log.backward_completed;
    return;
  }
  const AntCacheRecord* record = caches_[at].find(back.id, now());
  if (record == nullptr || record->previous == kNoNode) {
    ++ctx_.log.backward_lost;
    return;
  }
  const NodeId next = record->previous;
  send(at, next, PayloadKind::BackwardAnt, std::move(back));
}

void EnergyAwareAntRouting::on_periodic_purge() {
  for (auto& cache : caches_) cache.purge(now());
}

}  // namespace antwsn
