#include "antwsn/phy_mac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace antwsn {

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

double ideal_reception(double p_tx, double d, double gamma) {
  return p_tx / (1.0 + std::pow(d, gamma));
}

double perturbed_reception(double ideal, double alpha_draw, double beta_draw) {
  return std::max(0.0, ideal * (1.0 + alpha_draw) + beta_draw);
}

double RadioParams::threshold() const {
  return rx_threshold > 0.0 ? rx_threshold : ideal_reception(p_transmit, tx_radius, gamma);
}

void RadioParams::validate() const {
  if (!(p_transmit > 0.0)) throw std::invalid_argument("radio.p_transmit must be positive");
  if (!(gamma >= 2.0 && gamma <= 4.0)) throw std::invalid_argument("radio.gamma must lie in [2, 4]");
  if (!(sigma_alpha >= 0.0) || !(sigma_beta >= 0.0)) {
    throw std::invalid_argument("radio.sigma_alpha and radio.sigma_beta must be non-negative");
  }
  if (rx_threshold < 0.0) throw std::invalid_argument("radio.rx_threshold must be positive (or 0 to derive)");
  if (!(tx_radius > 0.0)) throw std::invalid_argument("radio.tx_radius must be positive");
}

void MacParams::validate() const {
  if (!(bitrate > 0.0)) throw std::invalid_argument("mac.bitrate must be positive");
  if (ant_frame_bytes == 0 || data_frame_bytes == 0) throw std::invalid_argument("frame sizes must be positive");
  if (cw_min_slots == 0 || cw_max_slots < cw_min_slots) {
    throw std::invalid_argument("mac contention window must satisfy 1 <= cw_min_slots <= cw_max_slots");
  }
  if (queue_limit == 0) throw std::invalid_argument("mac.queue_limit must be positive");
}

void EnergyParams::validate() const {
  if (tx_per_bit < 0.0 || rx_per_bit < 0.0 || idle_per_s < 0.0) {
    throw std::invalid_argument("energy costs must be non-negative");
  }
}

double EnergyLedger::charge(EnergyKind kind, double amount) {
  if (unlimited || amount <= 0.0) return 0.0;
  const double debit = std::min(amount, residual);
  residual -= debit;
  switch (kind) {
    case EnergyKind::Tx: spent_tx += debit; break;
    case EnergyKind::Rx: spent_rx += debit; break;
    case EnergyKind::Idle: spent_idle += debit; break;
  }
  return debit;
}

std::string_view to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::ForwardAnt: return "forward-ant";
    case PayloadKind::BackwardAnt: return "backward-ant";
    case PayloadKind::DataAnt: return "data-ant";
    case PayloadKind::Data: return "data";
  }
  return "unknown";
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::QueueFull: return "queue-full";
    case DropReason::MaxBackoff: return "max-backoff";
    case DropReason::NoAck: return "no-ack";
    case DropReason::InsufficientEnergy: return "insufficient-energy";
    case DropReason::NodeDead: return "node-dead";
  }
  return "unknown";
}

Network::Network(Simulator& sim, RandomStream& radio, RandomStream& mac, RadioParams radio_params,
                 MacParams mac_params, EnergyParams energy_params)
    : sim_(sim),
      radio_rng_(radio),
      mac_rng_(mac),
      radio_(radio_params),
      mac_(mac_params),
      energy_(energy_params) {
  radio_.validate();
  mac_.validate();
  energy_.validate();
  threshold_ = radio_.threshold();
}

NodeId Network::add_node(Position pos, EnergyLedger ledger) {
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(NodeState{});
  nodes_.back().pos = pos;
  nodes_.back().ledger = ledger;
  refresh_neighbors(id);
  return id;
}

void Network::set_position(NodeId n, Position pos) {
  nodes_.at(n).pos = pos;
  refresh_neighbors(n);
}

bool Network::in_range(NodeId a, NodeId b) const {
  return a != b && distance(nodes_.at(a).pos, nodes_.at(b).pos) <= radio_.tx_radius;
}

void Network::refresh_neighbors(NodeId n) {
  auto& own = nodes_[n].neighbors;
  own.clear();
  for (NodeId other = 0; other < nodes_.size(); ++other) {
    if (other == n) continue;
    auto& theirs = nodes_[other].neighbors;
    const auto it = std::lower_bound(theirs.begin(), theirs.end(), n);
    const bool listed = it != theirs.end() && *it == n;
    if (in_range(n, other)) {
      own.push_back(other);
      if (!listed) theirs.insert(it, n);
    } else if (listed) {
      theirs.erase(it);
    }
  }
}

void Network::charge(NodeId n, EnergyKind kind, double amount) {
  auto& ledger = nodes_.at(n).ledger;
  const bool was_dead = ledger.dead();
  ledger.charge(kind, amount);
  if (!was_dead && ledger.dead()) kill(n);
}

Frame Network::make_frame(NodeId src, NodeId dst, PayloadKind kind,
                          std::variant<std::monostate, Ant, DataPacket> payload) const {
  Frame f;
  f.src = src;
  f.dst = dst;
  f.kind = kind;
  const std::uint32_t bytes =
      (kind == PayloadKind::Data || kind == PayloadKind::DataAnt) ? mac_.data_frame_bytes : mac_.ant_frame_bytes;
  f.size_bits = bytes * 8;
  f.airtime = f.size_bits / mac_.bitrate;
  f.payload = std::move(payload);
  return f;
}

void Network::transmit(Frame frame, Seconds at) {
  if (frame.size_bits == 0) throw std::invalid_argument("frame size must be positive");
  const NodeId src = frame.src;
  if (at <= sim_.now()) {
    enqueue(src, std::move(frame));
    return;
  }
  sim_.schedule(at, EventKind::TxStart, [this, src, f = std::move(frame)]() mutable { enqueue(src, std::move(f)); });
}

bool Network::channel_busy(NodeId n) const {
  const auto& node = nodes_.at(n);
  return node.transmitting || !node.incoming.empty();
}

void Network::count_drop(DropReason reason) {
  switch (reason) {
    case DropReason::QueueFull: ++counters_.queue_drops; break;
    case DropReason::MaxBackoff: ++counters_.backoff_drops; break;
    case DropReason::NoAck: ++counters_.ack_failures; break;
    case DropReason::InsufficientEnergy: ++counters_.energy_drops; break;
    case DropReason::NodeDead: ++counters_.dead_drops; break;
  }
}

void Network::enqueue(NodeId n, Frame frame) {
  auto& node = nodes_.at(n);
  if (node.ledger.dead()) {
    count_drop(DropReason::NodeDead);
    if (listener_) listener_->on_drop(n, frame, DropReason::NodeDead, false);
    return;
  }
  if (node.queue.size() >= mac_.queue_limit) {
    count_drop(DropReason::QueueFull);
    if (listener_) listener_->on_drop(n, frame, DropReason::QueueFull, false);
    return;
  }
  node.queue.push_back(std::move(frame));
  if (!node.in_service) start_service(n);
}

void Network::start_service(NodeId n) {
  auto& node = nodes_[n];
  node.in_service = true;
  node.backoff_retries = 0;
  node.unicast_attempts = 0;
  schedule_attempt(n);
}

void Network::schedule_attempt(NodeId n) {
  auto& node = nodes_[n];
  const std::uint64_t window = std::uint64_t{mac_.cw_max_slots} << node.backoff_retries;
  const auto slots = mac_rng_.uniform_int(mac_.cw_min_slots, static_cast<std::int64_t>(window));
  const Seconds wait = static_cast<double>(slots) * slot_time(node.queue.front());
  sim_.schedule_in(wait, EventKind::TxStart, [this, n] { attempt(n); });
}

void Network::attempt(NodeId n) {
  auto& node = nodes_[n];
  if (node.ledger.dead() || !node.in_service || node.queue.empty()) return;
  if (channel_busy(n)) {
    if (++node.backoff_retries > mac_.max_backoff_retries) {
      drop_front(n, DropReason::MaxBackoff, false);
      finish_service(n);
    } else {
      schedule_attempt(n);
    }
    return;
  }
  start_tx(n);
}

void Network::start_tx(NodeId n) {
  auto& node = nodes_[n];
  const Frame& frame = node.queue.front();
  const double cost = tx_cost(frame);
  if (!node.ledger.unlimited && node.ledger.residual < cost) {
    node.ledger.charge(EnergyKind::Tx, cost);
    drop_front(n, DropReason::InsufficientEnergy, false);
    node.in_service = false;
    kill(n);
    return;
  }
  node.ledger.charge(EnergyKind::Tx, cost);
  node.transmitting = true;
  ++counters_.transmissions;
  for (auto& rx : node.incoming) rx.corrupted = true;

  ActiveTx tx{next_tx_id_++, n, {}};
  const Position origin = node.pos;
  for (NodeId r = 0; r < nodes_.size(); ++r) {
    if (r == n) continue;
    auto& listener = nodes_[r];
    if (listener.ledger.dead()) continue;
    const double ideal = ideal_reception(radio_.p_transmit, distance(origin, listener.pos), radio_.gamma);
    const double alpha = radio_.sigma_alpha > 0.0 ? radio_rng_.normal(radio_.sigma_alpha) : 0.0;
    const double beta = radio_.sigma_beta > 0.0 ? radio_rng_.normal(radio_.sigma_beta) : 0.0;
    if (perturbed_reception(ideal, alpha, beta) < threshold_) continue;
    bool corrupted = listener.transmitting;
    if (!listener.incoming.empty()) {
      corrupted = true;
      for (auto& other : listener.incoming) other.corrupted = true;
    }
    listener.incoming.push_back(Reception{tx.id, corrupted});
    tx.audible.push_back(r);
  }
  const std::uint64_t id = tx.id;
  active_.push_back(std::move(tx));
  sim_.schedule_in(frame.airtime, EventKind::TxEnd, [this, id] { end_tx(id); });
}

void Network::end_tx(std::uint64_t tx_id) {
  const auto it = std::find_if(active_.begin(), active_.end(), [tx_id](const ActiveTx& t) { return t.id == tx_id; });
  if (it == active_.end()) return;
  ActiveTx tx = std::move(*it);
  active_.erase(it);

  const NodeId src = tx.src;
  auto& sender = nodes_[src];
  sender.transmitting = false;
  Frame frame = sender.queue.front();

  std::vector<NodeId> delivered;
  std::vector<NodeId> died;
  for (NodeId r : tx.audible) {
    auto& listener = nodes_[r];
    const auto rx = std::find_if(listener.incoming.begin(), listener.incoming.end(),
                                 [tx_id](const Reception& x) { return x.tx_id == tx_id; });
    if (rx == listener.incoming.end()) continue;
    const bool corrupted = rx->corrupted;
    listener.incoming.erase(rx);
    if (!frame.broadcast() && frame.dst != r) continue;
    if (listener.ledger.dead()) continue;
    listener.ledger.charge(EnergyKind::Rx, rx_cost(frame));
    if (listener.ledger.dead()) {
      died.push_back(r);
      continue;
    }
    if (corrupted) {
      ++counters_.collisions;
      continue;
    }
    delivered.push_back(r);
  }
  counters_.deliveries += delivered.size();

  bool dropped = false;
  bool link_lost = false;
  if (!frame.broadcast() && std::find(delivered.begin(), delivered.end(), frame.dst) == delivered.end()) {
    if (++sender.unicast_attempts <= mac_.unicast_retries && !sender.ledger.dead()) {
      sender.backoff_retries = 0;
      schedule_attempt(src);
    } else {
      dropped = true;
      link_lost = nodes_[frame.dst].ledger.dead() || !in_range(src, frame.dst);
    }
  }
  const bool retrying = !frame.broadcast() && !dropped &&
                        std::find(delivered.begin(), delivered.end(), frame.dst) == delivered.end();

  if (dropped) {
    drop_front(src, DropReason::NoAck, link_lost);
    finish_service(src);
  } else if (!retrying) {
    sender.queue.pop_front();
    finish_service(src);
  }

  for (NodeId r : died) kill(r);
  if (sender.ledger.dead()) kill(src);
  if (listener_) {
    for (NodeId r : delivered) {
      if (nodes_[r].ledger.dead()) continue;
      listener_->on_receive(r, frame);
    }
  }
}

void Network::finish_service(NodeId n) {
  auto& node = nodes_[n];
  node.in_service = false;
  if (!node.ledger.dead() && !node.queue.empty()) start_service(n);
}

void Network::drop_front(NodeId n, DropReason reason, bool link_lost) {
  auto& node = nodes_[n];
  Frame frame = std::move(node.queue.front());
  node.queue.pop_front();
  count_drop(reason);
  if (listener_) listener_->on_drop(n, frame, reason, link_lost);
}

void Network::kill(NodeId n) {
  auto& node = nodes_[n];
  if (!node.ledger.dead()) return;
  // A frame on the air finishes; everything still waiting is lost.
  std::deque<Frame> lost;
  if (node.transmitting) {
    while (node.queue.size() > 1) {
      lost.push_back(std::move(node.queue.back()));
      node.queue.pop_back();
    }
    std::reverse(lost.begin(), lost.end());
  } else {
    lost.swap(node.queue);
    node.in_service = false;
  }
  node.incoming.clear();
  const bool first = !node.death_reported;
  node.death_reported = true;
  for (auto& frame : lost) {
    count_drop(DropReason::NodeDead);
    if (listener_) listener_->on_drop(n, frame, DropReason::NodeDead, false);
  }
  if (first && listener_) listener_->on_death(n);
}

}  // namespace antwsn
