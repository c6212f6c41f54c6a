#pragma once

#include <cstdint>
#include <deque>
#include <string_view>
#include <variant>
#include <vector>

#include "antwsn/routing_core.hpp"
#include "antwsn/sim_kernel.hpp"

namespace antwsn {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(Position a, Position b);

// Signal strength model: P_rx = P_tx / (1 + d^gamma), disturbed by a
// multiplicative N(0, sigma_alpha) and an additive N(0, sigma_beta) term.
struct RadioParams {
  double p_transmit = 1.0;
  double gamma = 2.0;
  double sigma_alpha = 0.05;
  double sigma_beta = 0.0;
  // 0 derives the threshold from tx_radius: ideal_reception(p_transmit, tx_radius, gamma).
  double rx_threshold = 0.0;
  double tx_radius = 35.0;

  double threshold() const;
  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

double ideal_reception(double p_tx, double d, double gamma);
double perturbed_reception(double ideal, double alpha_draw, double beta_draw);

struct MacParams {
  double bitrate = 40'000.0;  // bit/s
  std::uint32_t ant_frame_bytes = 20;
  std::uint32_t data_frame_bytes = 50;
  std::uint32_t cw_min_slots = 1;
  std::uint32_t cw_max_slots = 32;  // initial window upper bound; doubles per retry
  std::uint32_t max_backoff_retries = 5;
  std::uint32_t unicast_retries = 2;
  std::uint32_t queue_limit = 64;

  void validate() const;
};

// Linear per-bit energy model.
struct EnergyParams {
  double tx_per_bit = 1.0e-6;  // J/bit
  double rx_per_bit = 1.0e-6;  // J/bit; low-power radios draw about as much receiving as sending
  double idle_per_s = 0.0;     // J/s

  void validate() const;
};

enum class EnergyKind { Tx, Rx, Idle };

struct EnergyLedger {
  double initial = 0.0;
  double residual = 0.0;
  double spent_tx = 0.0;
  double spent_rx = 0.0;
  double spent_idle = 0.0;
  bool unlimited = false;  // mains-powered sink: never debited, never dies

  static EnergyLedger with_budget(double joules) { return {joules, joules, 0.0, 0.0, 0.0, false}; }
  static EnergyLedger mains() { return {0.0, 0.0, 0.0, 0.0, 0.0, true}; }

  bool dead() const { return !unlimited && residual <= 0.0; }
  double spent() const { return spent_tx + spent_rx + spent_idle; }
  // residual := max(0, residual - amount); returns the amount actually debited.
  double charge(EnergyKind kind, double amount);
};

enum class PayloadKind : std::uint8_t { ForwardAnt, BackwardAnt, DataAnt, Data };

std::string_view to_string(PayloadKind kind);

struct Frame {
  NodeId src = kNoNode;
  NodeId dst = kBroadcast;
  PayloadKind kind = PayloadKind::Data;
  std::uint32_t size_bits = 0;
  Seconds airtime = 0.0;
  std::variant<std::monostate, Ant, DataPacket> payload;

  bool broadcast() const { return dst == kBroadcast; }
  const Ant& ant() const { return std::get<Ant>(payload); }
  const DataPacket& data() const { return std::get<DataPacket>(payload); }
};

enum class DropReason : std::uint8_t { QueueFull, MaxBackoff, NoAck, InsufficientEnergy, NodeDead };

std::string_view to_string(DropReason reason);

// Upcalls from the MAC into the routing layer.
class FrameListener {
 public:
  virtual ~FrameListener() = default;
  virtual void on_receive(NodeId at, const Frame& frame) = 0;
  // `link_lost` is set for unicast failures whose receiver is dead or out of
  // range, i.e. a broken link rather than a collision.
  virtual void on_drop(NodeId at, const Frame& frame, DropReason reason, bool link_lost) = 0;
  virtual void on_death(NodeId node) { (void)node; }
};

struct MacCounters {
  std::uint64_t transmissions = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t collisions = 0;
  std::uint64_t queue_drops = 0;
  std::uint64_t backoff_drops = 0;
  std::uint64_t ack_failures = 0;
  std::uint64_t energy_drops = 0;
  std::uint64_t dead_drops = 0;
};

// Shared channel plus one CSMA MAC and energy ledger per node.
class Network {
 public:
  Network(Simulator& sim, RandomStream& radio, RandomStream& mac, RadioParams radio_params,
          MacParams mac_params, EnergyParams energy_params);

  NodeId add_node(Position pos, EnergyLedger ledger);
  std::size_t size() const { return nodes_.size(); }

  void set_listener(FrameListener* listener) { listener_ = listener; }

  Position position(NodeId n) const { return nodes_.at(n).pos; }
  // Moves a node and refreshes the geometric neighbor sets touching it.
  void set_position(NodeId n, Position pos);
  // Nodes within tx_radius, ascending id.
  const std::vector<NodeId>& neighbors(NodeId n) const { return nodes_.at(n).neighbors; }
  bool in_range(NodeId a, NodeId b) const;

  const EnergyLedger& ledger(NodeId n) const { return nodes_.at(n).ledger; }
  bool alive(NodeId n) const { return !nodes_.at(n).ledger.dead(); }
  double residual(NodeId n) const { return nodes_.at(n).ledger.residual; }
  void charge(NodeId n, EnergyKind kind, double amount);

  Frame make_frame(NodeId src, NodeId dst, PayloadKind kind,
                   std::variant<std::monostate, Ant, DataPacket> payload) const;
  double tx_cost(const Frame& frame) const { return energy_.tx_per_bit * frame.size_bits; }
  double rx_cost(const Frame& frame) const { return energy_.rx_per_bit * frame.size_bits; }

  // Hands the frame to the sender's MAC at time `at` (>= now).
  void transmit(Frame frame, Seconds at);
  void transmit(Frame frame) { transmit(std::move(frame), sim_.now()); }

  // True while `n` is sending or hears an ongoing transmission.
  bool channel_busy(NodeId n) const;
  std::size_t queue_length(NodeId n) const { return nodes_.at(n).queue.size(); }

  const MacCounters& counters() const { return counters_; }
  const RadioParams& radio_params() const { return radio_; }
  const MacParams& mac_params() const { return mac_; }
  const EnergyParams& energy_params() const { return energy_; }

 private:
  struct Reception {
    std::uint64_t tx_id;
    bool corrupted;
  };

  struct NodeState {
    Position pos;
    EnergyLedger ledger;
    std::vector<NodeId> neighbors;
    std::deque<Frame> queue;  // front is in service
    bool in_service = false;
    bool transmitting = false;
    bool death_reported = false;
    std::uint32_t backoff_retries = 0;
    std::uint32_t unicast_attempts = 0;
    std::vector<Reception> incoming;
  };

  struct ActiveTx {
    std::uint64_t id;
    NodeId src;
    std::vector<NodeId> audible;  // ascending id
  };

  void enqueue(NodeId n, Frame frame);
  void start_service(NodeId n);
  void schedule_attempt(NodeId n);
  void attempt(NodeId n);
  void start_tx(NodeId n);
  void end_tx(std::uint64_t tx_id);
  void finish_service(NodeId n);
  void drop_front(NodeId n, DropReason reason, bool link_lost);
  void kill(NodeId n);
  void refresh_neighbors(NodeId n);
  void count_drop(DropReason reason);
  Seconds slot_time(const Frame& frame) const { return frame.airtime; }

  Simulator& sim_;
  RandomStream& radio_rng_;
  RandomStream& mac_rng_;
  RadioParams radio_;
  MacParams mac_;
  EnergyParams energy_;
  double threshold_;
  FrameListener* listener_ = nullptr;
  std::vector<NodeState> nodes_;
  std::vector<ActiveTx> active_;
  std::uint64_t next_tx_id_ = 0;
  MacCounters counters_;
};

}  // namespace antwsn
