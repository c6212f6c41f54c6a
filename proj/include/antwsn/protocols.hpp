#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "antwsn/phy_mac.hpp"
#include "antwsn/protocol_params.hpp"
#include "antwsn/routing_core.hpp"
#include "antwsn/run_log.hpp"
#include "antwsn/scenario.hpp"
#include "antwsn/sim_kernel.hpp"

namespace antwsn {

// ---------------------------------------------------------------------------
// Table update rules. Each one is a pure function over a column so it can be
// checked in isolation; the protocol classes below only orchestrate them.
// ---------------------------------------------------------------------------

// P_f += r(1 - P_f); P_n -= r P_n for n != f. Throws for r outside [0, 1].
void babr_reinforce(std::vector<double>& column, std::size_t chosen_row, double r);
void babr_reinforce(RoutingTable& table, NodeId chosen, NodeId destination, double r);

// r = c1 W_best/T + c2 (I_sup - I_inf) / ((I_sup - I_inf) + (T - I_inf)),
// clamped to [0, 1]; the second term is 0 when its denominator is 0.
double babr_reinforcement_factor(const TripModel& model, Seconds trip, const ProtocolParams& params,
                                 double confidence);

// C = min_n(c_n + Q_n); P_n = exp((C - Q_n) beta) / sum_m exp((C - Q_m) beta).
std::vector<double> sc_initialize(std::span<const double> cost_estimates, std::span<const double> local_costs,
                                  double sc_beta);

// Strict: a flooded ant is rebroadcast only if P_n < 1/|N|.
bool ff_should_broadcast(double p_from_neighbor, std::size_t neighbor_count);
// A column with all entries equal carries no routing hint.
bool column_has_no_hint(const std::vector<double>& column);

// Visibility 1/(C - e_s) with C - e_s floored at epsilon * C.
double eeabr_visibility(double initial_energy, double residual, double epsilon_fraction);

// tau^alpha E^beta / sum(...) over rows not excluded; excluded rows get 0.
// All zeros when no row is eligible.
std::vector<double> eeabr_selection_probabilities(std::span<const double> trail, std::span<const double> energies,
                                                  const std::vector<bool>& excluded, const ProtocolParams& params);

// Next hop for `ant` at a node with `table`; nullopt on an empty candidate
// set. `energy_of` maps a neighbor id to the residual energy used for its
// visibility.
std::optional<NodeId> eeabr_select_next(const RoutingTable& table, NodeId destination, const Ant& ant,
                                        const std::function<double(NodeId)>& energy_of,
                                        const ProtocolParams& params, RandomStream& rng);

// 1 / (C - (E_min - N_j)/(E_av - N_j)); delta_tau_max when the expression
// degenerates (non-positive denominators).
double eeabr_delta_tau(double initial_energy, double e_min, double e_avg, double visited, double delta_tau_max);

// (1 - rho) tau + delta_tau / (phi Bd_k)
double eeabr_update_trail(double trail, double delta_tau, double backward_hops, double rho, double phi);

struct SinkAdjacentProbabilities {
  double destination = 0.0;  // P_dd = (9N - 5) / 4N^2
  double other = 0.0;        // P_dm = (4N - 5) / 4N^2, 0 for N = 1
};
SinkAdjacentProbabilities ieeabr_sink_adjacent(std::size_t neighbor_count);

// Uniform 1/N, or the sink-adjacent split when `destination_row` is set.
std::vector<double> ieeabr_init_tables(std::size_t neighbor_count, std::optional<std::size_t> destination_row);

// Removes the lost neighbor's share and scales every survivor by (1 + z),
// z = P_dm / (1 - P_dm). Returns false (column untouched) when the lost
// neighbor held all the mass, i.e. the destination became unreachable.
bool ieeabr_link_failure(std::vector<double>& column, std::size_t lost_row);

// Baseline reaction to a lost link: the share is split evenly among the
// remaining neighbors. Returns false when no neighbor remains.
bool uniform_link_failure(std::vector<double>& column, std::size_t lost_row);

bool ieeabr_ant_admission(std::uint64_t live_forward_ants, std::size_t node_count, std::uint32_t multiplier = 5);

// Index drawn proportionally to `weights`; nullopt if they sum to zero.
std::optional<std::size_t> sample_index(std::span<const double> weights, RandomStream& rng);

// ---------------------------------------------------------------------------
// Protocol engine
// ---------------------------------------------------------------------------

// How a forward ant's life ended; reported to the observer, if any.
enum class AntFate : std::uint8_t { Arrived, LoopDestroyed, DeadEnd, Lost, Expired };

std::string_view to_string(AntFate fate);

struct RoutingContext {
  Simulator& sim;
  Network& net;
  RandomStream& rng;
  RunLog& log;
  const ScenarioConfig& cfg;
  std::size_t sensor_count;
  std::function<NodeId()> current_sink;
};

// Common surface of the six protocols. One instance serves every node; all
// per-node state lives inside it and is touched only from kernel dispatch.
class Protocol : public FrameListener {
 public:
  explicit Protocol(RoutingContext ctx, TableMode mode);
  ~Protocol() override = default;

  virtual ProtocolKind kind() const = 0;

  // Builds neighbor rows and schedules periodic ant launches at `sources`.
  void start(const std::vector<NodeId>& sources);

  virtual void on_data_generated(NodeId source, const TrafficEvent& event);
  void on_link_gained(NodeId node, NodeId neighbor);
  void on_link_lost(NodeId node, NodeId neighbor);

  // Launches one forward ant now (also used to inject ants in tests).
  virtual void launch_forward_ant(NodeId source) = 0;

  const RoutingTable& table(NodeId n) const { return tables_.at(n); }
  std::uint64_t live_forward_ants() const { return live_forward_; }

  using AntObserver = std::function<void(const Ant& ant, NodeId at, AntFate fate)>;
  void set_ant_observer(AntObserver observer) { observer_ = std::move(observer); }

  void on_receive(NodeId at, const Frame& frame) override;
  void on_drop(NodeId at, const Frame& frame, DropReason reason, bool link_lost) override;

 protected:
  virtual bool launches_ants() const { return true; }
  virtual std::vector<double> initial_column(NodeId node, NodeId destination);
  virtual void handle_forward(NodeId at, const Frame& frame) = 0;
  virtual void handle_backward(NodeId at, const Frame& frame) = 0;
  virtual void handle_data_ant(NodeId at, const Frame& frame);
  virtual void on_neighbor_added(NodeId node, NodeId neighbor);
  // Redistributes the share of `lost_row` before the row is removed.
  virtual void redistribute_lost(std::vector<double>& column, std::size_t lost_row);
  virtual void on_periodic_purge() {}

  NodeId sink() const { return ctx_.current_sink(); }
  bool is_sink(NodeId n) const { return n == sink(); }
  bool alive(NodeId n) const { return ctx_.net.alive(n); }
  Seconds now() const { return ctx_.sim.now(); }

  std::vector<double>& ensure_column(NodeId node, NodeId destination);
  void forward_data(NodeId at, DataPacket packet);
  void deliver(const DataPacket& packet);
  void send(NodeId from, NodeId to, PayloadKind kind, std::variant<std::monostate, Ant, DataPacket> payload,
            Seconds at = -1.0);
  Ant new_forward_ant(NodeId source, std::size_t memory_limit);

  void forward_created() {
    ++live_forward_;
    ++ctx_.log.forward_launched;
    ctx_.log.live_forward_peak = std::max(ctx_.log.live_forward_peak, live_forward_);
  }
  // Ends a live (unicast) forward ant and tallies its fate.
  void forward_finished(const Ant& ant, NodeId at, AntFate fate);

  RoutingContext ctx_;
  std::vector<RoutingTable> tables_;
  std::uint64_t live_forward_ = 0;
  std::vector<std::uint32_t> next_ant_sequence_;
  AntObserver observer_;

 private:
  void schedule_launch(NodeId source, Seconds at);
  void schedule_purge();
};

std::unique_ptr<Protocol> make_protocol(ProtocolKind kind, RoutingContext ctx);

}  // namespace antwsn
