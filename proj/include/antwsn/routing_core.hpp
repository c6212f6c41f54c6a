#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "antwsn/sim_kernel.hpp"

namespace antwsn {

using NodeId = std::uint32_t;
inline constexpr NodeId kBroadcast = std::numeric_limits<NodeId>::max();
inline constexpr NodeId kNoNode = kBroadcast - 1;

// How a table column is interpreted. Probability columns sum to one;
// pheromone columns only need to be non-negative.
enum class TableMode { Probability, Pheromone };

// Per-node matrix T[n, d]: one row per neighbor, one column per destination.
// Columns are allocated lazily, the first time a destination is routed to.
class RoutingTable {
 public:
  explicit RoutingTable(TableMode mode = TableMode::Probability) : mode_(mode) {}

  TableMode mode() const { return mode_; }

  const std::vector<NodeId>& neighbors() const { return neighbors_; }
  bool has_neighbor(NodeId n) const { return row_of(n) != npos; }
  // npos when `n` is not a neighbor.
  std::size_t row_of(NodeId n) const;

  // Appends a row; every existing column receives `initial` for it.
  void add_neighbor(NodeId n, double initial);
  // Drops the row. Callers redistribute probability mass beforehand.
  void remove_neighbor(NodeId n);

  bool has_destination(NodeId d) const { return columns_.contains(d); }
  std::vector<NodeId> destinations() const;
  // Replaces (or creates) the column for `d`; size must equal neighbor count.
  void set_column(NodeId d, std::vector<double> values);
  void drop_column(NodeId d) { columns_.erase(d); }
  std::vector<double>& column(NodeId d);
  const std::vector<double>& column(NodeId d) const;

  double value(NodeId n, NodeId d) const;
  void set(NodeId n, NodeId d, double v);

  // Neighbors as rows, destinations as columns.
  std::string to_csv() const;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  TableMode mode_;
  std::vector<NodeId> neighbors_;
  std::map<NodeId, std::vector<double>> columns_;
};

inline constexpr double kNormalizationTolerance = 1e-9;

// True iff column `d` exists, has non-negative entries and sums to 1.
bool normalize_check(const RoutingTable& table, NodeId d);
bool column_is_stochastic(const std::vector<double>& column);

enum class AntKind : std::uint8_t { Forward, Backward, Data };

struct AntId {
  NodeId source = kNoNode;
  std::uint32_t sequence = 0;
  auto operator<=>(const AntId&) const = default;
};

// Forward, backward and data agents. `memory` is bounded by `memory_limit`
// (0 keeps the full path); `stamps` is parallel to `memory` when the full
// path is kept.
struct Ant {
  AntKind kind = AntKind::Forward;
  AntId id;
  NodeId destination = kNoNode;
  std::vector<NodeId> memory;
  std::vector<Seconds> stamps;
  std::size_t memory_limit = 0;
  std::uint32_t hops = 0;  // N_j: nodes whose energy has been sampled
  double e_min = std::numeric_limits<double>::infinity();
  double e_sum = 0.0;
  Seconds t_launch = 0.0;

  // Set once the ant turns backward.
  Seconds t_destination = 0.0;
  double delta_tau = 0.0;
  std::uint32_t backward_hops = 0;  // Bd_k
  std::size_t cursor = 0;           // index into memory for path-retracing ants

  // Data ants only.
  std::uint64_t event_id = 0;
  Seconds t_generated = 0.0;

  // Records arrival at `node` with residual energy `energy`.
  void visit(NodeId node, Seconds t, double energy);
  bool remembers(NodeId node) const;
  double e_avg() const { return hops == 0 ? 0.0 : e_sum / hops; }
};

// Application payload routed hop-by-hop through the routing tables.
struct DataPacket {
  std::uint64_t event_id = 0;
  NodeId origin = kNoNode;
  NodeId destination = kNoNode;
  Seconds t_generated = 0.0;
  std::vector<NodeId> visited;
};

struct AntCacheRecord {
  NodeId previous = kNoNode;
  NodeId forward = kNoNode;
  AntId ant_id;
  Seconds timeout = 0.0;  // absolute expiry time
};

enum class Admission { Accept, LoopDetected };

// Per-node memory of ants that passed through, used for loop detection and
// for routing backward ants whose own memory holds only the last two hops.
class AntCache {
 public:
  explicit AntCache(Seconds lifetime = 3.0) : lifetime_(lifetime) {}

  // A live record for the same ant means the ant looped back.
  Admission record_ant(const AntId& id, NodeId previous, Seconds now);
  void set_forward(const AntId& id, NodeId forward);
  // Live record or nullptr.
  const AntCacheRecord* find(const AntId& id, Seconds now) const;
  std::size_t purge(Seconds now);
  std::size_t live_count(Seconds now) const;
  Seconds lifetime() const { return lifetime_; }

 private:
  Seconds lifetime_;
  std::map<AntId, AntCacheRecord> records_;
};

struct TripParams {
  double eta = 0.2;
  std::size_t window = 10;
  double confidence = 0.75;  // gamma in [0.75, 0.8]
};

// Running mean/variance of trip times to one destination plus the last
// |W| observations.
struct TripModel {
  double mu = 0.0;
  double sigma2 = 0.0;
  std::deque<double> window;
  std::uint64_t samples = 0;

  double w_best() const;
};

TripModel update_trip_model(TripModel model, Seconds observed, const TripParams& params);

struct ConfidenceBounds {
  double inf = 0.0;
  double sup = 0.0;
};

double confidence_z(double confidence);
// (W_best, mu + z * sigma / sqrt(|W|)). Window must be non-empty.
ConfidenceBounds confidence_bounds(const TripModel& model, double confidence);

}  // namespace antwsn
