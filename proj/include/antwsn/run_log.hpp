#pragma once

#include <cstdint>
#include <vector>

#include "antwsn/phy_mac.hpp"
#include "antwsn/routing_core.hpp"

namespace antwsn {

struct DeliveryRecord {
  std::uint64_t event_id = 0;
  NodeId origin = kNoNode;
  Seconds generated = 0.0;
  Seconds delivered = 0.0;
};

struct MetricSample {
  Seconds time = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  double latency_sum = 0.0;
  double energy = 0.0;
  std::uint32_t alive = 0;
};

// Raw record of one simulation run; metrics are derived from it.
struct RunLog {
  std::uint64_t generated = 0;
  std::vector<DeliveryRecord> deliveries;  // first arrival of each event
  std::vector<bool> delivered_ids;

  std::uint64_t data_drops = 0;
  std::uint64_t forward_launched = 0;
  std::uint64_t forward_arrived = 0;
  std::uint64_t forward_loops = 0;
  std::uint64_t forward_dead_ends = 0;
  std::uint64_t forward_lost = 0;
  std::uint64_t deferred_launches = 0;
  std::uint64_t backward_completed = 0;
  std::uint64_t backward_lost = 0;
  std::uint64_t link_failures = 0;
  std::uint64_t live_forward_peak = 0;

  std::vector<MetricSample> samples;

  // Filled when the run ends.
  Seconds duration = 0.0;
  std::uint32_t data_bits = 0;
  std::vector<EnergyLedger> ledgers;  // sensor nodes only
  MacCounters mac;

  // Returns false for a duplicate arrival.
  bool record_delivery(std::uint64_t event_id, NodeId origin, Seconds generated_at, Seconds now) {
    if (event_id >= delivered_ids.size()) delivered_ids.resize(event_id + 1, false);
    if (delivered_ids[event_id]) return false;
    delivered_ids[event_id] = true;
    deliveries.push_back({event_id, origin, generated_at, now});
    return true;
  }
};

}  // namespace antwsn
