#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <string_view>
#include <vector>

namespace antwsn {

using Seconds = double;

enum class EventKind : std::uint8_t {
  TxStart,
  TxEnd,
  AntLaunch,
  DataGeneration,
  SinkMove,
  CacheTimeout,
  ProtocolTimer,
  Sample,
  RunEnd,
};

std::string_view to_string(EventKind kind);

struct SimEvent {
  Seconds time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::RunEnd;
  std::function<void()> action;
};

// Discrete-event engine. Events dispatch in (time, sequence) order; equal
// timestamps dispatch in enqueue order.
class Simulator {
 public:
  using TraceHook = std::function<void(const SimEvent&)>;

  Seconds now() const { return now_; }

  // Throws std::logic_error when `time` lies in the past.
  std::uint64_t schedule(Seconds time, EventKind kind, std::function<void()> action);
  std::uint64_t schedule_in(Seconds delay, EventKind kind, std::function<void()> action) {
    return schedule(now_ + delay, kind, std::move(action));
  }

  // Dispatches every event with time <= t_end (inclusive), then sets the
  // clock to t_end.
  void run_until(Seconds t_end);

  // Invoked once per dispatched event, before its action runs.
  void set_trace_hook(TraceHook hook) { trace_ = std::move(hook); }

  std::uint64_t dispatched() const { return dispatched_; }
  std::size_t pending() const { return queue_.size(); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  Seconds now_ = 0.0;
  std::uint64_t next_sequence_ = 0;
  std::uint64_t dispatched_ = 0;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  TraceHook trace_;
};

// One random stream per concern, so that e.g. protocol choices never shift
// the radio-noise sequence.
enum class StreamId : std::uint8_t { Topology, Radio, Mac, Protocol, Traffic, Mobility };

inline constexpr StreamId kAllStreams[] = {StreamId::Topology, StreamId::Radio,
                                           StreamId::Mac,      StreamId::Protocol,
                                           StreamId::Traffic,  StreamId::Mobility};

std::string_view to_string(StreamId id);

std::uint64_t splitmix64(std::uint64_t x);

// Derives the seed of one stream from a base seed.
std::uint64_t derive_stream_seed(std::uint64_t base_seed, StreamId id);

// Portable draws: the engine (mt19937_64) is fully specified by the standard,
// and the uniform/normal transforms are implemented here rather than through
// the implementation-defined <random> distributions.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamId id);

  std::uint64_t seed() const { return seed_; }
  StreamId id() const { return id_; }

  // [0, 1)
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // N(0, sigma). Throws std::invalid_argument for sigma < 0.
  double normal(double sigma);

 private:
  std::uint64_t seed_;
  StreamId id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace antwsn
