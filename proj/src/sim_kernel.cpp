#include "antwsn/sim_kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace antwsn {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::TxStart: return "tx-start";
    case EventKind::TxEnd: return "tx-end";
    case EventKind::AntLaunch: return "ant-launch";
    case EventKind::DataGeneration: return "data-generation";
    case EventKind::SinkMove: return "sink-move";
    case EventKind::CacheTimeout: return "cache-timeout";
    case EventKind::ProtocolTimer: return "protocol-timer";
    case EventKind::Sample: return "sample";
    case EventKind::RunEnd: return "run-end";
  }
  return "unknown";
}

std::uint64_t Simulator::schedule(Seconds time, EventKind kind, std::function<void()> action) {
  if (!(time >= now_)) {
    throw std::logic_error("event scheduled in the past: t=" + std::to_string(time) +
                           " now=" + std::to_string(now_));
  }
  const std::uint64_t seq = next_sequence_++;
  queue_.push(SimEvent{time, seq, kind, std::move(action)});
  return seq;
}

void Simulator::run_until(Seconds t_end) {
  if (t_end < now_) throw std::logic_error("run_until: t_end precedes the clock");
  while (!queue_.empty() && queue_.top().time <= t_end) {
    // priority_queue::top is const; the action is moved out before pop.
    SimEvent ev = std::move(const_cast<SimEvent&>(queue_.top()));
    queue_.pop();
    now_ = ev.time;
    ++dispatched_;
    if (trace_) trace_(ev);
    if (ev.action) ev.action();
  }
  now_ = t_end;
}

std::string_view to_string(StreamId id) {
  switch (id) {
    case StreamId::Topology: return "topology";
    case StreamId::Radio: return "radio";
    case StreamId::Mac: return "mac";
    case StreamId::Protocol: return "protocol";
    case StreamId::Traffic: return "traffic";
    case StreamId::Mobility: return "mobility";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t base_seed, StreamId id) {
  return splitmix64(base_seed ^ splitmix64(0xA5A5'0000ULL + static_cast<std::uint64_t>(id)));
}

RandomStream::RandomStream(std::uint64_t seed, StreamId id)
    : seed_(seed), id_(id), engine_(splitmix64(seed + static_cast<std::uint64_t>(id))) {}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t RandomStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return lo + static_cast<std::int64_t>(x % span);
}

double RandomStream::normal(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("normal: sigma must be non-negative");
  // Box-Muller; the second variate is cached.
  double z;
  if (has_spare_) {
    has_spare_ = false;
    z = spare_;
  } else {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    z = radius * std::cos(angle);
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
  }
  return sigma == 0.0 ? 0.0 : sigma * z;
}

}  // namespace antwsn
