#include "antwsn/routing_core.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace antwsn {

std::size_t RoutingTable::row_of(NodeId n) const {
  const auto it = std::find(neighbors_.begin(), neighbors_.end(), n);
  return it == neighbors_.end() ? npos : static_cast<std::size_t>(it - neighbors_.begin());
}

void RoutingTable::add_neighbor(NodeId n, double initial) {
  if (has_neighbor(n)) return;
  neighbors_.push_back(n);
  for (auto& [d, col] : columns_) col.push_back(initial);
}

void RoutingTable::remove_neighbor(NodeId n) {
  const std::size_t row = row_of(n);
  if (row == npos) return;
  neighbors_.erase(neighbors_.begin() + static_cast<std::ptrdiff_t>(row));
  for (auto& [d, col] : columns_) col.erase(col.begin() + static_cast<std::ptrdiff_t>(row));
}

std::vector<NodeId> RoutingTable::destinations() const {
  std::vector<NodeId> out;
  out.reserve(columns_.size());
  for (const auto& [d, col] : columns_) out.push_back(d);
  return out;
}

void RoutingTable::set_column(NodeId d, std::vector<double> values) {
  if (values.size() != neighbors_.size()) {
    throw std::invalid_argument("routing table column size does not match neighbor count");
  }
  columns_[d] = std::move(values);
}

std::vector<double>& RoutingTable::column(NodeId d) {
  const auto it = columns_.find(d);
  if (it == columns_.end()) throw std::out_of_range("no column for destination " + std::to_string(d));
  return it->second;
}

const std::vector<double>& RoutingTable::column(NodeId d) const {
  const auto it = columns_.find(d);
  if (it == columns_.end()) throw std::out_of_range("no column for destination " + std::to_string(d));
  return it->second;
}

double RoutingTable::value(NodeId n, NodeId d) const {
  const std::size_t row = row_of(n);
  if (row == npos) throw std::out_of_range("not a neighbor: " + std::to_string(n));
  return column(d)[row];
}

void RoutingTable::set(NodeId n, NodeId d, double v) {
  const std::size_t row = row_of(n);
  if (row == npos) throw std::out_of_range("not a neighbor: " + std::to_string(n));
  column(d)[row] = v;
}

std::string RoutingTable::to_csv() const {
  std::ostringstream out;
  out << "neighbor";
  for (const auto& [d, col] : columns_) out << ",dest_" << d;
  out << '\n' << std::setprecision(10);
  for (std::size_t row = 0; row < neighbors_.size(); ++row) {
    out << neighbors_[row];
    for (const auto& [d, col] : columns_) out << ',' << col[row];
    out << '\n';
  }
  return out.str();
}

bool column_is_stochastic(const std::vector<double>& column) {
  if (column.empty()) return false;
  double sum = 0.0;
  for (double v : column) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= kNormalizationTolerance;
}

bool normalize_check(const RoutingTable& table, NodeId d) {
  if (!table.has_destination(d)) return false;
  return column_is_stochastic(table.column(d));
}

void Ant::visit(NodeId node, Seconds t, double energy) {
  memory.push_back(node);
  if (memory_limit == 0) {
    stamps.push_back(t);
  } else if (memory.size() > memory_limit) {
    memory.erase(memory.begin());
  }
  ++hops;
  e_min = std::min(e_min, energy);
  e_sum += energy;
}

bool Ant::remembers(NodeId node) const {
  return std::find(memory.begin(), memory.end(), node) != memory.end();
}

Admission AntCache::record_ant(const AntId& id, NodeId previous, Seconds now) {
  const auto it = records_.find(id);
  if (it != records_.end()) {
    if (now < it->second.timeout) return Admission::LoopDetected;
    records_.erase(it);
  }
  records_.emplace(id, AntCacheRecord{previous, kNoNode, id, now + lifetime_});
  return Admission::Accept;
}

void AntCache::set_forward(const AntId& id, NodeId forward) {
  const auto it = records_.find(id);
  if (it != records_.end()) it->second.forward = forward;
}

const AntCacheRecord* AntCache::find(const AntId& id, Seconds now) const {
  const auto it = records_.find(id);
  if (it == records_.end() || now >= it->second.timeout) return nullptr;
  return &it->second;
}

std::size_t AntCache::purge(Seconds now) {
  return std::erase_if(records_, [now](const auto& kv) { return now >= kv.second.timeout; });
}

std::size_t AntCache::live_count(Seconds now) const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [now](const auto& kv) {
    return now < kv.second.timeout;
  }));
}

double TripModel::w_best() const {
  if (window.empty()) return 0.0;
  return *std::min_element(window.begin(), window.end());
}

TripModel update_trip_model(TripModel model, Seconds observed, const TripParams& params) {
  if (!(observed > 0.0)) throw std::invalid_argument("trip time must be positive");
  if (!(params.eta > 0.0 && params.eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  if (model.samples == 0) {
    model.mu = observed;
    model.sigma2 = 0.0;
  } else {
    const double mu_old = model.mu;
    model.mu += params.eta * (observed - mu_old);
    const double dev = observed - mu_old;
    model.sigma2 += params.eta * (dev * dev - model.sigma2);
    model.sigma2 = std::max(0.0, model.sigma2);
  }
  ++model.samples;
  model.window.push_back(observed);
  while (model.window.size() > std::max<std::size_t>(params.window, 1)) model.window.pop_front();
  return model;
}

double confidence_z(double confidence) { return 1.0 / std::sqrt(1.0 - confidence); }

ConfidenceBounds confidence_bounds(const TripModel& model, double confidence) {
  if (model.window.empty()) throw std::invalid_argument("confidence bounds need a non-empty window");
  const double sigma = std::sqrt(model.sigma2);
  const double n = static_cast<double>(model.window.size());
  return {model.w_best(), model.mu + confidence_z(confidence) * sigma / std::sqrt(n)};
}

}  // namespace antwsn
