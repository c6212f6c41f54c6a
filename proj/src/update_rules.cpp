#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "antwsn/protocols.hpp"

namespace antwsn {

void babr_reinforce(std::vector<double>& column, std::size_t chosen_row, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("reinforcement factor outside [0, 1]");
  if (chosen_row >= column.size()) throw std::out_of_range("reinforced row out of range");
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (i == chosen_row) {
      column[i] += r * (1.0 - column[i]);
    } else {
      column[i] -= r * column[i];
    }
  }
}

void babr_reinforce(RoutingTable& table, NodeId chosen, NodeId destination, double r) {
  const std::size_t row = table.row_of(chosen);
  if (row == RoutingTable::npos) throw std::out_of_range("reinforced node is not a neighbor");
  babr_reinforce(table.column(destination), row, r);
}

double babr_reinforcement_factor(const TripModel& model, Seconds trip, const ProtocolParams& params,
                                 double confidence) {
  if (!(trip > 0.0)) throw std::invalid_argument("trip time must be positive");
  const ConfidenceBounds b = confidence_bounds(model, confidence);
  const double first = params.c1 * (b.inf / trip);
  const double spread = b.sup - b.inf;
  const double denom = spread + (trip - b.inf);
  const double second = denom == 0.0 ? 0.0 : params.c2 * (spread / denom);
  const double r = first + second;
  if (!std::isfinite(r)) return 0.0;
  return std::clamp(r, 0.0, 1.0);
}

std::vector<double> sc_initialize(std::span<const double> cost_estimates, std::span<const double> local_costs,
                                  double sc_beta) {
  if (cost_estimates.empty()) throw std::invalid_argument("sc_initialize needs at least one neighbor");
  if (cost_estimates.size() != local_costs.size()) throw std::invalid_argument("cost vectors differ in length");
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cost_estimates.size(); ++i) c = std::min(c, local_costs[i] + cost_estimates[i]);
  // Shifting every exponent by the same constant leaves the ratios intact
  // and keeps exp() in range for long distances.
  double top = -std::numeric_limits<double>::infinity();
  for (double q : cost_estimates) top = std::max(top, (c - q) * sc_beta);
  std::vector<double> p(cost_estimates.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((c - cost_estimates[i]) * sc_beta - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

bool ff_should_broadcast(double p_from_neighbor, std::size_t neighbor_count) {
  if (neighbor_count == 0) throw std::invalid_argument("neighbor count must be at least 1");
  return p_from_neighbor < 1.0 / static_cast<double>(neighbor_count);
}

bool column_has_no_hint(const std::vector<double>& column) {
  if (column.empty()) return true;
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  return *hi - *lo <= 1e-12;
}

double eeabr_visibility(double initial_energy, double residual, double epsilon_fraction) {
  const double floor = epsilon_fraction * initial_energy;
  return 1.0 / std::max(initial_energy - residual, floor);
}

std::vector<double> eeabr_selection_probabilities(std::span<const double> trail, std::span<const double> energies,
                                                  const std::vector<bool>& excluded, const ProtocolParams& params) {
  if (trail.size() != energies.size() || trail.size() != excluded.size())
    throw std::invalid_argument("selection inputs differ in length");
  std::vector<double> w(trail.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (excluded[i]) continue;
    const double vis = eeabr_visibility(params.initial_energy, energies[i], params.visibility_epsilon);
    w[i] = std::pow(std::max(trail[i], 0.0), params.alpha) * std::pow(vis, params.beta);
    sum += w[i];
  }
  if (sum > 0.0) {
    for (double& v : w) v /= sum;
  } else {
    // Every candidate has zero trail: fall back to a uniform pick among them.
    std::size_t eligible = std::count(excluded.begin(), excluded.end(), false);
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = excluded[i] || eligible == 0 ? 0.0 : 1.0 / static_cast<double>(eligible);
  }
  return w;
}

std::optional<NodeId> eeabr_select_next(const RoutingTable& table, NodeId destination, const Ant& ant,
                                        const std::function<double(NodeId)>& energy_of,
                                        const ProtocolParams& params, RandomStream& rng) {
  const auto& nbrs = table.neighbors();
  if (nbrs.empty()) return std::nullopt;
  const auto& trail = table.column(destination);
  std::vector<double> energies(nbrs.size());
  std::vector<bool> excluded(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    excluded[i] = ant.remembers(nbrs[i]);
    energies[i] = excluded[i] ? 0.0 : energy_of(nbrs[i]);
  }
  const auto probs = eeabr_selection_probabilities(trail, energies, excluded, params);
  const auto idx = sample_index(probs, rng);
  if (!idx) return std::nullopt;
  return nbrs[*idx];
}

double eeabr_delta_tau(double initial_energy, double e_min, double e_avg, double visited, double delta_tau_max) {
  const double lower = e_avg - visited;
  if (lower <= 0.0) return delta_tau_max;
  const double denom = initial_energy - (e_min - visited) / lower;
  if (!(denom > 0.0)) return delta_tau_max;
  return std::min(1.0 / denom, delta_tau_max);
}

double eeabr_update_trail(double trail, double delta_tau, double backward_hops, double rho, double phi) {
  if (backward_hops < 1.0) throw std::invalid_argument("backward hop count must be at least 1");
  return (1.0 - rho) * trail + delta_tau / (phi * backward_hops);
}

SinkAdjacentProbabilities ieeabr_sink_adjacent(std::size_t neighbor_count) {
  if (neighbor_count == 0) throw std::invalid_argument("neighbor count must be at least 1");
  const double n = static_cast<double>(neighbor_count);
  const double denom = 4.0 * n * n;
  return {(9.0 * n - 5.0) / denom, neighbor_count == 1 ? 0.0 : (4.0 * n - 5.0) / denom};
}

std::vector<double> ieeabr_init_tables(std::size_t neighbor_count, std::optional<std::size_t> destination_row) {
  if (neighbor_count == 0) throw std::invalid_argument("neighbor count must be at least 1");
  if (!destination_row) return std::vector<double>(neighbor_count, 1.0 / static_cast<double>(neighbor_count));
  if (*destination_row >= neighbor_count) throw std::out_of_range("destination row out of range");
  const auto split = ieeabr_sink_adjacent(neighbor_count);
  std::vector<double> column(neighbor_count, split.other);
  column[*destination_row] = split.destination;
  return column;
}

bool ieeabr_link_failure(std::vector<double>& column, std::size_t lost_row) {
  if (lost_row >= column.size()) throw std::out_of_range("lost row out of range");
  const double lost = column[lost_row];
  if (lost >= 1.0 || column.size() == 1) return false;
  const double z = lost / (1.0 - lost);
  for (std::size_t i = 0; i < column.size(); ++i) column[i] = i == lost_row ? 0.0 : column[i] * (1.0 + z);
  return true;
}

bool uniform_link_failure(std::vector<double>& column, std::size_t lost_row) {
  if (lost_row >= column.size()) throw std::out_of_range("lost row out of range");
  if (column.size() == 1) return false;
  const double share = column[lost_row] / static_cast<double>(column.size() - 1);
  for (std::size_t i = 0; i < column.size(); ++i) column[i] = i == lost_row ? 0.0 : column[i] + share;
  return true;
}

bool ieeabr_ant_admission(std::uint64_t live_forward_ants, std::size_t node_count, std::uint32_t multiplier) {
  return live_forward_ants < static_cast<std::uint64_t>(multiplier) * node_count;
}

std::optional<std::size_t> sample_index(std::span<const double> weights, RandomStream& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) return std::nullopt;
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (target < acc) return i;
  }
  return last;  // rounding left target at the very top
}

}  // namespace antwsn
