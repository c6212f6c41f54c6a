#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace antwsn {

enum class ProtocolKind : std::uint8_t { BABR, SC, FF, FP, EEABR, IEEABR };

inline constexpr ProtocolKind kAllProtocols[] = {ProtocolKind::BABR, ProtocolKind::SC,    ProtocolKind::FF,
                                                 ProtocolKind::FP,   ProtocolKind::EEABR, ProtocolKind::IEEABR};

std::string_view to_string(ProtocolKind kind);
std::optional<ProtocolKind> parse_protocol(std::string_view name);

struct ProtocolParams {
  // Reinforcement weights of r = c1 * W_best/T + c2 * (confidence term).
  double c1 = 0.7;
  double c2 = 0.3;
  // Exponents of trail and visibility in the energy-aware next-hop rule.
  double alpha = 1.0;
  double beta = 1.0;
  double rho = 0.1;  // evaporation
  double phi = 1.0;  // deposit attenuation per backward hop
  double sc_beta = 1.0;
  double delta_tau_max = 1.0;
  // Visibility 1/(C - e_s) is evaluated with C - e_s >= epsilon * C.
  double visibility_epsilon = 1e-3;
  double ant_interval = 1.0;     // s between forward-ant launches per source
  double flood_delay_max = 0.05;  // s, random rebroadcast delay for flooded ants
  std::uint32_t ant_cap_multiplier = 5;
  double initial_energy = 30.0;  // C, copied from the scenario

  // Throws std::invalid_argument.
  void validate() const;
};

}  // namespace antwsn
