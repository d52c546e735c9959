#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mlpart {

/// The six partitioner configurations.
enum class Preset { eco, eco_alg, f_cycle, strong, amg_eco, amg };

enum class CoarseningFamily { matching, amg };
enum class CycleKind { v_cycle, f_cycle };

inline constexpr std::array<Preset, 6> kAllPresets = {Preset::eco,     Preset::eco_alg, Preset::f_cycle,
                                                      Preset::strong,  Preset::amg_eco, Preset::amg};

inline CoarseningFamily coarsening_family(Preset p) {
  return (p == Preset::amg_eco || p == Preset::amg) ? CoarseningFamily::amg : CoarseningFamily::matching;
}

/// fm + multi-try FM at every level for the strong family, plain FM otherwise.
inline bool uses_multi_try_fm(Preset p) {
  return p == Preset::strong || p == Preset::f_cycle || p == Preset::amg;
}

inline CycleKind cycle_kind(Preset p) { return p == Preset::f_cycle ? CycleKind::f_cycle : CycleKind::v_cycle; }

inline bool uses_algebraic_distance(Preset p) {
  return p == Preset::eco_alg || p == Preset::amg_eco || p == Preset::amg;
}

inline std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::eco: return "eco";
    case Preset::eco_alg: return "eco-alg";
    case Preset::f_cycle: return "f-cycle";
    case Preset::strong: return "strong";
    case Preset::amg_eco: return "amg-eco";
    case Preset::amg: return "amg";
  }
  return "?";
}

inline Preset parse_preset(std::string_view name) {
  for (Preset p : kAllPresets) {
    if (preset_name(p) == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

}  // namespace mlpart
