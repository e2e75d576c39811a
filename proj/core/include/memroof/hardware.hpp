#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace memroof {

struct ComputeSpec {
  double peak_flops = 0;  // aggregate ops/s across all processing elements
};

struct MemoryLevel {
  std::string id;
  std::optional<std::uint64_t> capacity;  // bytes; nullopt = unbounded
  double bandwidth = 0;                   // bytes/s
  double latency = 0;                     // seconds per transfer transaction

  bool bounded() const { return capacity.has_value(); }
  bool operator==(const MemoryLevel&) const = default;
};

struct InflectionPoint {
  std::string level_id;
  double value = 0;  // flops per byte
};

InflectionPoint inflection_point(const ComputeSpec& compute, const MemoryLevel& level);

// Ordered memory system, innermost (scratchpad) first, outermost (DDR or
// HBS) last. An optional chiplet buffer sits beside levels[1]: traffic
// routed to it bypasses everything except the scratchpad.
struct Hierarchy {
  std::vector<MemoryLevel> levels;
  std::optional<MemoryLevel> chiplet;
  ComputeSpec compute;

  void validate() const;  // throws std::invalid_argument
  bool has_level(std::string_view id) const;
  std::size_t level_index(std::string_view id) const;
  const MemoryLevel& level(std::size_t i) const { return levels.at(i); }
  // Level that off-chip transfers land in (L2 in the standard stack).
  std::size_t landing_index() const { return levels.size() >= 3 ? 1 : 0; }

  bool operator==(const Hierarchy&) const = default;
};

// Sentinel level index used by routing for the side-attached chiplet.
inline constexpr int kChipletLevel = -1;

// --- presets -------------------------------------------------------------

MemoryLevel scratchpad_default();  // 4 MB, 10 TB/s, 20 ns
MemoryLevel l2_default();          // 32 MB, 2 TB/s, 50 ns
MemoryLevel lpddr6();              // 173 GB/s, 100 ns
MemoryLevel lpddr6_3x();           // 520 GB/s, 100 ns
MemoryLevel ssd_pcie_gen5();       // 16 GB/s, 100 us
MemoryLevel ssd_pcie_gen6();       // 32 GB/s, 100 us
MemoryLevel hbs_level(double bandwidth, double latency);
MemoryLevel chiplet_level(double bandwidth, double latency = 50e-9,
                          std::uint64_t capacity = 96'000'000);

ComputeSpec default_compute();  // 35 TFLOP/s

// scratchpad + l2 + the given DDR-class level.
Hierarchy base_hierarchy(MemoryLevel ddr, ComputeSpec compute = default_compute());
Hierarchy with_storage(Hierarchy h, MemoryLevel storage);  // appends outermost
Hierarchy with_chiplet(Hierarchy h, MemoryLevel chiplet);

// Named level presets for the CLI/config layer.
MemoryLevel level_preset(std::string_view name);
std::vector<std::string> level_preset_names();

}  // namespace memroof
