#include "memroof/hardware.hpp"

#include <algorithm>
#include <set>

namespace memroof {

InflectionPoint inflection_point(const ComputeSpec& compute, const MemoryLevel& level) {
  if (level.bandwidth <= 0)
    throw std::invalid_argument("inflection_point: level '" + level.id +
                                "' has non-positive bandwidth");
  return {level.id, compute.peak_flops / level.bandwidth};
}

void Hierarchy::validate() const {
  if (levels.size() < 2)
    throw std::invalid_argument("hierarchy needs at least two levels");
  if (compute.peak_flops <= 0)
    throw std::invalid_argument("compute.peak_flops must be positive");
  std::set<std::string> ids;
  for (const auto& lv : levels) {
    if (lv.id.empty()) throw std::invalid_argument("memory level with empty id");
    if (!ids.insert(lv.id).second)
      throw std::invalid_argument("duplicate level id '" + lv.id + "'");
    if (lv.bandwidth <= 0)
      throw std::invalid_argument("level '" + lv.id + "': bandwidth must be positive");
    if (lv.latency < 0)
      throw std::invalid_argument("level '" + lv.id + "': latency must be >= 0");
    if (lv.capacity && *lv.capacity == 0)
      throw std::invalid_argument("level '" + lv.id + "': capacity must be positive");
  }
  if (chiplet) {
    if (levels.size() < 3)
      throw std::invalid_argument("chiplet requires the full scratchpad/l2/ddr stack");
    if (ids.count(chiplet->id))
      throw std::invalid_argument("chiplet id collides with a level id");
    if (chiplet->bandwidth <= 0 || !chiplet->capacity)
      throw std::invalid_argument("chiplet needs positive bandwidth and bounded capacity");
  }
}

bool Hierarchy::has_level(std::string_view id) const {
  if (chiplet && chiplet->id == id) return true;
  return std::any_of(levels.begin(), levels.end(),
                     [&](const MemoryLevel& lv) { return lv.id == id; });
}

std::size_t Hierarchy::level_index(std::string_view id) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i].id == id) return i;
  throw std::invalid_argument("unknown level id '" + std::string(id) + "'");
}

MemoryLevel scratchpad_default() { return {"scratchpad", 4'000'000, 10e12, 20e-9}; }
MemoryLevel l2_default() { return {"l2", 32'000'000, 2e12, 50e-9}; }
MemoryLevel lpddr6() { return {"ddr", std::nullopt, 173e9, 100e-9}; }
MemoryLevel lpddr6_3x() { return {"ddr", std::nullopt, 520e9, 100e-9}; }
MemoryLevel ssd_pcie_gen5() { return {"hbs", std::nullopt, 16e9, 100e-6}; }
MemoryLevel ssd_pcie_gen6() { return {"hbs", std::nullopt, 32e9, 100e-6}; }

MemoryLevel hbs_level(double bandwidth, double latency) {
  return {"hbs", std::nullopt, bandwidth, latency};
}

MemoryLevel chiplet_level(double bandwidth, double latency, std::uint64_t capacity) {
  return {"chiplet", capacity, bandwidth, latency};
}

ComputeSpec default_compute() { return {35e12}; }

Hierarchy base_hierarchy(MemoryLevel ddr, ComputeSpec compute) {
  Hierarchy h;
  h.levels = {scratchpad_default(), l2_default(), std::move(ddr)};
  h.compute = compute;
  return h;
}

Hierarchy with_storage(Hierarchy h, MemoryLevel storage) {
  h.levels.push_back(std::move(storage));
  return h;
}

Hierarchy with_chiplet(Hierarchy h, MemoryLevel chiplet) {
  h.chiplet = std::move(chiplet);
  return h;
}

MemoryLevel level_preset(std::string_view name) {
  if (name == "lpddr6") return lpddr6();
  if (name == "lpddr6-3x") return lpddr6_3x();
  if (name == "ssd-pcie-gen5") return ssd_pcie_gen5();
  if (name == "ssd-pcie-gen6") return ssd_pcie_gen6();
  if (name == "scratchpad") return scratchpad_default();
  if (name == "l2") return l2_default();
  std::string known;
  for (const auto& n : level_preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown hardware preset '" + std::string(name) +
                              "'; valid presets: " + known);
}

std::vector<std::string> level_preset_names() {
  return {"lpddr6", "lpddr6-3x", "ssd-pcie-gen5", "ssd-pcie-gen6", "scratchpad", "l2"};
}

}  // namespace memroof
